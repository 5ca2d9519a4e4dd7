#pragma once

#include <cstdint>
#include <random>

#include "umdp/abstraction.hpp"
#include "umdp/bounds.hpp"

namespace umdp {

struct RandomGammaOptions {
    std::size_t n_post = 10;       // listed successors
    std::size_t max_block = 4;     // largest block
    double p_unblocked = 0.0;      // chance a state stays outside every block
    double max_halfwidth = 0.3;    // interval slack around the witness
    double p_zero_lower = 0.3;     // chance a lower bound is dropped to 0
    StateId first_state = 0;       // ids are first_state .. first_state + n_post - 1
};

// Random Gamma that contains a witness distribution by construction: sample
// gamma*, then place state and block intervals around it. Block slots are
// linked; no mass budget, no background.
TransitionBounds random_gamma(std::mt19937_64& rng, const RandomGammaOptions& opt);

// Hand-built UMDP: rows given in (s, a) order, the unsafe state is the last
// one and gets the "unsafe" label. block_of may be empty (one block per state).
UmdpAbstraction assemble_umdp(StateId n_states, ActionId n_actions, std::vector<std::vector<std::string>> labels,
                              const std::vector<TransitionBounds>& rows, std::vector<BlockId> block_of = {});

struct RandomUmdpOptions {
    StateId n_cells = 8;       // plus one unsafe state
    ActionId n_actions = 2;
    StateId n_goal = 2;        // the first n_goal cells carry "goal"
    std::size_t max_post = 5;  // listed successors per row
    double eps_c = 0.05;       // mass budget allowance; 0 disables the budget
};

// Random feasible UMDP with consecutive pairs of cells as blocks.
UmdpAbstraction random_umdp(std::mt19937_64& rng, const RandomUmdpOptions& opt);

} // namespace umdp
