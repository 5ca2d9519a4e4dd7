#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "umdp/geometry.hpp"

namespace umdp {

using DfaState = std::int32_t;

// Total deterministic automaton over the alphabet 2^AP. delta is stored as a
// dense table indexed by (state, letter) where letter bit i is set iff ap[i]
// holds.
class Dfa {
public:
    struct Edge {
        DfaState from = 0;
        // Partial assignment: propositions not mentioned are don't-care.
        std::vector<std::pair<std::string, bool>> label;
        bool is_else = false;
        DfaState to = 0;
    };

    Dfa(std::vector<std::string> ap, DfaState n_states, DfaState initial, std::vector<DfaState> accepting,
        const std::vector<Edge>& edges);

    const std::vector<std::string>& ap() const { return ap_; }
    DfaState n_states() const { return n_; }
    DfaState initial() const { return initial_; }
    bool accepting(DfaState z) const { return accepting_[z]; }

    std::uint32_t letter(const std::vector<std::string>& props) const; // UnknownProposition
    DfaState next(DfaState z, std::uint32_t letter) const { return table_[static_cast<std::size_t>(z) * n_letters_ + letter]; }
    DfaState next(DfaState z, const std::vector<std::string>& props) const { return next(z, letter(props)); }

private:
    std::vector<std::string> ap_;
    DfaState n_;
    DfaState initial_;
    std::vector<char> accepting_;
    std::uint32_t n_letters_;
    std::vector<DfaState> table_;
};

Dfa load_dfa(const std::string& path);
Dfa parse_dfa(const std::string& json_text, const std::string& origin = "<dfa>");
std::string dfa_to_json(const Dfa& d);

struct DfaRun {
    DfaState final_state = 0;
    bool accepted = false;
};

// Acceptance latches on the first visit to an accepting state.
DfaRun dfa_run(const Dfa& d, const std::vector<std::vector<std::string>>& trace);

// Built-in automata for the bundled benchmarks.
Dfa dfa_reach_avoid();              // F goal & G !unsafe
Dfa dfa_water_carpet_charge();      // 2D unicycle: reach charge, after water visit carpet before charge
Dfa dfa_bounded_safety(int horizon); // G^{<=K} !unsafe as a counter automaton
Dfa dfa_safety();                   // G !unsafe: ok state accepting, trap otherwise
Dfa dfa_trivial(std::vector<std::string> ap = {kUnsafeProp}); // single accepting state
Dfa dfa_preset(const std::string& name, int horizon = 15);

} // namespace umdp
