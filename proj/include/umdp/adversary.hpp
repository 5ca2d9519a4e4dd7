#pragma once

#include <span>
#include <utility>
#include <vector>

#include "umdp/bounds.hpp"

namespace umdp {

enum class Direction { Minimize, Maximize };

// Sparse distribution over base states.
using Gamma = std::vector<std::pair<StateId, double>>;

// Reusable buffers so repeated calls do not allocate.
struct AdversaryWorkspace {
    std::vector<std::size_t> order;
    std::vector<double> gamma;
    std::vector<double> block_mass;
};

// Values of states not listed in a row, used when the row has a background
// bound. order lists every state sorted by (value, state id) ascending and
// value is indexed by state id.
struct BackgroundValues {
    std::span<const StateId> order;
    std::span<const double> value;
};

// Two-layer O-maximization over a simplified Gamma (no mass budget).
// values[k] is the value of b.states[k]. Returns the optimal objective
// sum gamma(s') p(s'); the optimal gamma is written to gamma_out when given.
// Throws InfeasibleGamma when the bounds cannot hold unit mass.
double o_maximize_2layer(const BoundsView& b, std::span<const double> values, Direction dir, AdversaryWorkspace& ws,
                         Gamma* gamma_out = nullptr, const BackgroundValues* background = nullptr);

// Convenience overload with a private workspace.
double o_maximize_2layer(const BoundsView& b, std::span<const double> values, Direction dir,
                         Gamma* gamma_out = nullptr, const BackgroundValues* background = nullptr);

struct ConstraintReport {
    bool ok = true;
    double worst = 0.0; // largest violation found
    std::string message;
};

// Checks gamma against every constraint of Gamma, including the mass budget
// and the background bound. n_states is the size of the full state space.
ConstraintReport check_gamma(const BoundsView& b, const Gamma& gamma, StateId n_states, double tol);

} // namespace umdp
