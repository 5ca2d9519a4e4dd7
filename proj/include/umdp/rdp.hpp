#pragma once

#include <cstddef>
#include <vector>

#include "umdp/product.hpp"

namespace umdp {

enum class AdversaryKind { TwoLayer, Lp };
// Reach: maximize the probability of reaching an accepting product state
// (accepting states absorbing at value 1). Invariance: maximize the
// probability of staying inside accepting states for the whole horizon
// (non-accepting states absorbing at value 0).
enum class Objective { Reach, Invariance };

struct Horizon {
    bool bounded = false;
    std::size_t steps = 0;       // sweeps when bounded
    double tol = 1e-6;           // residual threshold when unbounded
    std::size_t max_iters = 10000;

    static Horizon unbounded(double tol = 1e-6, std::size_t max_iters = 10000) { return {false, 0, tol, max_iters}; }
    static Horizon bounded_steps(std::size_t k) { return {true, k, 0.0, k}; }
};

struct RdpOptions {
    Horizon horizon;
    AdversaryKind adversary = AdversaryKind::TwoLayer;
    Objective objective = Objective::Reach;
    bool compute_upper = true;
};

struct ValueFunction {
    std::vector<double> p; // per product state
    std::size_t iterations = 0;
    double residual = 0.0;
    bool converged = false;
    // Largest decrease (Reach) or increase (Invariance) seen between sweeps;
    // the recursion is monotone, so anything beyond rounding signals a bug.
    double monotonicity_violation = 0.0;
};

struct SynthesisResult {
    ValueFunction lower;
    ValueFunction upper;
    std::vector<ActionId> strategy; // per product state
    double e_avg = 0.0;             // mean over safe cells of upper - lower at Lift(s)
    double seconds = 0.0;
};

SynthesisResult robust_value_iteration(const ProductUmdp& product, const RdpOptions& opt);

// Mean of upper - lower over Lift(s) for every safe base state s.
double average_gap(const ProductUmdp& product, const std::vector<double>& lower, const std::vector<double>& upper);

} // namespace umdp
