#pragma once

#include <span>
#include <vector>

#include "umdp/adversary.hpp"

namespace umdp {

// min c.x  s.t.  row_lower <= A x <= row_upper,  lower <= x <= upper,
// with every bound finite. A is dense row-major (rows x cols).
struct LinearProgram {
    std::size_t cols = 0;
    std::vector<double> c;
    std::vector<double> lower, upper;
    std::vector<std::vector<double>> rows;
    std::vector<double> row_lower, row_upper;

    void add_row(std::vector<double> a, double lo, double hi);
};

struct LpSolution {
    std::vector<double> x;
    double objective = 0.0;
    std::size_t pivots = 0;
};

// Two-phase bounded-variable primal simplex on a dense tableau. Dantzig
// pricing, switching to Bland's rule after a run of degenerate pivots.
// Throws LpInfeasible.
LpSolution solve_lp(const LinearProgram& lp);

// The adversary problem as an explicit LP over Gamma. Rows with a mass
// budget or background bound need the values of unlisted states, passed via
// background (its order is ignored).
double lp_adversary(const BoundsView& b, std::span<const double> values, Direction dir, Gamma* gamma_out = nullptr,
                    const BackgroundValues* background = nullptr);

} // namespace umdp
