#include "umdp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "umdp/error.hpp"

namespace umdp {

void LinearProgram::add_row(std::vector<double> a, double lo, double hi) {
    if (a.size() != cols) throw Error(ErrorKind::DimensionMismatch, "LP row width");
    rows.push_back(std::move(a));
    row_lower.push_back(lo);
    row_upper.push_back(hi);
}

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-11;
constexpr std::size_t kDegenerateRun = 50;
constexpr std::size_t kMaxPivots = 100000;

enum class Status : unsigned char { Basic, AtLower, AtUpper };

struct Tableau {
    std::size_t m = 0, n = 0; // rows, columns (all variables)
    std::vector<double> t;    // m x n
    std::vector<double> lo, up, x;
    std::vector<Status> status;
    std::vector<std::size_t> basis; // variable basic in each row
    std::vector<double> d;          // reduced costs
    std::size_t pivots = 0;

    double& at(std::size_t i, std::size_t j) { return t[i * n + j]; }

    void price(const std::vector<double>& cost) {
        d = cost;
        for (std::size_t i = 0; i < m; ++i) {
            const double cb = cost[basis[i]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) d[j] -= cb * at(i, j);
        }
    }

    void pivot(std::size_t r, std::size_t j) {
        const double p = at(r, j);
        for (std::size_t k = 0; k < n; ++k) at(r, k) /= p;
        at(r, j) = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == r) continue;
            const double f = at(i, j);
            if (f == 0.0) continue;
            for (std::size_t k = 0; k < n; ++k) at(i, k) -= f * at(r, k);
            at(i, j) = 0.0;
        }
        const double f = d[j];
        if (f != 0.0) {
            for (std::size_t k = 0; k < n; ++k) d[k] -= f * at(r, k);
            d[j] = 0.0;
        }
        basis[r] = j;
        ++pivots;
    }

    // Runs primal simplex iterations until no improving column remains.
    void optimize() {
        std::size_t degenerate = 0;
        while (true) {
            if (pivots > kMaxPivots) throw Error(ErrorKind::NoConvergence, "simplex pivot limit reached");
            const bool bland = degenerate >= kDegenerateRun;
            std::size_t enter = n;
            double best = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (status[j] == Status::Basic || up[j] - lo[j] <= 0) continue;
                double gain = 0.0;
                if (status[j] == Status::AtLower && d[j] < -kCostTol) gain = -d[j];
                else if (status[j] == Status::AtUpper && d[j] > kCostTol) gain = d[j];
                if (gain <= 0) continue;
                if (bland) {
                    enter = j;
                    break;
                }
                if (gain > best) {
                    best = gain;
                    enter = j;
                }
            }
            if (enter == n) return;

            const double dir = status[enter] == Status::AtLower ? 1.0 : -1.0;
            double theta = up[enter] - lo[enter];
            std::size_t leave = m; // m means bound flip
            for (std::size_t i = 0; i < m; ++i) {
                const double delta = -dir * at(i, enter);
                const std::size_t bv = basis[i];
                double limit;
                if (delta < -kPivotTol) limit = (x[bv] - lo[bv]) / -delta;
                else if (delta > kPivotTol) limit = (up[bv] - x[bv]) / delta;
                else continue;
                limit = std::max(limit, 0.0);
                if (limit < theta || (limit == theta && leave < m && bv < basis[leave])) {
                    theta = limit;
                    leave = i;
                }
            }
            degenerate = theta <= 1e-14 ? degenerate + 1 : 0;

            x[enter] += dir * theta;
            for (std::size_t i = 0; i < m; ++i) x[basis[i]] -= dir * at(i, enter) * theta;
            if (leave == m) {
                status[enter] = status[enter] == Status::AtLower ? Status::AtUpper : Status::AtLower;
                x[enter] = status[enter] == Status::AtLower ? lo[enter] : up[enter];
                continue;
            }
            const std::size_t out = basis[leave];
            const double delta = -dir * at(leave, enter);
            status[out] = delta < 0 ? Status::AtLower : Status::AtUpper;
            x[out] = status[out] == Status::AtLower ? lo[out] : up[out];
            status[enter] = Status::Basic;
            pivot(leave, enter);
        }
    }
};

} // namespace

LpSolution solve_lp(const LinearProgram& lp) {
    const std::size_t nx = lp.cols, m = lp.rows.size();
    Tableau tb;
    tb.m = m;
    tb.n = nx + 2 * m; // structural, row activities, artificials
    tb.t.assign(tb.m * tb.n, 0.0);
    tb.lo.resize(tb.n);
    tb.up.resize(tb.n);
    tb.x.resize(tb.n);
    tb.status.assign(tb.n, Status::AtLower);
    tb.basis.resize(m);

    for (std::size_t j = 0; j < nx; ++j) {
        if (!(lp.lower[j] <= lp.upper[j])) throw Error(ErrorKind::LpInfeasible, "variable bounds cross");
        tb.lo[j] = lp.lower[j];
        tb.up[j] = lp.upper[j];
        tb.x[j] = lp.lower[j];
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (!(lp.row_lower[i] <= lp.row_upper[i])) throw Error(ErrorKind::LpInfeasible, "row bounds cross");
        const std::size_t s = nx + i;
        tb.lo[s] = lp.row_lower[i];
        tb.up[s] = lp.row_upper[i];
        tb.x[s] = lp.row_lower[i];
    }
    // Row i: a_i.x - s_i + sign_i * art_i = 0, scaled by sign_i.
    for (std::size_t i = 0; i < m; ++i) {
        double act = -tb.x[nx + i];
        for (std::size_t j = 0; j < nx; ++j) act += lp.rows[i][j] * tb.x[j];
        const double sign = act > 0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < nx; ++j) tb.at(i, j) = sign * lp.rows[i][j];
        tb.at(i, nx + i) = -sign;
        const std::size_t a = nx + m + i;
        tb.at(i, a) = 1.0;
        tb.lo[a] = 0.0;
        tb.up[a] = std::numeric_limits<double>::infinity();
        tb.x[a] = std::abs(act);
        tb.status[a] = Status::Basic;
        tb.basis[i] = a;
    }

    std::vector<double> cost(tb.n, 0.0);
    for (std::size_t i = 0; i < m; ++i) cost[nx + m + i] = 1.0;
    tb.price(cost);
    tb.optimize();
    double infeas = 0.0;
    for (std::size_t i = 0; i < m; ++i) infeas += tb.x[nx + m + i];
    if (infeas > 1e-9) throw Error(ErrorKind::LpInfeasible, "phase 1 ended with infeasibility " + std::to_string(infeas));

    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t a = nx + m + i;
        tb.up[a] = 0.0;
        tb.x[a] = 0.0;
        if (tb.status[a] != Status::Basic) tb.status[a] = Status::AtLower;
    }
    std::fill(cost.begin(), cost.end(), 0.0);
    for (std::size_t j = 0; j < nx; ++j) cost[j] = lp.c[j];
    tb.price(cost);
    tb.optimize();

    LpSolution sol;
    sol.x.resize(nx);
    for (std::size_t j = 0; j < nx; ++j) {
        sol.x[j] = std::clamp(tb.x[j], lp.lower[j], lp.upper[j]);
        sol.objective += lp.c[j] * sol.x[j];
    }
    sol.pivots = tb.pivots;
    return sol;
}

double lp_adversary(const BoundsView& b, std::span<const double> values, Direction dir, Gamma* gamma_out,
                    const BackgroundValues* background) {
    const bool outside = b.mass_budget || b.background_upper > 0;
    if (outside && background == nullptr)
        throw Error(ErrorKind::InvalidArgument, "rows with unlisted mass need background values");
    const std::size_t n = b.states.size();
    std::vector<StateId> extra;
    if (outside) {
        std::size_t k = 0;
        for (StateId s = 0; s < static_cast<StateId>(background->value.size()); ++s) {
            while (k < n && b.states[k].state < s) ++k;
            if (k < n && b.states[k].state == s) continue;
            extra.push_back(s);
        }
    }
    const double sign = dir == Direction::Minimize ? 1.0 : -1.0;
    const double extra_upper = b.mass_budget ? 1.0 : b.background_upper;

    LinearProgram lp;
    lp.cols = n + extra.size();
    for (std::size_t k = 0; k < n; ++k) {
        lp.c.push_back(sign * values[k]);
        lp.lower.push_back(b.states[k].lower);
        lp.upper.push_back(b.states[k].upper);
    }
    for (StateId s : extra) {
        lp.c.push_back(sign * background->value[s]);
        lp.lower.push_back(0.0);
        lp.upper.push_back(extra_upper);
    }
    lp.add_row(std::vector<double>(lp.cols, 1.0), 1.0, 1.0);
    for (std::size_t q = 0; q < b.blocks.size(); ++q) {
        std::vector<double> a(lp.cols, 0.0);
        for (std::size_t k = 0; k < n; ++k)
            if (b.states[k].block_slot == static_cast<std::int32_t>(q)) a[k] = 1.0;
        lp.add_row(std::move(a), b.blocks[q].lower, b.blocks[q].upper);
    }
    if (b.mass_budget) {
        std::vector<double> a(lp.cols, 0.0);
        std::fill(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(n), 1.0);
        lp.add_row(std::move(a), 1.0 - b.eps_c, 1.0);
    }

    LpSolution sol = solve_lp(lp);
    if (gamma_out) {
        gamma_out->clear();
        for (std::size_t k = 0; k < n; ++k)
            if (sol.x[k] > 0) gamma_out->emplace_back(b.states[k].state, sol.x[k]);
        for (std::size_t e = 0; e < extra.size(); ++e)
            if (sol.x[n + e] > 0) gamma_out->emplace_back(extra[e], sol.x[n + e]);
        std::sort(gamma_out->begin(), gamma_out->end());
    }
    return sign * sol.objective;
}

} // namespace umdp
