#include "umdp/rdp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "umdp/adversary.hpp"
#include "umdp/error.hpp"
#include "umdp/lp.hpp"
#include "umdp/parallel.hpp"

namespace umdp {

namespace {

constexpr double kImprove = 1e-12;

// Values of (., z) successors for every base state, plus their value order.
struct Background {
    std::vector<double> value;
    std::vector<StateId> order;
};

void fill_background(const ProductUmdp& prod, DfaState z, const std::vector<double>& v, bool with_order,
                     Background& out) {
    auto succ = prod.successors(z);
    out.value.resize(succ.size());
    for (std::size_t s = 0; s < succ.size(); ++s) out.value[s] = succ[s] >= 0 ? v[succ[s]] : 0.0;
    if (!with_order) return;
    out.order.resize(succ.size());
    std::iota(out.order.begin(), out.order.end(), 0);
    std::sort(out.order.begin(), out.order.end(), [&](StateId a, StateId b) {
        if (out.value[a] != out.value[b]) return out.value[a] < out.value[b];
        return a < b;
    });
}

struct Evaluator {
    const ProductUmdp& prod;
    AdversaryKind kind;
    AdversaryWorkspace ws;
    std::vector<double> vals;

    double operator()(ProductId p, ActionId a, const std::vector<double>& v, Direction dir, const Background* bg) {
        const StateId s = prod.base_state(p);
        const DfaState z = prod.dfa_state(p);
        BoundsView b = prod.base().bounds(s, a);
        auto succ = prod.successors(z);
        vals.resize(b.states.size());
        for (std::size_t k = 0; k < b.states.size(); ++k) {
            const ProductId t = succ[b.states[k].state];
            vals[k] = t >= 0 ? v[t] : 0.0;
        }
        BackgroundValues bv;
        const BackgroundValues* bvp = nullptr;
        if (bg != nullptr && !bg->value.empty()) {
            bv.order = bg->order;
            bv.value = bg->value;
            bvp = &bv;
        }
        double r;
        if (kind == AdversaryKind::TwoLayer)
            r = o_maximize_2layer(b, vals, dir, ws, nullptr, b.background_upper > 0 ? bvp : nullptr);
        else
            r = lp_adversary(b, vals, dir, nullptr, bvp);
        return std::clamp(r, 0.0, 1.0);
    }
};

} // namespace

double average_gap(const ProductUmdp& product, const std::vector<double>& lower, const std::vector<double>& upper) {
    const auto& base = product.base();
    double sum = 0.0;
    std::size_t n = 0;
    for (StateId s = 0; s < base.n_states; ++s) {
        if (s == base.unsafe) continue;
        const ProductId p = product.lift(s);
        sum += upper[p] - lower[p];
        ++n;
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

SynthesisResult robust_value_iteration(const ProductUmdp& prod, const RdpOptions& opt) {
    const auto start = std::chrono::steady_clock::now();
    const ProductId np = prod.n_states();
    const ActionId na = prod.n_actions();
    const auto& base = prod.base();

    bool any_budget = false, any_background = false;
    for (const auto& m : base.meta) {
        any_budget = any_budget || m.mass_budget;
        any_background = any_background || m.background_upper > 0;
    }
    if (any_budget && opt.adversary == AdversaryKind::TwoLayer)
        throw Error(ErrorKind::InvalidArgument, "two-layer adversary needs the simplified abstraction");
    const bool need_bg = any_budget || any_background;
    const bool need_order = any_background && opt.adversary == AdversaryKind::TwoLayer;

    // Absorbing states and their fixed values.
    std::vector<signed char> pinned(np, -1);
    for (ProductId p = 0; p < np; ++p) {
        if (opt.objective == Objective::Reach && prod.accepting(p)) pinned[p] = 1;
        if (opt.objective == Objective::Invariance && !prod.accepting(p)) pinned[p] = 0;
    }

    SynthesisResult res;
    res.lower.p.assign(np, 0.0);
    for (ProductId p = 0; p < np; ++p) res.lower.p[p] = prod.accepting(p) ? 1.0 : 0.0;
    if (opt.compute_upper) res.upper.p = res.lower.p;
    res.strategy.assign(np, 0);

    const std::size_t nz = static_cast<std::size_t>(prod.dfa().n_states());
    std::vector<Background> bg_lo(nz), bg_up(nz);
    std::vector<double> next_lo(np), next_up(opt.compute_upper ? np : 0);
    std::vector<ActionId> arg(np, 0);

    const std::size_t n_chunks = std::min<std::size_t>(static_cast<std::size_t>(np), 256);
    const std::size_t limit = opt.horizon.bounded ? opt.horizon.steps : opt.horizon.max_iters;
    std::size_t iter = 0;
    bool converged = opt.horizon.bounded && limit == 0;
    while (iter < limit) {
        if (need_bg)
            for (DfaState z : prod.dfa_states_used()) {
                fill_background(prod, z, res.lower.p, need_order, bg_lo[z]);
                if (opt.compute_upper) fill_background(prod, z, res.upper.p, need_order, bg_up[z]);
            }
        parallel_for(n_chunks, [&](std::size_t chunk) {
            Evaluator eval{prod, opt.adversary, {}, {}};
            const std::size_t lo = chunk * np / n_chunks, hi = (chunk + 1) * np / n_chunks;
            for (std::size_t i = lo; i < hi; ++i) {
                const ProductId p = static_cast<ProductId>(i);
                if (pinned[p] >= 0) {
                    next_lo[p] = pinned[p];
                    if (opt.compute_upper) next_up[p] = pinned[p];
                    continue;
                }
                const DfaState z = prod.dfa_state(p);
                double best = -1.0;
                for (ActionId a = 0; a < na; ++a) {
                    double v = eval(p, a, res.lower.p, Direction::Minimize, need_bg ? &bg_lo[z] : nullptr);
                    if (v > best) {
                        best = v;
                        arg[p] = a;
                    }
                }
                next_lo[p] = best;
                if (opt.compute_upper) {
                    double up = -1.0;
                    for (ActionId a = 0; a < na; ++a)
                        up = std::max(up, eval(p, a, res.upper.p, Direction::Maximize, need_bg ? &bg_up[z] : nullptr));
                    next_up[p] = up;
                }
            }
        });
        ++iter;

        double r_lo = 0.0, r_up = 0.0;
        for (ProductId p = 0; p < np; ++p) {
            const double change = next_lo[p] - res.lower.p[p];
            r_lo = std::max(r_lo, std::abs(change));
            const double against = opt.objective == Objective::Reach ? -change : change;
            res.lower.monotonicity_violation = std::max(res.lower.monotonicity_violation, against);
            if (opt.compute_upper) {
                const double cu = next_up[p] - res.upper.p[p];
                r_up = std::max(r_up, std::abs(cu));
                const double against_up = opt.objective == Objective::Reach ? -cu : cu;
                res.upper.monotonicity_violation = std::max(res.upper.monotonicity_violation, against_up);
            }
            // Keep the action that last raised the value; re-selecting among
            // actions tied at the fixed point could pick a self-loop.
            if (opt.horizon.bounded || opt.objective == Objective::Invariance || change > kImprove)
                res.strategy[p] = arg[p];
        }
        res.lower.p.swap(next_lo);
        if (opt.compute_upper) res.upper.p.swap(next_up);
        res.lower.residual = r_lo;
        res.upper.residual = r_up;
        if (!opt.horizon.bounded && r_lo < opt.horizon.tol && (!opt.compute_upper || r_up < opt.horizon.tol)) {
            converged = true;
            break;
        }
    }
    if (opt.horizon.bounded) converged = true;
    res.lower.iterations = res.upper.iterations = iter;
    res.lower.converged = res.upper.converged = converged;
    if (opt.compute_upper) res.e_avg = average_gap(prod, res.lower.p, res.upper.p);
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

} // namespace umdp
