#include "umdp/bounds.hpp"

#include <algorithm>
#include <sstream>

namespace umdp {

TransitionBounds TransitionBounds::from(const BoundsView& v) {
    TransitionBounds t;
    t.states.assign(v.states.begin(), v.states.end());
    t.blocks.assign(v.blocks.begin(), v.blocks.end());
    t.eps_c = v.eps_c;
    t.mass_budget = v.mass_budget;
    t.background_upper = v.background_upper;
    return t;
}

void TransitionBounds::link_blocks(std::span<const BlockId> block_of) {
    for (auto& e : states) {
        e.block_slot = -1;
        BlockId q = block_of[e.state];
        for (std::size_t k = 0; k < blocks.size(); ++k)
            if (blocks[k].block == q) e.block_slot = static_cast<std::int32_t>(k);
    }
}

TransitionBounds simplify(const BoundsView& b, StateId unsafe, BlockId unsafe_block) {
    TransitionBounds out = TransitionBounds::from(b);
    if (!b.mass_budget) return out;
    out.mass_budget = false;
    out.background_upper = 0.0;
    const double eps = b.eps_c;
    if (eps > 0) {
        auto it = std::find_if(out.states.begin(), out.states.end(), [&](const StateBound& e) { return e.state == unsafe; });
        if (it != out.states.end()) {
            it->upper += eps;
        } else {
            StateBound e{unsafe, 0.0, eps, -1};
            for (std::size_t k = 0; k < out.blocks.size(); ++k)
                if (out.blocks[k].block == unsafe_block) e.block_slot = static_cast<std::int32_t>(k);
            auto pos = std::lower_bound(out.states.begin(), out.states.end(), unsafe,
                                        [](const StateBound& x, StateId s) { return x.state < s; });
            out.states.insert(pos, e);
        }
        for (auto& q : out.blocks)
            if (q.block == unsafe_block) q.upper += eps;
    }
    for (auto& e : out.states) e.upper = std::min(1.0, e.upper);
    for (auto& q : out.blocks) q.upper = std::min(1.0, q.upper);
    return out;
}

CertificateReport check_certificates(const BoundsView& b, StateId n_states, double tol) {
    std::ostringstream msg;
    double sum_upper = 0.0;
    std::vector<double> block_lower_sum(b.blocks.size(), 0.0), block_upper_sum(b.blocks.size(), 0.0);
    double free_lower = 0.0;
    for (const auto& e : b.states) {
        if (!(e.lower >= -tol && e.lower <= e.upper + tol && e.upper <= 1 + tol))
            msg << "state " << e.state << " interval [" << e.lower << ", " << e.upper << "] invalid; ";
        sum_upper += e.upper;
        if (e.block_slot >= 0) {
            block_lower_sum[e.block_slot] += e.lower;
            block_upper_sum[e.block_slot] += e.upper;
        } else {
            free_lower += e.lower;
        }
    }
    const double unlisted = static_cast<double>(n_states) - static_cast<double>(b.states.size());
    if (sum_upper + b.background_upper * unlisted < 1 - tol) msg << "upper bounds sum below 1; ";
    if (b.mass_budget && sum_upper < 1 - b.eps_c - tol) msg << "support upper bounds below 1 - eps_c; ";
    double forced = free_lower;
    for (std::size_t k = 0; k < b.blocks.size(); ++k) {
        const auto& q = b.blocks[k];
        if (!(q.lower >= -tol && q.lower <= q.upper + tol && q.upper <= 1 + tol))
            msg << "block " << q.block << " interval [" << q.lower << ", " << q.upper << "] invalid; ";
        if (q.lower > block_upper_sum[k] + tol) msg << "block " << q.block << " lower exceeds member uppers; ";
        if (q.upper < block_lower_sum[k] - tol) msg << "block " << q.block << " upper below member lowers; ";
        forced += std::max(q.lower, block_lower_sum[k]);
    }
    if (forced > 1 + tol) msg << "lower bounds force more than unit mass; ";
    CertificateReport r;
    r.message = msg.str();
    r.ok = r.message.empty();
    return r;
}

} // namespace umdp
