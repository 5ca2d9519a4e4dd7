#include "umdp/product.hpp"

#include <deque>

namespace umdp {

ProductUmdp::ProductUmdp(const UmdpAbstraction& base, const Dfa& dfa) : base_(&base), dfa_(dfa) {
    const StateId ns = base.n_states;
    const std::size_t nz = static_cast<std::size_t>(dfa_.n_states());
    std::vector<std::uint32_t> letter(ns);
    for (StateId s = 0; s < ns; ++s) letter[s] = dfa_.letter(base.labels[s]);

    index_.assign(nz * ns, -1);
    succ_.assign(nz * ns, -1);
    lift_.assign(ns, -1);

    std::deque<ProductId> frontier;
    auto visit = [&](StateId s, DfaState z) {
        ProductId& slot = index_[static_cast<std::size_t>(z) * ns + s];
        if (slot < 0) {
            slot = static_cast<ProductId>(state_.size());
            state_.push_back(s);
            z_.push_back(z);
            frontier.push_back(slot);
        }
        return slot;
    };
    auto succ_of = [&](DfaState z, StateId s_next) {
        ProductId& slot = succ_[static_cast<std::size_t>(z) * ns + s_next];
        if (slot < 0) slot = visit(s_next, dfa_.next(z, letter[s_next]));
        return slot;
    };

    for (StateId s = 0; s < ns; ++s) lift_[s] = visit(s, dfa_.next(dfa_.initial(), letter[s]));
    while (!frontier.empty()) {
        const ProductId p = frontier.front();
        frontier.pop_front();
        const StateId s = state_[p];
        const DfaState z = z_[p];
        for (ActionId a = 0; a < base.n_actions; ++a) {
            BoundsView b = base.bounds(s, a);
            if (b.background_upper > 0 || b.mass_budget) {
                // Any state may receive mass.
                for (StateId t = 0; t < ns; ++t) succ_of(z, t);
            } else {
                for (const auto& e : b.states) succ_of(z, e.state);
            }
        }
    }

    std::vector<char> used(nz, 0);
    for (DfaState z : z_) used[z] = 1;
    for (DfaState z = 0; z < static_cast<DfaState>(nz); ++z)
        if (used[z]) z_used_.push_back(z);
}

} // namespace umdp
