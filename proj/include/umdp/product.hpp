#pragma once

#include <span>
#include <vector>

#include "umdp/abstraction.hpp"
#include "umdp/dfa.hpp"

namespace umdp {

using ProductId = std::int32_t;

// Reachable part of UMDP x DFA. Transition bounds are never copied: the row of
// product state (s, z) under a is the base row of (s, a) with each successor
// s' read as (s', delta(z, L(s'))), and each base block q' read as its lifted
// image. Because s' -> (s', delta(z, L(s'))) is injective for fixed z, the
// lifted intervals coincide with the base ones.
class ProductUmdp {
public:
    ProductUmdp(const UmdpAbstraction& base, const Dfa& dfa);

    const UmdpAbstraction& base() const { return *base_; }
    const Dfa& dfa() const { return dfa_; }

    ProductId n_states() const { return static_cast<ProductId>(state_.size()); }
    ActionId n_actions() const { return base_->n_actions; }
    StateId base_state(ProductId p) const { return state_[p]; }
    DfaState dfa_state(ProductId p) const { return z_[p]; }
    bool accepting(ProductId p) const { return dfa_.accepting(z_[p]); }

    // Product index of (s, z); -1 if that pair was not reached.
    ProductId index(StateId s, DfaState z) const { return index_[static_cast<std::size_t>(z) * base_->n_states + s]; }
    // Successor of (., z) when the base system moves to s'.
    ProductId successor(DfaState z, StateId s_next) const {
        return succ_[static_cast<std::size_t>(z) * base_->n_states + s_next];
    }
    // successor(z, .) for every base state, indexed by base state id.
    std::span<const ProductId> successors(DfaState z) const {
        return {succ_.data() + static_cast<std::size_t>(z) * base_->n_states, static_cast<std::size_t>(base_->n_states)};
    }
    ProductId lift(StateId s) const { return lift_[s]; }
    // DFA states that occur in the product, ascending.
    const std::vector<DfaState>& dfa_states_used() const { return z_used_; }

private:
    const UmdpAbstraction* base_;
    Dfa dfa_;
    std::vector<StateId> state_;
    std::vector<DfaState> z_;
    std::vector<ProductId> index_;
    std::vector<ProductId> succ_;
    std::vector<ProductId> lift_;
    std::vector<DfaState> z_used_;
};

} // namespace umdp
