#pragma once

#include <span>
#include <vector>

#include "umdp/geometry.hpp"

namespace umdp {

struct StateBound {
    StateId state = 0;
    double lower = 0.0;
    double upper = 0.0;
    std::int32_t block_slot = -1; // index into the row's block list, -1 if unconstrained
};

struct BlockBound {
    BlockId block = 0;
    double lower = 0.0;
    double upper = 0.0;
};

// Read-only view of one uncertainty set Gamma_{s,a}:
//   sum gamma = 1, lower <= gamma(s') <= upper for listed s',
//   lower(q) <= sum_{s' in q} gamma(s') <= upper(q) for listed blocks,
//   sum over listed states >= 1 - eps_c when mass_budget is set,
//   0 <= gamma(s') <= background_upper for every state not listed.
struct BoundsView {
    std::span<const StateBound> states;
    std::span<const BlockBound> blocks;
    double eps_c = 0.0;
    bool mass_budget = false;
    double background_upper = 0.0;
};

struct TransitionBounds {
    std::vector<StateBound> states; // sorted by state id
    std::vector<BlockBound> blocks;
    double eps_c = 0.0;
    bool mass_budget = false;
    double background_upper = 0.0;

    BoundsView view() const { return {states, blocks, eps_c, mass_budget, background_upper}; }
    static TransitionBounds from(const BoundsView& v);
    // Recomputes block_slot from a state -> block map.
    void link_blocks(std::span<const BlockId> block_of);
};

// Simplification: drop the mass budget, add eps_c to the unsafe state's upper
// bound (creating the entry if needed) and to blocks containing it, zero the
// upper bound outside the listed support, clamp to [0, 1]. Rows without a
// mass budget are returned unchanged.
TransitionBounds simplify(const BoundsView& b, StateId unsafe, BlockId unsafe_block);

struct CertificateReport {
    bool ok = true;
    std::string message;
};

// Nonemptiness certificates of Gamma. n_states counts every state of the
// model so background mass can be accounted.
CertificateReport check_certificates(const BoundsView& b, StateId n_states, double tol = 1e-12);

} // namespace umdp
