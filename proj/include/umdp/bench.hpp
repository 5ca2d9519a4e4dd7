#pragma once

#include <cstdint>
#include <vector>

#include "umdp/config.hpp"
#include "umdp/product.hpp"
#include "umdp/rdp.hpp"

namespace umdp {

struct AdversaryTiming {
    std::size_t n_post = 0;
    double two_layer_us = 0.0; // median per-call time
    double lp_us = 0.0;        // 0 when the LP was skipped
    double max_abs_diff = 0.0; // |TwoLayer - LP| over the timed instances
};

// Random feasible instances (blocks of at most 4 states), both directions.
std::vector<AdversaryTiming> bench_adversary(const std::vector<std::size_t>& sizes, std::size_t instances,
                                             std::uint64_t seed, bool with_lp = true);

struct SynthesisTiming {
    ProductId n_product_states = 0;
    ActionId n_actions = 0;
    double two_layer_s = 0.0;
    double lp_s = 0.0;
    double max_abs_diff = 0.0; // over lower bounds
    std::size_t iterations = 0;
};

// Default synthesis workload: the 2D unicycle on a 40 x 40 grid (1600 cells,
// 8 actions) with reach-avoid towards the charging region.
void add_synthesis_bench_defaults(ConfigBuilder& b);

// Lower-bound synthesis only, same options for both adversaries.
SynthesisTiming bench_synthesis(const ProductUmdp& product, const Horizon& horizon);

} // namespace umdp
