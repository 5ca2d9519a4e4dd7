#include "umdp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "umdp/adversary.hpp"
#include "umdp/instances.hpp"
#include "umdp/lp.hpp"

namespace umdp {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t kValuePool = 64;

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

// Runs fn(i) for i = 0, 1, ... until at least 2 ms have passed; returns
// microseconds per call. Callers use i to rotate inputs: re-sorting the same
// vector lets the branch predictor learn it, which flatters small sizes.
template <class Fn>
double per_call_us(Fn&& fn) {
    std::size_t reps = 0;
    const auto t0 = Clock::now();
    double elapsed = 0.0;
    do {
        fn(reps);
        ++reps;
        elapsed = std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
    } while (elapsed < 2000.0);
    return elapsed / static_cast<double>(reps);
}

} // namespace

std::vector<AdversaryTiming> bench_adversary(const std::vector<std::size_t>& sizes, std::size_t instances,
                                             std::uint64_t seed, bool with_lp) {
    std::vector<AdversaryTiming> out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    AdversaryWorkspace ws;
    for (std::size_t n : sizes) {
        AdversaryTiming row;
        row.n_post = n;
        std::vector<double> t2, tl;
        for (std::size_t i = 0; i < instances; ++i) {
            RandomGammaOptions o;
            o.n_post = n;
            o.max_block = 4;
            // Keep intervals informative at large sizes.
            o.max_halfwidth = std::min(0.3, 3.0 / static_cast<double>(n));
            TransitionBounds t = random_gamma(rng, o);
            std::vector<std::vector<double>> pool(kValuePool, std::vector<double>(n));
            for (auto& p : pool)
                for (auto& x : p) x = u01(rng);
            const BoundsView v = t.view();
            t2.push_back(per_call_us([&](std::size_t r) {
                (void)o_maximize_2layer(v, pool[r % kValuePool], Direction::Minimize, ws);
            }));
            if (with_lp) {
                tl.push_back(per_call_us([&](std::size_t r) {
                    (void)lp_adversary(v, pool[r % kValuePool], Direction::Minimize);
                }));
                for (const auto& p : pool) {
                    const double a = o_maximize_2layer(v, p, Direction::Minimize, ws);
                    const double b = lp_adversary(v, p, Direction::Minimize);
                    row.max_abs_diff = std::max(row.max_abs_diff, std::abs(a - b));
                    if (&p - pool.data() >= 3) break; // a few checks suffice
                }
            }
        }
        row.two_layer_us = median(t2);
        row.lp_us = median(tl);
        out.push_back(row);
    }
    return out;
}

void add_synthesis_bench_defaults(ConfigBuilder& b) {
    b.add_preset("unicycle2d-phi2");
    b.set("partition.cells_per_dim", nlohmann::json::array({40, 40}));
    b.set("partition.regions", nlohmann::json::parse(R"([
        {"lower": [0.4, 0.4], "upper": [0.6, 0.6], "labels": ["unsafe"]},
        {"lower": [0.8, 0.1], "upper": [1.0, 0.3], "labels": ["goal"]}])"));
    b.set("spec.dfa", "phi1");
    b.set("output", "out/bench");
}

SynthesisTiming bench_synthesis(const ProductUmdp& product, const Horizon& horizon) {
    SynthesisTiming out;
    out.n_product_states = product.n_states();
    out.n_actions = product.n_actions();
    RdpOptions opt;
    opt.horizon = horizon;
    opt.compute_upper = false;
    auto t0 = Clock::now();
    SynthesisResult a = robust_value_iteration(product, opt);
    out.two_layer_s = std::chrono::duration<double>(Clock::now() - t0).count();
    opt.adversary = AdversaryKind::Lp;
    t0 = Clock::now();
    SynthesisResult b = robust_value_iteration(product, opt);
    out.lp_s = std::chrono::duration<double>(Clock::now() - t0).count();
    out.iterations = a.lower.iterations;
    for (std::size_t k = 0; k < a.lower.p.size(); ++k)
        out.max_abs_diff = std::max(out.max_abs_diff, std::abs(a.lower.p[k] - b.lower.p[k]));
    return out;
}

} // namespace umdp
