#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "umdp/error.hpp"
#include "umdp/models.hpp"
#include "umdp/noise.hpp"

using namespace umdp;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
    fs::path p = fs::temp_directory_path() / ("umdp_test_" + name);
    std::ofstream(p) << text;
    return p.string();
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an exception");
    return ErrorKind::InvalidArgument;
}

} // namespace

TEST_CASE("load_samples reads one sample per row") {
    auto path = write_temp("three.csv", "0.1\n0.1\n0.1\n");
    SampleMatrix s = load_samples(path, 1);
    CHECK(s.n == 3);
    CHECK(s.d == 1);
    CHECK(s.data == std::vector<double>{0.1, 0.1, 0.1});
}

TEST_CASE("load_samples rejects empty files and wrong widths") {
    auto empty = write_temp("empty.csv", "");
    CHECK(kind_of([&] { load_samples(empty); }) == ErrorKind::ParseError);
    auto wide = write_temp("wide.csv", "0.1,0.2\n0.3,0.4\n");
    CHECK(kind_of([&] { load_samples(wide, 1); }) == ErrorKind::DimensionMismatch);
    auto ragged = write_temp("ragged.csv", "0.1,0.2\n0.3\n");
    CHECK(kind_of([&] { load_samples(ragged); }) == ErrorKind::DimensionMismatch);
    auto junk = write_temp("junk.csv", "0.1\nabc\n");
    CHECK(kind_of([&] { load_samples(junk); }) == ErrorKind::ParseError);
    CHECK(kind_of([&] { load_samples("/nonexistent/samples.csv"); }) == ErrorKind::ParseError);
}

TEST_CASE("save and load round trip") {
    NoiseDistribution g{{0.0, 1.0}, {0.3, 0.2}};
    SampleMatrix s = g.draw(50, 4);
    auto path = (fs::temp_directory_path() / "umdp_test_roundtrip.csv").string();
    save_samples(path, s);
    SampleMatrix t = load_samples(path, 2);
    CHECK(t.data == s.data);
}

TEST_CASE("clustering with one cluster per sample") {
    NoiseDistribution g{{0.0}, {1.0}};
    SampleMatrix s = g.draw(40, 1);
    auto c = cluster_samples(s, s.n, 0);
    CHECK(c.size() == s.n);
    for (const auto& cl : c) {
        CHECK(cl.count == 1);
        CHECK(cl.diameter == 0.0);
    }
}

TEST_CASE("identical samples form one cluster") {
    SampleMatrix s{5, 2, std::vector<double>(10, 0.25)};
    for (std::size_t target : {1, 3, 5}) {
        auto c = cluster_samples(s, target, 0);
        REQUIRE(c.size() == 1);
        CHECK(c[0].count == 5);
        CHECK(c[0].diameter == 0.0);
    }
}

TEST_CASE("clusters cover every sample within their radius") {
    NoiseDistribution g{{0.4, 0.0}, {0.067, 0.067}};
    SampleMatrix s = g.draw(2000, 9);
    for (std::size_t target : {1, 7, 50, 300}) {
        auto c = cluster_samples(s, target, 0);
        CHECK(c.size() >= target);
        std::size_t total = 0;
        for (const auto& cl : c) total += cl.count;
        CHECK(total == s.n);
        // Each sample is within phi/2 of some cluster center.
        for (std::size_t i = 0; i < s.n; ++i) {
            auto r = s.row(i);
            bool covered = false;
            for (const auto& cl : c) {
                double d2 = 0;
                for (std::size_t k = 0; k < s.d; ++k) d2 += (r[k] - cl.center[k]) * (r[k] - cl.center[k]);
                if (std::sqrt(d2) <= cl.diameter / 2 + 1e-12) {
                    covered = true;
                    break;
                }
            }
            CHECK(covered);
        }
    }
}

TEST_CASE("support sample requirement") {
    CHECK(support_required_n(0.01, 0.01) == 459);
    CHECK(support_required_n(0.5, 0.5) == 1);
    CHECK(kind_of([] { support_required_n(0.0, 0.1); }) == ErrorKind::InvalidArgument);
    // Monotone: smaller eps_c or beta_c never needs fewer samples.
    std::size_t prev = 0;
    for (double eps : {0.5, 0.2, 0.1, 0.05, 0.01, 0.001}) {
        std::size_t n = support_required_n(eps, 0.01);
        CHECK(n >= prev);
        prev = n;
    }
    prev = 0;
    for (double beta : {0.5, 0.1, 0.01, 1e-4, 1e-8}) {
        std::size_t n = support_required_n(0.01, beta);
        CHECK(n >= prev);
        prev = n;
    }
}

TEST_CASE("tightest eps_c meets the requirement exactly") {
    for (std::size_t n : {10, 459, 10000, 1000000}) {
        double eps = tightest_eps_c(n, 0.001);
        CHECK(support_required_n(eps, 0.001) <= n);
        CHECK(support_required_n(eps * 0.999, 0.001) > n);
    }
}

TEST_CASE("learned support radius is the empirical max norm") {
    SampleMatrix s{3, 1, {0.5, -0.95, 0.2}};
    auto est = learn_support(s, 0.01, 0.01);
    CHECK(est.radius == 0.95);
    CHECK(est.required_n == 459);
    CHECK_FALSE(est.satisfied);
    std::vector<double> center{0.4};
    CHECK(learn_support(s, 0.5, 0.5, center).radius == doctest::Approx(1.35));
}

TEST_CASE("truncated draws respect the truncation") {
    NoiseDistribution g{{0.4}, {0.067}, NoiseDistribution::Truncation::Box, {-0.6}, {1.4}};
    SampleMatrix s = g.draw(1000, 1);
    for (double v : s.data) CHECK((v >= -0.6 && v <= 1.4));
    NoiseDistribution b{{0.4, 0.0}, {0.2, 0.2}, NoiseDistribution::Truncation::Ball, {}, {}, 0.3};
    SampleMatrix t = b.draw(1000, 2);
    for (std::size_t i = 0; i < t.n; ++i) {
        auto r = t.row(i);
        CHECK(std::hypot(r[0] - 0.4, r[1]) <= 0.3);
    }
    // Fixed seed gives identical draws.
    CHECK(g.draw(100, 5).data == g.draw(100, 5).data);
}

// ---------------------------------------------------------------- reach sets

TEST_CASE("affine reach box is exact interval arithmetic") {
    AffineParams ap;
    ap.A = {{0.5}};
    ap.E = {{1.0}};
    ap.controls = {{0.0}};
    AffineModel m(ap);
    std::vector<double> c{0.0};
    AxisBox b = reach_overapprox(m, AxisBox({0}, {1}), 0, c, 0.2);
    CHECK(b.lower[0] == doctest::Approx(-0.2));
    CHECK(b.upper[0] == doctest::Approx(0.7));
}

TEST_CASE("point region with zero radius maps to its image") {
    PendulumModel m(PendulumParams{});
    std::vector<double> x{0.3, -0.5}, w{0.1};
    Vec y = m.step(x, 2, w);
    AxisBox b = reach_overapprox(m, AxisBox(x, x), 2, w, 0.0);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(b.lower[i] == doctest::Approx(y[i]).epsilon(1e-12));
        CHECK(b.upper[i] == doctest::Approx(y[i]).epsilon(1e-12));
    }
    AxisBox l = lipschitz_reach(m, AxisBox(x, x), 2, w, 0.0);
    CHECK(l.lower[0] == doctest::Approx(y[0]));
    CHECK(l.upper[1] == doctest::Approx(y[1]));
}

namespace {

// Samples (region, action, cluster) triples and checks sampled images lie in
// the reach box produced by fn.
template <class ReachFn>
void check_soundness(const DynamicsModel& m, const AxisBox& domain, double cell, const Vec& noise_mean,
                     double max_radius, ReachFn fn, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0, 1);
    const std::size_t n = m.state_dim(), d = m.noise_dim();
    for (int trial = 0; trial < 100; ++trial) {
        Vec lo(n), hi(n);
        for (std::size_t i = 0; i < n; ++i) {
            lo[i] = domain.lower[i] + u01(rng) * (domain.upper[i] - domain.lower[i] - cell);
            hi[i] = lo[i] + cell;
        }
        AxisBox r(lo, hi);
        const ActionId a = static_cast<ActionId>(trial % m.n_actions());
        Vec c(d);
        for (std::size_t k = 0; k < d; ++k) c[k] = noise_mean[k] + 0.1 * (u01(rng) - 0.5);
        const double radius = max_radius * u01(rng);
        AxisBox box = fn(m, r, a, c, radius);
        for (int k = 0; k < 100; ++k) {
            Vec x(n), w(d);
            for (std::size_t i = 0; i < n; ++i) x[i] = lo[i] + u01(rng) * (hi[i] - lo[i]);
            // Uniform direction, radius within the ball.
            std::normal_distribution<double> g;
            double norm = 0.0;
            for (auto& v : w) {
                v = g(rng);
                norm += v * v;
            }
            norm = std::sqrt(norm);
            const double rad = radius * std::pow(u01(rng), 1.0 / static_cast<double>(d));
            for (std::size_t j = 0; j < d; ++j) w[j] = c[j] + (norm > 0 ? w[j] / norm * rad : 0.0);
            Vec y = m.step(x, a, w);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(y[i] >= box.lower[i] - 1e-12);
                CHECK(y[i] <= box.upper[i] + 1e-12);
            }
        }
    }
}

AxisBox exact(const DynamicsModel& m, const AxisBox& r, ActionId a, std::span<const double> c, double rad) {
    return reach_overapprox(m, r, a, c, rad);
}
AxisBox fallback(const DynamicsModel& m, const AxisBox& r, ActionId a, std::span<const double> c, double rad) {
    return lipschitz_reach(m, r, a, c, rad);
}

} // namespace

TEST_CASE("reach boxes contain sampled images for every benchmark model") {
    const double pi = std::numbers::pi;
    PendulumModel pend(PendulumParams{});
    check_soundness(pend, AxisBox({-pi, -3}, {pi, 3}), 2 * pi / 50, {0.0}, 0.5, exact, 1);
    check_soundness(pend, AxisBox({-pi, -3}, {pi, 3}), 2 * pi / 50, {0.0}, 0.5, fallback, 2);
    Unicycle3dModel u3(Unicycle3dParams{});
    check_soundness(u3, AxisBox({0, 0, -pi}, {1, 1, pi}), 0.05, {0.4, 0.0}, 0.5, exact, 3);
    check_soundness(u3, AxisBox({0, 0, -pi}, {1, 1, pi}), 0.05, {0.4, 0.0}, 0.5, fallback, 4);
    Unicycle2dModel u2(Unicycle2dParams{});
    check_soundness(u2, AxisBox({0, 0}, {1, 1}), 0.05, {0.4}, 0.5, exact, 5);
    check_soundness(u2, AxisBox({0, 0}, {1, 1}), 0.05, {0.4}, 0.5, fallback, 6);
    MultiplicativeLinearModel mult(multiplicative2d_params());
    check_soundness(mult, AxisBox({-1, -1}, {1, 1}), 0.1, {0.0, 0.0}, 0.3, exact, 7);
    check_soundness(mult, AxisBox({-1, -1}, {1, 1}), 0.1, {0.0, 0.0}, 0.3, fallback, 8);
    auto hp = heating4_params();
    hp.state_bound = 23.5;
    MultiplicativeLinearModel heat(hp);
    check_soundness(heat, AxisBox({19.5, 19.5, 19.5, 19.5}, {23.5, 23.5, 23.5, 23.5}), 0.5, {0, 0, 0, 0}, 0.05, exact,
                    9);
    check_soundness(heat, AxisBox({19.5, 19.5, 19.5, 19.5}, {23.5, 23.5, 23.5, 23.5}), 0.5, {0, 0, 0, 0}, 0.05,
                    fallback, 10);
}

TEST_CASE("models are deterministic and validate dimensions") {
    Unicycle3dModel u3(Unicycle3dParams{});
    CHECK(u3.n_actions() == 10);
    std::vector<double> x{0.5, 0.5, 0.1}, w{0.4, 0.0};
    CHECK(u3.step(x, 3, w) == u3.step(x, 3, w));
    std::vector<double> bad{0.0};
    CHECK(kind_of([&] { reach_overapprox(u3, AxisBox({0, 0, 0}, {1, 1, 1}), 0, bad, 0.1); }) ==
          ErrorKind::DimensionMismatch);
    CHECK(kind_of([&] { reach_overapprox(u3, AxisBox({0, 0, 0}, {1, 1, 1}), 0, w, -1.0); }) ==
          ErrorKind::InvalidArgument);
    CHECK(kind_of([] { make_model("quadrotor", {}, AxisBox({0}, {1})); }) == ErrorKind::ConfigError);
    auto heat = make_model("heating4", {}, AxisBox({19.5, 19.5, 19.5, 19.5}, {23.5, 23.5, 23.5, 23.5}));
    CHECK(heat->n_actions() == 16);
}
