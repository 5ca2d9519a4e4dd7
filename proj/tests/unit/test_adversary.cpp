#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "umdp/adversary.hpp"
#include "umdp/error.hpp"
#include "umdp/instances.hpp"
#include "umdp/lp.hpp"

using namespace umdp;

namespace {

TransitionBounds intervals(std::vector<std::pair<double, double>> iv) {
    TransitionBounds t;
    for (std::size_t k = 0; k < iv.size(); ++k) t.states.push_back({static_cast<StateId>(k), iv[k].first, iv[k].second, -1});
    return t;
}

double mass_of(const Gamma& g, StateId s) {
    for (auto [x, m] : g)
        if (x == s) return m;
    return 0.0;
}

} // namespace

TEST_CASE("interval-only minimization fills cheapest states first") {
    auto t = intervals({{0.1, 0.5}, {0.2, 0.6}, {0.0, 0.4}});
    std::vector<double> p{0.0, 0.5, 1.0};
    Gamma g;
    double v = o_maximize_2layer(t.view(), p, Direction::Minimize, &g);
    CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(mass_of(g, 0) == doctest::Approx(0.5));
    CHECK(mass_of(g, 1) == doctest::Approx(0.5));
    CHECK(mass_of(g, 2) == 0.0);
    CHECK(lp_adversary(t.view(), p, Direction::Minimize) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("unconstrained adversary puts everything on the zero-value state") {
    auto t = intervals({{0, 1}, {0, 1}, {0, 1}});
    std::vector<double> p{0.7, 0.0, 0.3};
    Gamma g;
    CHECK(o_maximize_2layer(t.view(), p, Direction::Minimize, &g) == 0.0);
    REQUIRE(g.size() == 1);
    CHECK(g[0].first == 1);
    CHECK(g[0].second == 1.0);
}

TEST_CASE("block lower bound forces mass onto an expensive member") {
    // states 1, 2, 3 in slots 0..2; block {1, 2} in [0.7, 0.8]
    TransitionBounds t;
    t.states = {{1, 0.0, 0.5, 0}, {2, 0.0, 0.5, 0}, {3, 0.0, 0.5, -1}};
    t.blocks = {{0, 0.7, 0.8}};
    std::vector<double> p{0.0, 1.0, 0.2};
    Gamma g;
    double v = o_maximize_2layer(t.view(), p, Direction::Minimize, &g);
    CHECK(v == doctest::Approx(0.26).epsilon(1e-15));
    CHECK(mass_of(g, 1) == doctest::Approx(0.5));
    CHECK(mass_of(g, 2) == doctest::Approx(0.2));
    CHECK(mass_of(g, 3) == doctest::Approx(0.3));
    Gamma gl;
    CHECK(lp_adversary(t.view(), p, Direction::Minimize, &gl) == doctest::Approx(0.26).epsilon(1e-12));
    CHECK(check_gamma(t.view(), g, 4, 1e-12).ok);
    CHECK(check_gamma(t.view(), gl, 4, 1e-9).ok);
}

TEST_CASE("single successor yields the forced Dirac for both solvers") {
    auto t = intervals({{1.0, 1.0}});
    std::vector<double> p{0.4};
    Gamma a, b;
    CHECK(o_maximize_2layer(t.view(), p, Direction::Minimize, &a) == doctest::Approx(0.4));
    CHECK(lp_adversary(t.view(), p, Direction::Minimize, &b) == doctest::Approx(0.4));
    CHECK(a == Gamma{{0, 1.0}});
    CHECK(b == Gamma{{0, 1.0}});
}

TEST_CASE("maximization mirrors minimization") {
    auto t = intervals({{0.1, 0.5}, {0.2, 0.6}, {0.0, 0.4}});
    std::vector<double> p{0.0, 0.5, 1.0};
    // Most mass on state 2 (0.4), then state 1 fills the rest: 0.1, 0.5, 0.4.
    double v = o_maximize_2layer(t.view(), p, Direction::Maximize);
    CHECK(v == doctest::Approx(0.65));
    CHECK(lp_adversary(t.view(), p, Direction::Maximize) == doctest::Approx(0.65));
}

TEST_CASE("background bound is used for unlisted states") {
    // Listed state 0 in [0.5, 1]; 3 unlisted states may take up to 0.2 each.
    TransitionBounds t;
    t.states = {{0, 0.5, 1.0, -1}};
    t.background_upper = 0.2;
    std::vector<double> p{0.9};
    std::vector<double> all{0.9, 0.0, 0.1, 0.5};
    std::vector<StateId> order{1, 2, 3, 0};
    BackgroundValues bg{order, all};
    Gamma g;
    double v = o_maximize_2layer(t.view(), p, Direction::Minimize, &g, &bg);
    // 0.5 forced on state 0, then 0.2 on state 1, 0.2 on state 2, 0.1 on state 3.
    CHECK(v == doctest::Approx(0.5 * 0.9 + 0.2 * 0.0 + 0.2 * 0.1 + 0.1 * 0.5));
    CHECK(lp_adversary(t.view(), p, Direction::Minimize, nullptr, &bg) == doctest::Approx(v).epsilon(1e-12));
    CHECK(check_gamma(t.view(), g, 4, 1e-12).ok);
}

TEST_CASE("empty Gamma raises InfeasibleGamma") {
    auto t = intervals({{0.0, 0.3}, {0.0, 0.3}});
    std::vector<double> p{0, 1};
    CHECK_THROWS_AS(o_maximize_2layer(t.view(), p, Direction::Minimize), Error);
    CHECK_THROWS_AS(lp_adversary(t.view(), p, Direction::Minimize), Error);
}

TEST_CASE("mass budget rows are rejected by the two-layer algorithm") {
    auto t = intervals({{0.0, 1.0}});
    t.mass_budget = true;
    t.eps_c = 0.1;
    std::vector<double> p{1.0};
    CHECK_THROWS_AS(o_maximize_2layer(t.view(), p, Direction::Minimize), Error);
    // The LP handles it: 0.1 may leave the support toward the zero-valued state 1.
    std::vector<double> all{1.0, 0.0};
    std::vector<StateId> order{1, 0};
    BackgroundValues bg{order, all};
    CHECK(lp_adversary(t.view(), p, Direction::Minimize, nullptr, &bg) == doctest::Approx(0.9));
}

TEST_CASE("two-layer and LP agree on random feasible instances") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u01(0, 1);
    AdversaryWorkspace ws;
    for (int trial = 0; trial < 300; ++trial) {
        RandomGammaOptions o;
        o.n_post = 1 + trial % 20;
        o.p_unblocked = trial % 3 == 0 ? 0.3 : 0.0;
        auto t = random_gamma(rng, o);
        std::vector<double> p(t.states.size());
        for (auto& x : p) x = u01(rng) < 0.2 ? 0.0 : u01(rng);
        for (Direction dir : {Direction::Minimize, Direction::Maximize}) {
            Gamma g;
            double a = o_maximize_2layer(t.view(), p, dir, ws, &g);
            double b = lp_adversary(t.view(), p, dir);
            INFO("trial " << trial);
            CHECK(std::abs(a - b) <= 1e-9);
            auto rep = check_gamma(t.view(), g, static_cast<StateId>(t.states.size()), 1e-12);
            INFO(rep.message);
            CHECK(rep.ok);
        }
    }
}

TEST_CASE("rescaling values leaves the chosen support unchanged") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u01(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
        RandomGammaOptions o;
        o.n_post = 12;
        auto t = random_gamma(rng, o);
        std::vector<double> p(t.states.size()), q(t.states.size());
        for (std::size_t k = 0; k < p.size(); ++k) {
            p[k] = u01(rng);
            q[k] = 0.37 * p[k];
        }
        Gamma a, b;
        o_maximize_2layer(t.view(), p, Direction::Minimize, &a);
        o_maximize_2layer(t.view(), q, Direction::Minimize, &b);
        REQUIRE(a.size() == b.size());
        for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].first == b[k].first);
    }
}
