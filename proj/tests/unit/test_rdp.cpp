#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "umdp/dfa.hpp"
#include "umdp/error.hpp"
#include "umdp/instances.hpp"
#include "umdp/product.hpp"
#include "umdp/rdp.hpp"

using namespace umdp;

namespace {

TransitionBounds dirac(StateId s) {
    TransitionBounds t;
    t.states = {{s, 1.0, 1.0, -1}};
    return t;
}

double lifted(const ProductUmdp& prod, const std::vector<double>& v, StateId s) { return v[prod.lift(s)]; }

} // namespace

TEST_CASE("three-state chain has the interval endpoints as bounds") {
    // 0 -> goal (1) or unsafe (2), each with probability in [0.4, 0.6].
    TransitionBounds row;
    row.states = {{1, 0.4, 0.6, -1}, {2, 0.4, 0.6, -1}};
    UmdpAbstraction abs = assemble_umdp(3, 1, {{}, {"goal"}, {}}, {row, dirac(1), dirac(2)});
    ProductUmdp prod(abs, dfa_reach_avoid());
    for (AdversaryKind kind : {AdversaryKind::TwoLayer, AdversaryKind::Lp}) {
        RdpOptions opt;
        opt.adversary = kind;
        auto r = robust_value_iteration(prod, opt);
        CHECK(lifted(prod, r.lower.p, 0) == doctest::Approx(0.4).epsilon(1e-12));
        CHECK(lifted(prod, r.upper.p, 0) == doctest::Approx(0.6).epsilon(1e-12));
        CHECK(lifted(prod, r.lower.p, 1) == 1.0);
        CHECK(lifted(prod, r.lower.p, 2) == 0.0);
        CHECK(r.lower.converged);
        // e_avg over the safe cells 0 and 1.
        CHECK(r.e_avg == doctest::Approx(0.1));
    }
}

TEST_CASE("deterministic chain reaches the goal") {
    UmdpAbstraction abs = assemble_umdp(4, 1, {{}, {}, {"goal"}, {}}, {dirac(1), dirac(2), dirac(2), dirac(3)});
    ProductUmdp prod(abs, dfa_reach_avoid());
    auto r = robust_value_iteration(prod, {});
    for (StateId s = 0; s < 3; ++s) {
        CHECK(lifted(prod, r.lower.p, s) == 1.0);
        CHECK(lifted(prod, r.upper.p, s) == 1.0);
    }
    CHECK(r.lower.iterations <= 4);
    RdpOptions two;
    two.horizon = Horizon::bounded_steps(1);
    auto b = robust_value_iteration(prod, two);
    CHECK(lifted(prod, b.lower.p, 0) == 0.0);
    CHECK(lifted(prod, b.lower.p, 1) == 1.0);
}

TEST_CASE("strategy picks the better action") {
    // Action 0 loops in place, action 1 reaches the goal with at least 0.7.
    TransitionBounds good;
    good.states = {{1, 0.7, 1.0, -1}, {2, 0.0, 0.3, -1}};
    UmdpAbstraction abs =
        assemble_umdp(3, 2, {{}, {"goal"}, {}}, {dirac(0), good, dirac(1), dirac(1), dirac(2), dirac(2)});
    ProductUmdp prod(abs, dfa_reach_avoid());
    auto r = robust_value_iteration(prod, {});
    CHECK(r.strategy[prod.lift(0)] == 1);
    CHECK(lifted(prod, r.lower.p, 0) == doctest::Approx(0.7));
    CHECK(lifted(prod, r.upper.p, 0) == doctest::Approx(1.0));
}

TEST_CASE("values are monotone, ordered and agree across adversaries") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        RandomUmdpOptions o;
        o.n_cells = 10;
        o.n_actions = 3;
        o.eps_c = 0.0;
        UmdpAbstraction abs = random_umdp(rng, o);
        ProductUmdp prod(abs, dfa_reach_avoid());
        RdpOptions opt;
        opt.horizon = Horizon::unbounded(1e-10);
        auto two = robust_value_iteration(prod, opt);
        opt.adversary = AdversaryKind::Lp;
        auto lp = robust_value_iteration(prod, opt);
        CHECK(two.lower.monotonicity_violation <= 1e-12);
        CHECK(two.upper.monotonicity_violation <= 1e-12);
        for (ProductId p = 0; p < prod.n_states(); ++p) {
            CHECK(two.lower.p[p] <= two.upper.p[p] + 1e-12);
            CHECK(two.lower.p[p] >= 0.0);
            CHECK(two.upper.p[p] <= 1.0);
            CHECK(std::abs(two.lower.p[p] - lp.lower.p[p]) <= 1e-8);
            CHECK(std::abs(two.upper.p[p] - lp.upper.p[p]) <= 1e-8);
        }
    }
}

TEST_CASE("bounded invariance matches the counter automaton") {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 10; ++trial) {
        RandomUmdpOptions o;
        o.n_cells = 9;
        o.eps_c = 0.0;
        o.n_goal = 0;
        UmdpAbstraction abs = random_umdp(rng, o);
        const int k = 6;
        ProductUmdp safe(abs, dfa_safety());
        RdpOptions inv;
        inv.objective = Objective::Invariance;
        inv.horizon = Horizon::bounded_steps(k);
        auto a = robust_value_iteration(safe, inv);

        ProductUmdp counter(abs, dfa_bounded_safety(k));
        RdpOptions reach;
        reach.horizon = Horizon::unbounded(1e-14, 1000);
        auto b = robust_value_iteration(counter, reach);
        for (StateId s = 0; s < abs.n_states; ++s) {
            CHECK(std::abs(lifted(safe, a.lower.p, s) - lifted(counter, b.lower.p, s)) <= 1e-9);
            CHECK(std::abs(lifted(safe, a.upper.p, s) - lifted(counter, b.upper.p, s)) <= 1e-9);
        }
        CHECK(lifted(safe, a.lower.p, abs.unsafe) == 0.0);
    }
}

TEST_CASE("two-layer adversary refuses mass-budget rows") {
    std::mt19937_64 rng(1);
    UmdpAbstraction abs = random_umdp(rng, {});
    ProductUmdp prod(abs, dfa_reach_avoid());
    CHECK_THROWS_AS(robust_value_iteration(prod, {}), Error);
    RdpOptions lp;
    lp.adversary = AdversaryKind::Lp;
    CHECK_NOTHROW(robust_value_iteration(prod, lp));
}

TEST_CASE("simplification never raises the lower bound") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        UmdpAbstraction abs = random_umdp(rng, {});
        UmdpAbstraction simp = simplify(abs);
        ProductUmdp a(abs, dfa_reach_avoid()), b(simp, dfa_reach_avoid());
        RdpOptions opt;
        opt.adversary = AdversaryKind::Lp;
        opt.horizon = Horizon::unbounded(1e-10);
        auto orig = robust_value_iteration(a, opt);
        auto reduced = robust_value_iteration(b, opt);
        for (StateId s = 0; s < abs.n_states; ++s)
            CHECK(lifted(b, reduced.lower.p, s) <= lifted(a, orig.lower.p, s) + 1e-9);
    }
}
