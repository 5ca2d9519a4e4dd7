#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "umdp/bounds.hpp"

using namespace umdp;

TEST_CASE("simplify adds eps_c to the unsafe state and its block") {
    TransitionBounds t;
    t.states = {{0, 0.5, 0.9, 0}, {3, 0.0, 0.02, 1}};
    t.blocks = {{0, 0.5, 0.9}, {7, 0.0, 0.02}};
    t.mass_budget = true;
    t.eps_c = 0.01;
    TransitionBounds s = simplify(t.view(), 3, 7);
    CHECK_FALSE(s.mass_budget);
    CHECK(s.states[1].upper == doctest::Approx(0.03));
    CHECK(s.blocks[1].upper == doctest::Approx(0.03));
    CHECK(s.states[0].upper == 0.9);
}

TEST_CASE("simplify creates a missing unsafe entry") {
    TransitionBounds t;
    t.states = {{0, 0.5, 1.0, -1}, {1, 0.0, 0.5, -1}};
    t.mass_budget = true;
    t.eps_c = 0.05;
    TransitionBounds s = simplify(t.view(), 9, 4);
    REQUIRE(s.states.size() == 3);
    CHECK(s.states[2].state == 9);
    CHECK(s.states[2].lower == 0.0);
    CHECK(s.states[2].upper == 0.05);
}

TEST_CASE("zero eps_c only drops the budget") {
    TransitionBounds t;
    t.states = {{0, 0.5, 1.0, -1}, {1, 0.0, 0.5, -1}};
    t.mass_budget = true;
    TransitionBounds s = simplify(t.view(), 2, 2);
    CHECK_FALSE(s.mass_budget);
    REQUIRE(s.states.size() == 2);
    CHECK(s.states[0].upper == 1.0);
    CHECK(s.states[1].upper == 0.5);
}

TEST_CASE("upper bounds are clamped after simplification") {
    TransitionBounds t;
    t.states = {{0, 0.9, 0.995, -1}};
    t.mass_budget = true;
    t.eps_c = 0.01;
    TransitionBounds s = simplify(t.view(), 0, 0);
    CHECK(s.states[0].upper == 1.0);
}

TEST_CASE("certificates detect empty Gamma") {
    TransitionBounds ok;
    ok.states = {{0, 0.2, 0.6, 0}, {1, 0.1, 0.5, 0}};
    ok.blocks = {{0, 0.5, 1.0}};
    CHECK(check_certificates(ok.view(), 2).ok);

    TransitionBounds low = ok;
    low.states[1].upper = 0.3;
    CHECK_FALSE(check_certificates(low.view(), 2).ok);

    TransitionBounds block_low = ok;
    block_low.blocks[0] = {0, 0.0, 0.2};
    CHECK_FALSE(check_certificates(block_low.view(), 2).ok);

    TransitionBounds forced = ok;
    forced.states[0].lower = 0.6;
    forced.states[1].lower = 0.5;
    CHECK_FALSE(check_certificates(forced.view(), 2).ok);

    TransitionBounds background;
    background.states = {{0, 0.0, 0.4, -1}};
    background.background_upper = 0.2;
    CHECK(check_certificates(background.view(), 4).ok);
    CHECK_FALSE(check_certificates(background.view(), 3).ok);
}
