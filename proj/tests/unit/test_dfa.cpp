#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "umdp/dfa.hpp"
#include "umdp/error.hpp"
#include "umdp/instances.hpp"
#include "umdp/product.hpp"

using namespace umdp;

namespace {

using Trace = std::vector<std::vector<std::string>>;

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

TEST_CASE("reach-avoid automaton") {
    Dfa d = dfa_reach_avoid();
    CHECK(dfa_run(d, Trace{{}, {"goal"}}).accepted);
    CHECK_FALSE(dfa_run(d, Trace{{"unsafe"}, {"goal"}}).accepted);
    CHECK_FALSE(dfa_run(d, Trace{}).accepted);
    CHECK(dfa_run(d, Trace{}).final_state == d.initial());
    // Acceptance latches.
    CHECK(dfa_run(d, Trace{{"goal"}, {"unsafe"}}).accepted);
}

TEST_CASE("water-carpet-charge automaton") {
    Dfa d = dfa_water_carpet_charge();
    CHECK(dfa_run(d, Trace{{}, {"charge"}}).accepted);
    CHECK_FALSE(dfa_run(d, Trace{{"water"}, {"charge"}}).accepted);
    CHECK(dfa_run(d, Trace{{"water"}, {"carpet"}, {"charge"}}).accepted);
    CHECK_FALSE(dfa_run(d, Trace{{"water"}, {"unsafe"}, {"carpet"}, {"charge"}}).accepted);
    CHECK(dfa_run(d, Trace{{"water", "carpet"}, {"charge"}}).accepted);
}

TEST_CASE("trivial automaton accepts everything") {
    Dfa d = dfa_trivial();
    CHECK(d.n_states() == 1);
    CHECK(dfa_run(d, Trace{{"unsafe"}}).accepted);
    CHECK(dfa_run(d, Trace{}).accepted);
}

TEST_CASE("counter automaton accepts exactly K + 1 safe letters") {
    const int k = 15;
    Dfa d = dfa_bounded_safety(k);
    CHECK(d.n_states() == k + 3);
    std::mt19937_64 rng(5);
    for (int len = 0; len <= k + 1; ++len)
        for (int trial = 0; trial < 50; ++trial) {
            Trace t;
            int first_unsafe = -1;
            for (int i = 0; i < len; ++i) {
                bool bad = rng() % 10 == 0;
                if (bad && first_unsafe < 0) first_unsafe = i;
                t.push_back(bad ? std::vector<std::string>{"unsafe"} : std::vector<std::string>{});
            }
            const bool expect = len == k + 1 && first_unsafe < 0;
            CHECK(dfa_run(d, t).accepted == expect);
        }
    Trace safe(k + 1);
    safe.push_back({"unsafe"});
    CHECK(dfa_run(d, safe).accepted);
}

TEST_CASE("json round trip and else edges") {
    const char* text = R"({"ap": ["a", "b"], "states": 2, "initial": 0, "accepting": [1],
        "edges": [{"from": 0, "label": {"a": true}, "to": 1},
                  {"from": 0, "label": "else", "to": 0},
                  {"from": 1, "label": "else", "to": 1}]})";
    Dfa d = parse_dfa(text);
    CHECK(d.next(0, std::vector<std::string>{"a", "b"}) == 1);
    CHECK(d.next(0, std::vector<std::string>{"b"}) == 0);
    Dfa back = parse_dfa(dfa_to_json(d));
    for (DfaState z = 0; z < 2; ++z)
        for (std::uint32_t l = 0; l < 4; ++l) CHECK(back.next(z, l) == d.next(z, l));
}

TEST_CASE("malformed automata are rejected") {
    CHECK(kind_of([] {
              parse_dfa(R"({"ap": ["a"], "states": 2, "initial": 0, "accepting": [],
                  "edges": [{"from": 0, "label": {"a": true}, "to": 0}, {"from": 0, "label": {}, "to": 1},
                            {"from": 1, "label": "else", "to": 1}]})");
          }) == ErrorKind::NondeterministicEdge);
    CHECK(kind_of([] {
              parse_dfa(R"({"ap": ["a"], "states": 1, "initial": 0, "accepting": [],
                  "edges": [{"from": 0, "label": {"a": true}, "to": 0}]})");
          }) == ErrorKind::IncompleteTransition);
    CHECK(kind_of([] {
              parse_dfa(R"({"ap": ["a"], "states": 1, "initial": 0, "accepting": [],
                  "edges": [{"from": 0, "label": {"c": true}, "to": 0}, {"from": 0, "label": "else", "to": 0}]})");
          }) == ErrorKind::UnknownProposition);
    CHECK(kind_of([] { dfa_reach_avoid().letter({"water"}); }) == ErrorKind::UnknownProposition);
    CHECK(kind_of([] { dfa_preset("phi9"); }) == ErrorKind::ConfigError);
}

TEST_CASE("product is bounded by |S| |Z| and keeps base bounds") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        RandomUmdpOptions o;
        o.n_cells = 10;
        UmdpAbstraction abs = random_umdp(rng, o);
        Dfa d = dfa_reach_avoid();
        ProductUmdp prod(abs, d);
        CHECK(prod.n_states() <= abs.n_states * d.n_states());
        for (StateId s = 0; s < abs.n_states; ++s) {
            ProductId p = prod.lift(s);
            REQUIRE(p >= 0);
            CHECK(prod.base_state(p) == s);
            CHECK(prod.dfa_state(p) == d.next(d.initial(), abs.labels[s]));
        }
        for (ProductId p = 0; p < prod.n_states(); ++p) {
            const StateId s = prod.base_state(p);
            const DfaState z = prod.dfa_state(p);
            CHECK(prod.index(s, z) == p);
            // Every listed successor is reachable in the product and carries
            // the base intervals unchanged.
            for (ActionId a = 0; a < abs.n_actions; ++a)
                for (const auto& e : abs.bounds(s, a).states) {
                    ProductId q = prod.successor(z, e.state);
                    REQUIRE(q >= 0);
                    CHECK(prod.base_state(q) == e.state);
                    CHECK(prod.dfa_state(q) == d.next(z, abs.labels[e.state]));
                }
        }
    }
}
