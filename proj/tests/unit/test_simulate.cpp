#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "umdp/dfa.hpp"
#include "umdp/instances.hpp"
#include "umdp/models.hpp"
#include "umdp/rdp.hpp"
#include "umdp/simulate.hpp"

using namespace umdp;

namespace {

// X = [0, 2], cells [0, 1) and [1, 2]; action k moves to controls[k].
struct TwoCell {
    Partition part;
    AffineModel f;
    UmdpAbstraction abs;

    TwoCell(std::vector<LabeledRegion> regions, std::vector<std::vector<std::string>> labels)
        : part(build_grid(AxisBox({0}, {2}), {2}, regions, {1})), f(make()),
          abs(assemble_umdp(3, 2, std::move(labels), rows())) {}

    static AffineModel make() {
        AffineParams p;
        p.A = {{0.0}};
        p.B = {{1.0}};
        p.E = {{0.0}};
        p.c = {0.0};
        p.controls = {{0.5}, {1.5}};
        return AffineModel(p);
    }
    static std::vector<TransitionBounds> rows() {
        auto dirac = [](StateId s) {
            TransitionBounds t;
            t.states = {{s, 1.0, 1.0, -1}};
            return t;
        };
        return {dirac(0), dirac(1), dirac(0), dirac(1), dirac(2), dirac(2)};
    }
};

NoiseDistribution zero_noise() { return {{0.0}, {0.0}}; }

} // namespace

TEST_CASE("controller follows a hand-traced strategy") {
    // DFA counts visits to "a" (cell 1); the second visit accepts.
    Dfa d({"a", "unsafe"}, 4, 0, {2},
          {{0, {{"unsafe", true}}, false, 3}, {0, {{"a", true}, {"unsafe", false}}, false, 1}, {0, {}, true, 0},
           {1, {{"unsafe", true}}, false, 3}, {1, {{"a", true}, {"unsafe", false}}, false, 2}, {1, {}, true, 1},
           {2, {}, true, 2}, {3, {}, true, 3}});
    TwoCell toy({{AxisBox({1}, {2}), {"a"}}}, {{}, {"a"}, {}});
    ProductUmdp prod(toy.abs, d);
    std::vector<ActionId> sigma(prod.n_states(), 0);
    sigma[prod.index(0, 0)] = 1;
    sigma[prod.index(1, 1)] = 0;
    sigma[prod.index(0, 1)] = 1;
    Controller ctl(toy.part, prod, sigma, std::vector<double>(prod.n_states(), 0.5));

    SimulationOptions opt;
    opt.runs = 1;
    opt.max_steps = 10;
    opt.keep_records = true;
    std::vector<double> x0{0.5};
    auto r = simulate(ctl, toy.f, zero_noise(), x0, opt);
    REQUIRE(r.records.size() == 1);
    const auto& rec = r.records[0];
    CHECK(rec.actions == std::vector<ActionId>{1, 0, 1});
    CHECK(rec.accepted);
    CHECK(rec.steps == 3);
    CHECK(rec.states.size() == rec.actions.size() + 1);
    CHECK(rec.labels.size() == rec.states.size());
    CHECK(r.rate == 1.0);

    // Synthesis finds a strategy with certified bound 1 from both cells.
    auto syn = robust_value_iteration(prod, {});
    Controller opt_ctl(toy.part, prod, syn.strategy, syn.lower.p);
    CHECK(opt_ctl.bound(x0) == 1.0);
    CHECK(simulate(opt_ctl, toy.f, zero_noise(), x0, opt).rate == 1.0);
}

TEST_CASE("unsafe start and vacuous specifications") {
    TwoCell toy({}, {{}, {}, {}});
    ProductUmdp trivial(toy.abs, dfa_trivial());
    auto syn = robust_value_iteration(trivial, {});
    Controller ctl(toy.part, trivial, syn.strategy, syn.lower.p);
    std::vector<double> inside{1.2}, outside{3.0};
    CHECK(ctl.bound(inside) == 1.0);
    SimulationOptions opt;
    opt.runs = 20;
    CHECK(simulate(ctl, toy.f, zero_noise(), inside, opt).rate == 1.0);

    ProductUmdp reach(toy.abs, dfa_reach_avoid());
    auto syn2 = robust_value_iteration(reach, {});
    Controller c2(toy.part, reach, syn2.strategy, syn2.lower.p);
    CHECK(c2.bound(outside) == 0.0);
    auto st = c2.start(outside);
    CHECK(c2.action(st) == 0);
    CHECK(simulate(c2, toy.f, zero_noise(), outside, opt).rate == 0.0);
    // No goal anywhere: every episode is truncated and counts as a failure.
    auto r = simulate(c2, toy.f, zero_noise(), inside, opt);
    CHECK(r.rate == 0.0);
    CHECK(r.ci_high == 0.0);
}

namespace {

// Chain with an analytic answer: x' = 0.6 + w, w ~ N(0, 0.5^2). From anywhere
// in cell 0 the next state is goal (x >= 1) w.p. P(w >= 0.4), unsafe (x < 0)
// w.p. P(w < -0.6), and back in cell 0 otherwise.
struct Chain {
    Partition part = build_grid(AxisBox({0}, {2}), {2}, {{AxisBox({1}, {2}), {"goal"}}}, {1});
    AffineModel f = [] {
        AffineParams p;
        p.A = {{0.0}};
        p.E = {{1.0}};
        p.c = {0.6};
        p.controls = {{0.0}};
        return AffineModel(p);
    }();
    NoiseDistribution truth{{0.0}, {0.5}};
    UmdpAbstraction abs = assemble_umdp(3, 1, {{}, {"goal"}, {}}, [] {
        TransitionBounds t;
        t.states = {{0, 0.0, 1.0, -1}, {1, 0.0, 1.0, -1}, {2, 0.0, 1.0, -1}};
        return std::vector<TransitionBounds>{t, t, t};
    }());
    ProductUmdp prod{abs, dfa_reach_avoid()};
    Controller ctl{part, prod, std::vector<ActionId>(prod.n_states(), 0), std::vector<double>(prod.n_states(), 0.0)};

    static double analytic() {
        auto tail = [](double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); };
        const double goal = tail(0.4 / 0.5), unsafe = tail(0.6 / 0.5);
        return goal / (goal + unsafe);
    }
};

} // namespace

TEST_CASE("toy chain sweep matches the closed form") {
    Chain c;
    CHECK(Chain::analytic() == doctest::Approx(0.64803).epsilon(1e-4));
    SimulationOptions opt;
    opt.runs = 20000;
    opt.max_steps = 200;
    opt.seed = 4;
    auto rows = sweep_initial_states(c.ctl, c.f, c.truth, {0, 2}, opt);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].ci_low <= Chain::analytic());
    CHECK(rows[0].ci_high >= Chain::analytic());
    CHECK(rows[1].empirical == 0.0);

    // A sweep row is the same as calling simulate with the derived seed.
    SimulationOptions one = opt;
    one.seed = mix_seed(opt.seed, 0);
    auto direct = simulate(c.ctl, c.f, c.truth, rows[0].center, one);
    CHECK(direct.rate == rows[0].empirical);

    auto path = (std::filesystem::temp_directory_path() / "umdp_sweep.csv").string();
    write_sweep_csv(path, rows, 1);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "cell_index,x_center_0,p_lower,empirical,ci_low,ci_high");
}

TEST_CASE("fixed seeds give identical records") {
    Chain c;
    SimulationOptions opt;
    opt.runs = 200;
    opt.seed = 17;
    opt.keep_records = true;
    std::vector<double> x0{0.5};
    auto a = simulate(c.ctl, c.f, c.truth, x0, opt);
    auto b = simulate(c.ctl, c.f, c.truth, x0, opt);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].states == b.records[i].states);
        CHECK(a.records[i].accepted == b.records[i].accepted);
    }
    auto path = (std::filesystem::temp_directory_path() / "umdp_traj.csv").string();
    write_trajectory_csv(path, a.records[0]);
    std::ifstream in(path);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == a.records[0].states.size() + 1);
}

TEST_CASE("longer horizons never lower the median rate") {
    Chain c;
    std::vector<double> x0{0.5};
    double previous = 0.0;
    for (std::size_t steps : {1, 2, 4, 8, 32}) {
        std::vector<double> rates;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            SimulationOptions opt;
            opt.runs = 500;
            opt.max_steps = steps;
            opt.seed = seed;
            rates.push_back(simulate(c.ctl, c.f, c.truth, x0, opt).rate);
        }
        std::nth_element(rates.begin(), rates.begin() + 5, rates.end());
        CHECK(rates[5] >= previous);
        previous = rates[5];
    }
}

TEST_CASE("binomial interval") {
    auto [lo, hi] = binomial_ci95(50, 100);
    CHECK(lo == doctest::Approx(0.5 - 1.959964 * 0.05).epsilon(1e-6));
    CHECK(hi == doctest::Approx(0.5 + 1.959964 * 0.05).epsilon(1e-6));
    auto all = binomial_ci95(10, 10);
    CHECK(all.first == 1.0);
    CHECK(all.second == 1.0);
}
