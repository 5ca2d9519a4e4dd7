#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "umdp/dynamics.hpp"
#include "umdp/noise.hpp"
#include "umdp/product.hpp"

namespace umdp {

// Strategy refined to the continuous system: tracks the DFA state from the
// labels of the observed cells and reads the action off the product strategy.
class Controller {
public:
    struct State {
        StateId cell = 0;
        DfaState z = 0;
        bool accepted = false;
    };

    Controller(const Partition& partition, const ProductUmdp& product, std::vector<ActionId> strategy,
               std::vector<double> lower);

    // z <- delta(z0, L(J(x0))).
    State start(std::span<const double> x0) const;
    // sigma((J(x), z)); the first action where the product state was never reached.
    ActionId action(const State& st) const;
    // z <- delta(z, L(J(x'))).
    State advance(const State& st, std::span<const double> x_next) const;
    // Certified lower bound p(Lift(J(x0))); 0 in the unsafe region.
    double bound(std::span<const double> x0) const;

    const Partition& partition() const { return *partition_; }
    const Dfa& dfa() const { return product_->dfa(); }

private:
    const Partition* partition_;
    const ProductUmdp* product_;
    std::vector<ActionId> strategy_;
    std::vector<double> lower_;
};

struct TrajectoryRecord {
    Vec x0;
    std::vector<Vec> states;                     // x0 .. x_T
    std::vector<ActionId> actions;               // T entries
    std::vector<std::vector<std::string>> labels; // L(J(x_t)), T + 1 entries
    bool accepted = false;
    std::size_t steps = 0;
};

struct SimulationResult {
    std::size_t runs = 0;
    std::size_t successes = 0;
    double rate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::vector<TrajectoryRecord> records; // only when requested
};

struct SimulationOptions {
    std::size_t max_steps = 100;
    std::size_t runs = 1000;
    std::uint64_t seed = 0;
    bool keep_records = false;
    // 0: episodes end on acceptance. K > 0: invariance episodes that succeed
    // when the DFA state stays accepting for x_0 .. x_K.
    std::size_t invariance_steps = 0;
};

// Two-sided 95% normal-approximation interval, clamped to [0, 1].
std::pair<double, double> binomial_ci95(std::size_t successes, std::size_t runs);

// Episodes succeed on DFA acceptance, fail on entering a region labeled
// unsafe while unaccepted or on reaching max_steps. Episode i draws its noise from
// mix_seed(seed, i), so results do not depend on scheduling.
SimulationResult simulate(const Controller& ctl, const DynamicsModel& f, const NoiseDistribution& truth,
                          std::span<const double> x0, const SimulationOptions& opt);

struct SweepRow {
    StateId cell = 0;
    Vec center;
    double p_lower = 0.0;
    double empirical = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

// simulate() from the center of each listed cell; cell k uses seed
// mix_seed(opt.seed, cell).
std::vector<SweepRow> sweep_initial_states(const Controller& ctl, const DynamicsModel& f,
                                           const NoiseDistribution& truth, const std::vector<StateId>& cells,
                                           const SimulationOptions& opt);

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows, std::size_t dim);
void write_trajectory_csv(const std::string& path, const TrajectoryRecord& r);

} // namespace umdp
