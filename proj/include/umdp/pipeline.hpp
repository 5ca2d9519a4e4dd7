#pragma once

#include <memory>
#include <optional>
#include <string>

#include "umdp/config.hpp"
#include "umdp/dfa.hpp"
#include "umdp/error.hpp"
#include "umdp/product.hpp"
#include "umdp/rdp.hpp"
#include "umdp/simulate.hpp"

namespace umdp {

Partition make_partition(const RunConfig& c);
std::unique_ptr<DynamicsModel> make_dynamics(const RunConfig& c);
// Loads noise.samples or draws n_samples from the ground truth.
SampleMatrix make_samples(const RunConfig& c);
NoiseModel make_noise(const RunConfig& c, SampleMatrix samples);
Dfa make_dfa(const RunConfig& c);
// Content hash of everything the abstraction depends on (including the
// sample file's bytes when one is given).
std::string abstraction_key(const RunConfig& c);

struct StageTimings {
    double abstraction = 0.0; // minutes
    double synthesis = 0.0;
    double simulation = 0.0;
    double total = 0.0;
};

struct SimulationSummary {
    double bound = 0.0; // p_lower at Lift(J(x0))
    SimulationResult from_x0;
    std::vector<SweepRow> sweep;
    std::size_t max_steps = 0;
};

class Pipeline {
public:
    explicit Pipeline(RunConfig cfg);

    const RunConfig& config() const { return cfg_; }
    const Partition& partition() const { return partition_; }
    const DynamicsModel& model() const { return *model_; }

    // Builds the abstraction, or reads it from <output>/cache when the
    // content hash matches. Returns the unsimplified abstraction.
    const UmdpAbstraction& abstract(bool use_cache = true);
    void load_abstraction_file(const std::string& path);
    const UmdpAbstraction& abstraction() const;
    bool cache_hit() const { return cache_hit_; }
    const std::optional<NoiseModel>& noise() const { return noise_; }

    const SynthesisResult& synthesize();
    const SynthesisResult& synthesis() const;
    const ProductUmdp& product() const;
    // Reads a strategy file written by write_results().
    void load_strategy_file(const std::string& path);

    SimulationSummary simulate();

    // results.csv, strategy.csv, summary.json (and sweep/trajectories when
    // a simulation ran) under the output directory.
    void write_results(const std::optional<SimulationSummary>& sim = std::nullopt) const;
    nlohmann::json summary_json(const std::optional<SimulationSummary>& sim) const;

    const StageTimings& timings() const { return t_; }
    std::string output_path(const std::string& file) const;

private:
    void prepare_product();
    SimulationResult simulate_runs(const Controller& ctl, const SimulationOptions& opt) const;

    RunConfig cfg_;
    Partition partition_;
    std::unique_ptr<DynamicsModel> model_;
    std::optional<NoiseModel> noise_;
    std::unique_ptr<UmdpAbstraction> abs_;
    std::unique_ptr<UmdpAbstraction> simplified_;
    std::unique_ptr<Dfa> dfa_;
    std::unique_ptr<ProductUmdp> product_;
    std::optional<SynthesisResult> syn_;
    bool cache_hit_ = false;
    StageTimings t_;
};

void write_results_csv(const std::string& path, const Partition& part, const ProductUmdp& prod,
                       const SynthesisResult& syn);

// Exit code for an error kind: 2 for configuration and input problems,
// 3 for numeric failures.
int exit_code(ErrorKind kind);

} // namespace umdp
