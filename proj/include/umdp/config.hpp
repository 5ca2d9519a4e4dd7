#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "umdp/abstraction.hpp"
#include "umdp/geometry.hpp"
#include "umdp/noise.hpp"
#include "umdp/rdp.hpp"

namespace umdp {

// Where a merged config came from, for line-precise error messages.
struct ConfigSource {
    std::string name; // file path, "preset <name>" or "--set"
    std::string text;
};

struct RunConfig {
    std::string name;

    std::string model_kind;
    nlohmann::json model_params;

    AxisBox safe_box;
    std::vector<int> cells_per_dim;
    std::vector<int> block_shape;
    std::vector<bool> periodic;
    std::vector<LabeledRegion> regions;

    std::string samples_path;       // empty: draw n_samples from the ground truth
    std::size_t n_samples = 10000;
    NoiseDistribution truth;
    std::optional<double> eps_c;    // nullopt: tightest value for N
    double beta_c = 0.001;
    double alpha = 0.01;
    std::optional<double> beta;     // per-interval confidence override
    std::size_t clusters = 40;
    Vec support_center;
    std::uint64_t noise_seed = 0;

    std::string dfa = "phi1";       // preset name or path to a DFA JSON file
    int horizon = 15;

    AbstractionMode mode = AbstractionMode::Full;
    AdversaryKind adversary = AdversaryKind::TwoLayer;
    double tol = 1e-6;
    std::size_t max_iters = 10000;
    std::optional<std::size_t> bounded_steps; // Bounded(K) horizon
    Objective objective = Objective::Reach;

    std::size_t runs = 1000;
    std::size_t sweep_cells = 50;   // 0: every safe cell
    std::size_t trajectories = 10;
    std::optional<std::size_t> max_steps; // default 10x VI iterations
    Vec x0;
    std::uint64_t sim_seed = 0;

    std::string output = "out";

    nlohmann::json merged; // the validated document, used for cache keys
};

std::vector<std::string> preset_names();
// Preset text; ConfigError if unknown.
const std::string& preset_text(const std::string& name);

class ConfigBuilder {
public:
    void add_preset(const std::string& name);
    void add_file(const std::string& path);
    void add_text(const std::string& text, const std::string& origin);
    // key.path=value; value parsed as JSON, falling back to a string.
    void set(const std::string& assignment);
    void set(const std::string& dotted_key, nlohmann::json value);

    const nlohmann::json& document() const { return doc_; }
    RunConfig build() const;

private:
    nlohmann::json doc_ = nlohmann::json::object();
    std::vector<ConfigSource> sources_;
};

// Recursive merge: objects merge key by key, everything else replaces.
void merge_json(nlohmann::json& base, const nlohmann::json& patch);

// 1-based line of the first occurrence of the dotted key in text, 0 if absent.
int key_line(const std::string& text, const std::string& dotted_key);

// FNV-1a over bytes, as 16 hex digits.
std::string content_hash(const std::string& bytes);

} // namespace umdp
