#include "umdp/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "umdp/error.hpp"
#include "umdp/models.hpp"

namespace umdp {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double minutes_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count() / 60.0;
}

std::string num(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error(ErrorKind::ParseError, "cannot write '" + path + "'");
    return f;
}

bool is_dfa_preset(const std::string& s) {
    for (const char* k : {"phi1", "phi2", "phi3", "reach-avoid", "water-carpet-charge", "bounded-safety", "safety",
                          "true", "trivial"})
        if (s == k) return true;
    return false;
}

} // namespace

Partition make_partition(const RunConfig& c) {
    return build_grid(c.safe_box, c.cells_per_dim, c.regions, c.block_shape, c.periodic);
}

std::unique_ptr<DynamicsModel> make_dynamics(const RunConfig& c) {
    return make_model(c.model_kind, c.model_params, c.safe_box);
}

SampleMatrix make_samples(const RunConfig& c) {
    if (!c.samples_path.empty()) return load_samples(c.samples_path);
    if (c.truth.dim() == 0) throw Error(ErrorKind::ConfigError, "noise.truth is needed to draw samples");
    return c.truth.draw(c.n_samples, c.noise_seed);
}

NoiseModel make_noise(const RunConfig& c, SampleMatrix samples) {
    const double eps_c = c.eps_c ? *c.eps_c : tightest_eps_c(samples.n, c.beta_c);
    return make_noise_model(std::move(samples), c.clusters, eps_c, c.beta_c, c.support_center, c.noise_seed);
}

Dfa make_dfa(const RunConfig& c) {
    if (is_dfa_preset(c.dfa)) return dfa_preset(c.dfa, c.horizon);
    if (!fs::exists(c.dfa)) throw Error(ErrorKind::ConfigError, "spec.dfa: '" + c.dfa + "' is neither a preset nor a file");
    return load_dfa(c.dfa);
}

std::string abstraction_key(const RunConfig& c) {
    nlohmann::json key;
    key["model"] = c.merged.value("model", nlohmann::json());
    key["partition"] = c.merged.value("partition", nlohmann::json());
    nlohmann::json noise = c.merged.value("noise", nlohmann::json::object());
    if (!c.samples_path.empty()) noise["samples"] = content_hash(read_file(c.samples_path));
    key["noise"] = noise;
    key["mode"] = to_string(c.mode);
    key["format"] = 1;
    return content_hash(key.dump());
}

int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InsufficientSamples:
    case ErrorKind::InfeasibleGamma:
    case ErrorKind::LpInfeasible:
    case ErrorKind::NoConvergence:
        return 3;
    default:
        return 2;
    }
}

Pipeline::Pipeline(RunConfig cfg) : cfg_(std::move(cfg)), partition_(make_partition(cfg_)), model_(make_dynamics(cfg_)) {
    if (model_->state_dim() != partition_.dim())
        throw Error(ErrorKind::DimensionMismatch, "model state dimension does not match the safe box");
}

std::string Pipeline::output_path(const std::string& file) const { return (fs::path(cfg_.output) / file).string(); }

const UmdpAbstraction& Pipeline::abstract(bool use_cache) {
    const auto t0 = Clock::now();
    fs::create_directories(fs::path(cfg_.output) / "cache");
    const std::string cached = output_path("cache/abstraction-" + abstraction_key(cfg_) + ".json");
    simplified_.reset();
    product_.reset();
    syn_.reset();
    if (use_cache && fs::exists(cached)) {
        abs_ = std::make_unique<UmdpAbstraction>(load_abstraction(cached));
        cache_hit_ = true;
    } else {
        SampleMatrix s = make_samples(cfg_);
        if (s.d != model_->noise_dim())
            throw Error(ErrorKind::DimensionMismatch, "samples have " + std::to_string(s.d) + " columns, the model needs " +
                                                          std::to_string(model_->noise_dim()));
        noise_ = make_noise(cfg_, std::move(s));
        BuildOptions opt;
        opt.mode = cfg_.mode;
        opt.alpha = cfg_.alpha;
        opt.beta_override = cfg_.beta;
        abs_ = std::make_unique<UmdpAbstraction>(build_abstraction(partition_, *model_, *noise_, opt));
        save_abstraction(cached, *abs_);
        cache_hit_ = false;
    }
    t_.abstraction = minutes_since(t0);
    return *abs_;
}

void Pipeline::load_abstraction_file(const std::string& path) {
    abs_ = std::make_unique<UmdpAbstraction>(load_abstraction(path));
    if (abs_->n_states != partition_.n_states())
        throw Error(ErrorKind::DimensionMismatch, "abstraction does not match the configured partition");
    simplified_.reset();
    product_.reset();
    syn_.reset();
}

const UmdpAbstraction& Pipeline::abstraction() const {
    if (!abs_) throw Error(ErrorKind::InvalidArgument, "no abstraction built or loaded");
    return *abs_;
}

void Pipeline::prepare_product() {
    if (product_) return;
    simplified_ = std::make_unique<UmdpAbstraction>(simplify(abstraction()));
    dfa_ = std::make_unique<Dfa>(make_dfa(cfg_));
    product_ = std::make_unique<ProductUmdp>(*simplified_, *dfa_);
}

const ProductUmdp& Pipeline::product() const {
    if (!product_) throw Error(ErrorKind::InvalidArgument, "product not built");
    return *product_;
}

const SynthesisResult& Pipeline::synthesize() {
    const auto t0 = Clock::now();
    prepare_product();
    RdpOptions opt;
    opt.adversary = cfg_.adversary;
    opt.objective = cfg_.objective;
    opt.horizon = cfg_.bounded_steps ? Horizon::bounded_steps(*cfg_.bounded_steps)
                                     : Horizon::unbounded(cfg_.tol, cfg_.max_iters);
    syn_ = robust_value_iteration(*product_, opt);
    t_.synthesis = minutes_since(t0);
    return *syn_;
}

const SynthesisResult& Pipeline::synthesis() const {
    if (!syn_) throw Error(ErrorKind::InvalidArgument, "no synthesis result");
    return *syn_;
}

void Pipeline::load_strategy_file(const std::string& path) {
    prepare_product();
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open strategy '" + path + "'");
    SynthesisResult r;
    const auto n = static_cast<std::size_t>(product_->n_states());
    r.strategy.assign(n, 0);
    r.lower.p.assign(n, 0.0);
    r.upper.p.assign(n, 0.0);
    std::vector<char> seen(n, 0);
    std::string line;
    std::getline(in, line);
    if (line != "product_state,state_index,dfa_state,action,p_lower,p_upper")
        throw Error(ErrorKind::ParseError, path + ":1: unexpected strategy header");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f[6];
        for (auto& x : f)
            if (!std::getline(ss, x, ',')) throw Error(ErrorKind::ParseError, path + ":" + std::to_string(lineno) + ": short row");
        try {
            const auto p = static_cast<ProductId>(std::stol(f[0]));
            const auto s = static_cast<StateId>(std::stol(f[1]));
            const auto z = static_cast<DfaState>(std::stol(f[2]));
            if (p < 0 || static_cast<std::size_t>(p) >= n || product_->index(s, z) != p)
                throw Error(ErrorKind::ParseError, "product state does not match the configured abstraction and DFA");
            r.strategy[p] = static_cast<ActionId>(std::stol(f[3]));
            r.lower.p[p] = std::stod(f[4]);
            r.upper.p[p] = std::stod(f[5]);
            seen[p] = 1;
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::ParseError, path + ":" + std::to_string(lineno) + ": malformed number");
        } catch (const Error& e) {
            throw Error(ErrorKind::ParseError, path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (std::count(seen.begin(), seen.end(), 0) > 0)
        throw Error(ErrorKind::ParseError, path + ": strategy does not cover every product state");
    r.e_avg = average_gap(*product_, r.lower.p, r.upper.p);
    syn_ = std::move(r);
}

SimulationSummary Pipeline::simulate() {
    const auto t0 = Clock::now();
    const SynthesisResult& syn = synthesis();
    Controller ctl(partition_, *product_, syn.strategy, syn.lower.p);
    SimulationSummary out;
    SimulationOptions opt;
    opt.runs = cfg_.runs;
    opt.seed = cfg_.sim_seed;
    opt.max_steps = cfg_.max_steps ? *cfg_.max_steps : std::max<std::size_t>(1, 10 * syn.lower.iterations);
    if (cfg_.objective == Objective::Invariance) opt.invariance_steps = *cfg_.bounded_steps;
    out.max_steps = opt.max_steps;
    out.bound = ctl.bound(cfg_.x0);
    opt.keep_records = cfg_.trajectories > 0;
    out.from_x0 = simulate_runs(ctl, opt);
    if (out.from_x0.records.size() > cfg_.trajectories) out.from_x0.records.resize(cfg_.trajectories);

    std::vector<StateId> cells(partition_.n_cells());
    std::iota(cells.begin(), cells.end(), 0);
    if (cfg_.sweep_cells > 0 && cfg_.sweep_cells < cells.size()) {
        std::mt19937_64 rng(mix_seed(cfg_.sim_seed, 0x5eed));
        std::shuffle(cells.begin(), cells.end(), rng);
        cells.resize(cfg_.sweep_cells);
        std::sort(cells.begin(), cells.end());
    }
    opt.keep_records = false;
    out.sweep = sweep_initial_states(ctl, *model_, cfg_.truth, cells, opt);
    t_.simulation = minutes_since(t0);
    return out;
}

SimulationResult Pipeline::simulate_runs(const Controller& ctl, const SimulationOptions& opt) const {
    if (cfg_.truth.dim() == 0) throw Error(ErrorKind::ConfigError, "simulation needs noise.truth");
    return umdp::simulate(ctl, *model_, cfg_.truth, cfg_.x0, opt);
}

void write_results_csv(const std::string& path, const Partition& part, const ProductUmdp& prod,
                       const SynthesisResult& syn) {
    auto f = open_out(path);
    const std::size_t n = part.dim();
    f << "state_index";
    for (std::size_t d = 0; d < n; ++d) f << ",region_lower_" << d;
    for (std::size_t d = 0; d < n; ++d) f << ",region_upper_" << d;
    f << ",p_lower,p_upper,action\n";
    for (StateId s = 0; s < part.n_cells(); ++s) {
        const ProductId p = prod.lift(s);
        const AxisBox b = part.cell_box(s);
        f << s;
        for (double v : b.lower) f << ',' << num(v);
        for (double v : b.upper) f << ',' << num(v);
        f << ',' << num(syn.lower.p[p]) << ',' << num(syn.upper.p[p]) << ',' << syn.strategy[p] << '\n';
    }
}

nlohmann::json Pipeline::summary_json(const std::optional<SimulationSummary>& sim) const {
    nlohmann::json j;
    const UmdpAbstraction& abs = abstraction();
    const ConfidenceLedger ledger = confidence_ledger(abs);
    j["name"] = cfg_.name;
    j["alpha"] = ledger.alpha;
    j["mode"] = to_string(abs.mode);
    j["adversary"] = cfg_.adversary == AdversaryKind::TwoLayer ? "two-layer" : "lp";
    j["n_states"] = abs.n_states;
    j["n_actions"] = abs.n_actions;
    j["n_samples"] = abs.ledger.n_samples;
    j["n_learn"] = ledger.n_learn;
    j["beta"] = abs.ledger.beta;
    j["beta_c"] = abs.ledger.beta_c;
    j["eps"] = abs.ledger.eps;
    j["cache_hit"] = cache_hit_;
    if (noise_) {
        j["n_clusters"] = noise_->clusters.size();
        j["eps_c"] = noise_->eps_c;
        j["support_radius"] = noise_->support_radius;
    }
    if (syn_) {
        j["e_avg"] = syn_->e_avg;
        j["iterations"] = syn_->lower.iterations;
        j["residual"] = syn_->lower.residual;
        j["converged"] = syn_->lower.converged;
        j["n_product_states"] = product_->n_states();
        j["upper_bound_note"] = "p_upper uses a maximizing adversary over the same simplified uncertainty sets";
    }
    j["timings"] = {{"abstraction", t_.abstraction},
                    {"synthesis", t_.synthesis},
                    {"simulation", t_.simulation},
                    {"total", t_.abstraction + t_.synthesis + t_.simulation},
                    {"unit", "minutes"}};
    if (sim) {
        j["simulation"] = {{"x0", cfg_.x0},
                           {"bound", sim->bound},
                           {"rate", sim->from_x0.rate},
                           {"ci_low", sim->from_x0.ci_low},
                           {"ci_high", sim->from_x0.ci_high},
                           {"runs", sim->from_x0.runs},
                           {"max_steps", sim->max_steps}};
    }
    return j;
}

void Pipeline::write_results(const std::optional<SimulationSummary>& sim) const {
    fs::create_directories(cfg_.output);
    if (syn_) {
        write_results_csv(output_path("results.csv"), partition_, *product_, *syn_);
        auto f = open_out(output_path("strategy.csv"));
        f << "product_state,state_index,dfa_state,action,p_lower,p_upper\n";
        for (ProductId p = 0; p < product_->n_states(); ++p)
            f << p << ',' << product_->base_state(p) << ',' << product_->dfa_state(p) << ',' << syn_->strategy[p] << ','
              << num(syn_->lower.p[p]) << ',' << num(syn_->upper.p[p]) << '\n';
    }
    if (sim) {
        write_sweep_csv(output_path("sweep.csv"), sim->sweep, partition_.dim());
        fs::create_directories(fs::path(cfg_.output) / "trajectories");
        for (std::size_t i = 0; i < sim->from_x0.records.size(); ++i) {
            char name[64];
            std::snprintf(name, sizeof name, "trajectories/episode_%04zu.csv", i);
            write_trajectory_csv(output_path(name), sim->from_x0.records[i]);
        }
    }
    auto f = open_out(output_path("summary.json"));
    f << summary_json(sim).dump(2) << '\n';
}

} // namespace umdp
