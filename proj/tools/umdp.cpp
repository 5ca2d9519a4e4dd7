// Command-line driver: abstract, synthesize, simulate, run, bench.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "umdp/bench.hpp"
#include "umdp/error.hpp"
#include "umdp/pipeline.hpp"

using namespace umdp;

namespace {

struct CommonFlags {
    std::string preset;
    std::vector<std::string> configs;
    std::vector<std::string> sets;
    std::string out;
    std::optional<std::size_t> n_samples;
    std::string samples;
    std::string mode;
    std::string adversary;
    std::optional<double> tol;
    std::optional<std::size_t> max_iters;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;
    std::string eps_c;
    std::optional<double> beta_c;
    std::string dfa;
    std::optional<int> horizon;
    std::vector<int> grid;
    std::optional<std::size_t> runs;
    bool no_cache = false;

    void attach(CLI::App* app) {
        app->add_option("--preset", preset, "Start from a bundled benchmark preset");
        app->add_option("-c,--config", configs, "JSON config file(s), merged in order");
        app->add_option("--set", sets, "Override a config key: key.path=value");
        app->add_option("-o,--out", out, "Output directory (output)");
        app->add_option("--n-samples", n_samples, "Number of drawn noise samples (noise.n_samples)");
        app->add_option("--samples", samples, "CSV file with noise samples (noise.samples)");
        app->add_option("--mode", mode, "full | support-only-imdp | naive-imdp (synthesis.mode)");
        app->add_option("--adversary", adversary, "two-layer | lp (synthesis.adversary)");
        app->add_option("--tol", tol, "Value iteration tolerance (synthesis.tol)");
        app->add_option("--max-iters", max_iters, "Value iteration cap (synthesis.max_iters)");
        app->add_option("--seed", seed, "Sample seed (noise.seed)");
        app->add_option("--alpha", alpha, "Overall confidence budget (noise.alpha)");
        app->add_option("--eps-c", eps_c, "Support mass eps_c or 'auto' (noise.eps_c)");
        app->add_option("--beta-c", beta_c, "Support confidence (noise.beta_c)");
        app->add_option("--dfa", dfa, "DFA preset or JSON file (spec.dfa)");
        app->add_option("--horizon", horizon, "Bounded safety horizon (spec.horizon)");
        app->add_option("--grid", grid, "Cells per dimension (partition.cells_per_dim)")->delimiter(',');
        app->add_option("--runs", runs, "Episodes per simulation (simulation.runs)");
        app->add_flag("--no-cache", no_cache, "Rebuild the abstraction even when cached");
    }

    // base fills in a starting document when neither --preset nor --config is given.
    RunConfig build(void (*base)(ConfigBuilder&) = nullptr) const {
        ConfigBuilder b;
        if (!preset.empty()) b.add_preset(preset);
        for (const auto& c : configs) b.add_file(c);
        if (preset.empty() && configs.empty() && base) base(b);
        else if (preset.empty() && configs.empty())
            throw Error(ErrorKind::ConfigError, "give --preset or --config (presets: " + join(preset_names()) + ")");
        if (!out.empty()) b.set("output", out);
        if (n_samples) b.set("noise.n_samples", *n_samples);
        if (!samples.empty()) b.set("noise.samples", samples);
        if (!mode.empty()) b.set("synthesis.mode", mode);
        if (!adversary.empty()) b.set("synthesis.adversary", adversary);
        if (tol) b.set("synthesis.tol", *tol);
        if (max_iters) b.set("synthesis.max_iters", *max_iters);
        if (seed) b.set("noise.seed", *seed);
        if (alpha) b.set("noise.alpha", *alpha);
        if (!eps_c.empty()) b.set(eps_c == "auto" ? std::string("noise.eps_c=\"auto\"") : "noise.eps_c=" + eps_c);
        if (beta_c) b.set("noise.beta_c", *beta_c);
        if (!dfa.empty()) b.set("spec.dfa", dfa);
        if (horizon) b.set("spec.horizon", *horizon);
        if (!grid.empty()) b.set("partition.cells_per_dim", grid);
        if (runs) b.set("simulation.runs", *runs);
        for (const auto& s : sets) b.set(s);
        return b.build();
    }

    static std::string join(const std::vector<std::string>& v) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
        return s;
    }
};

void print_summary(const Pipeline& p, const std::optional<SimulationSummary>& sim) {
    std::cout << p.summary_json(sim).dump(2) << '\n';
}

int cmd_abstract(const CommonFlags& f) {
    Pipeline p(f.build());
    p.abstract(!f.no_cache);
    std::filesystem::create_directories(p.config().output);
    save_abstraction(p.output_path("abstraction.json"), p.abstraction());
    p.write_results();
    print_summary(p, std::nullopt);
    return 0;
}

int cmd_synthesize(const CommonFlags& f, const std::string& abstraction) {
    Pipeline p(f.build());
    if (!abstraction.empty()) p.load_abstraction_file(abstraction);
    else p.abstract(!f.no_cache);
    p.synthesize();
    p.write_results();
    print_summary(p, std::nullopt);
    return 0;
}

int cmd_simulate(const CommonFlags& f, const std::string& abstraction, const std::string& strategy) {
    Pipeline p(f.build());
    if (!abstraction.empty()) p.load_abstraction_file(abstraction);
    else p.abstract(!f.no_cache);
    p.load_strategy_file(strategy.empty() ? p.output_path("strategy.csv") : strategy);
    auto sim = p.simulate();
    p.write_results(sim);
    print_summary(p, sim);
    return 0;
}

int cmd_run(const CommonFlags& f, bool skip_sim) {
    Pipeline p(f.build());
    p.abstract(!f.no_cache);
    p.synthesize();
    std::optional<SimulationSummary> sim;
    if (!skip_sim) sim = p.simulate();
    p.write_results(sim);
    print_summary(p, sim);
    return 0;
}

int cmd_bench(const std::vector<std::size_t>& sizes, std::size_t instances, std::uint64_t seed, bool no_lp,
              const CommonFlags& f, bool synthesis) {
    std::printf("%8s %16s %16s %10s %14s\n", "n_post", "two_layer_us", "lp_us", "speedup", "max_abs_diff");
    for (const auto& r : bench_adversary(sizes, instances, seed, !no_lp))
        std::printf("%8zu %16.3f %16.3f %10.2f %14.3g\n", r.n_post, r.two_layer_us, r.lp_us,
                    r.two_layer_us > 0 ? r.lp_us / r.two_layer_us : 0.0, r.max_abs_diff);
    if (!synthesis) return 0;
    Pipeline p(f.build(add_synthesis_bench_defaults));
    p.abstract(!f.no_cache);
    p.synthesize(); // builds the product
    auto t = bench_synthesis(p.product(), Horizon::unbounded(p.config().tol, p.config().max_iters));
    std::printf("synthesis: %d product states, %d actions, %zu iterations\n", t.n_product_states, t.n_actions,
                t.iterations);
    std::printf("  two-layer %.3f s, lp %.3f s, speedup %.2f, max |diff| %.3g\n", t.two_layer_s, t.lp_s,
                t.lp_s / t.two_layer_s, t.max_abs_diff);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Data-driven UMDP abstraction and robust synthesis for LTLf specifications"};
    app.require_subcommand(1);

    CommonFlags common;
    std::string abstraction, strategy;
    bool skip_sim = false;
    std::vector<std::size_t> sizes{10, 100, 1000, 2000};
    std::size_t instances = 20;
    std::uint64_t bench_seed = 1;
    bool no_lp = false, bench_synth = false;

    auto* abs_cmd = app.add_subcommand("abstract", "Build (or fetch from cache) the UMDP abstraction");
    common.attach(abs_cmd);
    auto* syn_cmd = app.add_subcommand("synthesize", "Robust value iteration on the product");
    common.attach(syn_cmd);
    syn_cmd->add_option("--abstraction", abstraction, "Use an exported abstraction file");
    auto* sim_cmd = app.add_subcommand("simulate", "Closed-loop Monte Carlo with a saved strategy");
    common.attach(sim_cmd);
    sim_cmd->add_option("--abstraction", abstraction, "Use an exported abstraction file");
    sim_cmd->add_option("--strategy", strategy, "Strategy file (default <out>/strategy.csv)");
    auto* run_cmd = app.add_subcommand("run", "Abstract, synthesize, simulate and export");
    common.attach(run_cmd);
    run_cmd->add_flag("--no-simulation", skip_sim, "Stop after synthesis");
    auto* bench_cmd = app.add_subcommand("bench", "Time the two-layer adversary against the LP");
    common.attach(bench_cmd);
    bench_cmd->add_option("--sizes", sizes, "Listed successor counts")->delimiter(',');
    bench_cmd->add_option("--instances", instances, "Instances per size");
    bench_cmd->add_option("--bench-seed", bench_seed, "Instance seed");
    bench_cmd->add_flag("--no-lp", no_lp, "Skip the LP timings");
    bench_cmd->add_flag("--synthesis", bench_synth, "Also time full synthesis (1600 cells, 8 actions by default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*abs_cmd) return cmd_abstract(common);
        if (*syn_cmd) return cmd_synthesize(common, abstraction);
        if (*sim_cmd) return cmd_simulate(common, abstraction, strategy);
        if (*run_cmd) return cmd_run(common, skip_sim);
        if (*bench_cmd) return cmd_bench(sizes, instances, bench_seed, no_lp, common, bench_synth);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
