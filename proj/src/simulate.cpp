#include "umdp/simulate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "umdp/error.hpp"
#include "umdp/parallel.hpp"

namespace umdp {

namespace {

std::string num(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error(ErrorKind::ParseError, "cannot write '" + path + "'");
    return f;
}

} // namespace

Controller::Controller(const Partition& partition, const ProductUmdp& product, std::vector<ActionId> strategy,
                       std::vector<double> lower)
    : partition_(&partition), product_(&product), strategy_(std::move(strategy)), lower_(std::move(lower)) {
    if (strategy_.size() != static_cast<std::size_t>(product.n_states()) || lower_.size() != strategy_.size())
        throw Error(ErrorKind::DimensionMismatch, "strategy and value vectors must cover the product");
    if (partition.n_states() != product.base().n_states)
        throw Error(ErrorKind::DimensionMismatch, "partition and abstraction disagree on the state count");
}

Controller::State Controller::start(std::span<const double> x0) const {
    State st;
    st.cell = partition_->locate(x0);
    st.z = dfa().next(dfa().initial(), partition_->labels(st.cell));
    st.accepted = dfa().accepting(st.z);
    return st;
}

ActionId Controller::action(const State& st) const {
    ProductId p = product_->index(st.cell, st.z);
    return p < 0 ? 0 : strategy_[p];
}

Controller::State Controller::advance(const State& st, std::span<const double> x_next) const {
    State out;
    out.cell = partition_->locate(x_next);
    out.z = dfa().next(st.z, partition_->labels(out.cell));
    out.accepted = st.accepted || dfa().accepting(out.z);
    return out;
}

double Controller::bound(std::span<const double> x0) const {
    StateId s = partition_->locate(x0);
    if (partition_->is_unsafe(s)) return 0.0;
    return lower_[product_->lift(s)];
}

std::pair<double, double> binomial_ci95(std::size_t successes, std::size_t runs) {
    if (runs == 0) return {0.0, 1.0};
    const double p = static_cast<double>(successes) / static_cast<double>(runs);
    const double h = 1.959963984540054 * std::sqrt(p * (1.0 - p) / static_cast<double>(runs));
    return {std::max(0.0, p - h), std::min(1.0, p + h)};
}

namespace {

TrajectoryRecord run_episode(const Controller& ctl, const DynamicsModel& f, const NoiseDistribution& truth,
                             std::span<const double> x0, const SimulationOptions& opt, std::uint64_t seed) {
    const Partition& part = ctl.partition();
    const bool invariance = opt.invariance_steps > 0;
    const std::size_t limit = invariance ? opt.invariance_steps : opt.max_steps;
    std::mt19937_64 rng(seed);
    TrajectoryRecord r;
    Vec x(x0.begin(), x0.end());
    part.wrap(x);
    Controller::State st = ctl.start(x);
    if (opt.keep_records) {
        r.x0 = x;
        r.states.push_back(x);
        r.labels.push_back(part.labels(st.cell));
    }
    auto failed = [&] {
        if (invariance) return !ctl.dfa().accepting(st.z);
        return !st.accepted && part.has_label(st.cell, kUnsafeProp);
    };
    Vec w(truth.dim()), next(x.size());
    while (!failed() && !(st.accepted && !invariance) && r.steps < limit) {
        const ActionId a = ctl.action(st);
        truth.sample(rng, w);
        f.step(x, a, w, next);
        part.wrap(next);
        std::swap(x, next);
        st = ctl.advance(st, x);
        ++r.steps;
        if (opt.keep_records) {
            r.actions.push_back(a);
            r.states.push_back(x);
            r.labels.push_back(part.labels(st.cell));
        }
    }
    r.accepted = invariance ? !failed() : st.accepted;
    return r;
}

} // namespace

SimulationResult simulate(const Controller& ctl, const DynamicsModel& f, const NoiseDistribution& truth,
                          std::span<const double> x0, const SimulationOptions& opt) {
    if (opt.max_steps < 1 && opt.invariance_steps == 0) throw Error(ErrorKind::InvalidArgument, "max_steps must be >= 1");
    if (truth.dim() != f.noise_dim())
        throw Error(ErrorKind::DimensionMismatch, "ground-truth noise dimension does not match the model");
    std::vector<TrajectoryRecord> recs(opt.runs);
    std::vector<char> ok(opt.runs, 0);
    parallel_for(opt.runs, [&](std::size_t i) {
        TrajectoryRecord r = run_episode(ctl, f, truth, x0, opt, mix_seed(opt.seed, i));
        ok[i] = r.accepted;
        if (opt.keep_records) recs[i] = std::move(r);
    });
    SimulationResult res;
    res.runs = opt.runs;
    res.successes = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
    res.rate = opt.runs ? static_cast<double>(res.successes) / static_cast<double>(opt.runs) : 0.0;
    std::tie(res.ci_low, res.ci_high) = binomial_ci95(res.successes, res.runs);
    if (opt.keep_records) res.records = std::move(recs);
    return res;
}

std::vector<SweepRow> sweep_initial_states(const Controller& ctl, const DynamicsModel& f,
                                           const NoiseDistribution& truth, const std::vector<StateId>& cells,
                                           const SimulationOptions& opt) {
    std::vector<SweepRow> rows;
    rows.reserve(cells.size());
    for (StateId s : cells) {
        SweepRow row;
        row.cell = s;
        if (ctl.partition().is_unsafe(s)) {
            // No center in the unsafe region: the episode fails immediately.
            row.center.assign(ctl.partition().dim(), std::nan(""));
            row.ci_high = 0.0;
            rows.push_back(std::move(row));
            continue;
        }
        row.center = ctl.partition().cell_box(s).center();
        row.p_lower = ctl.bound(row.center);
        SimulationOptions o = opt;
        o.seed = mix_seed(opt.seed, static_cast<std::uint64_t>(s));
        o.keep_records = false;
        auto r = simulate(ctl, f, truth, row.center, o);
        row.empirical = r.rate;
        row.ci_low = r.ci_low;
        row.ci_high = r.ci_high;
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows, std::size_t dim) {
    auto f = open_out(path);
    f << "cell_index";
    for (std::size_t d = 0; d < dim; ++d) f << ",x_center_" << d;
    f << ",p_lower,empirical,ci_low,ci_high\n";
    for (const auto& r : rows) {
        f << r.cell;
        for (double c : r.center) f << ',' << num(c);
        f << ',' << num(r.p_lower) << ',' << num(r.empirical) << ',' << num(r.ci_low) << ',' << num(r.ci_high) << '\n';
    }
}

void write_trajectory_csv(const std::string& path, const TrajectoryRecord& r) {
    auto f = open_out(path);
    const std::size_t dim = r.x0.size();
    f << "step";
    for (std::size_t d = 0; d < dim; ++d) f << ",x_" << d;
    f << ",action,labels,accepted\n";
    for (std::size_t t = 0; t < r.states.size(); ++t) {
        f << t;
        for (double v : r.states[t]) f << ',' << num(v);
        f << ',';
        if (t < r.actions.size()) f << r.actions[t];
        f << ',';
        for (std::size_t k = 0; k < r.labels[t].size(); ++k) f << (k ? "|" : "") << r.labels[t][k];
        f << ',' << (r.accepted ? 1 : 0) << '\n';
    }
}

} // namespace umdp
