#include "umdp/abstraction.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"
#include "umdp/error.hpp"
#include "umdp/parallel.hpp"

namespace umdp {

const char* to_string(AbstractionMode m) {
    switch (m) {
    case AbstractionMode::Full: return "full";
    case AbstractionMode::SupportOnlyImdp: return "support-only-imdp";
    case AbstractionMode::NaiveImdp: return "naive-imdp";
    }
    return "full";
}

AbstractionMode parse_mode(const std::string& s) {
    if (s == "full" || s == "umdp") return AbstractionMode::Full;
    if (s == "support-only-imdp" || s == "support-only") return AbstractionMode::SupportOnlyImdp;
    if (s == "naive-imdp" || s == "naive") return AbstractionMode::NaiveImdp;
    throw Error(ErrorKind::ConfigError, "unknown abstraction mode '" + s + "'");
}

BoundsView UmdpAbstraction::bounds(StateId s, ActionId a) const {
    const std::size_t r = row(s, a);
    BoundsView v;
    v.states = {state_entries.data() + state_offset[r], state_offset[r + 1] - state_offset[r]};
    v.blocks = {block_entries.data() + block_offset[r], block_offset[r + 1] - block_offset[r]};
    v.eps_c = meta[r].eps_c;
    v.mass_budget = meta[r].mass_budget;
    v.background_upper = meta[r].background_upper;
    return v;
}

std::vector<std::string> UmdpAbstraction::propositions() const {
    std::set<std::string> props;
    for (const auto& l : labels) props.insert(l.begin(), l.end());
    return {props.begin(), props.end()};
}

void UmdpAbstraction::push_row(const TransitionBounds& t, std::uint32_t learned) {
    if (state_offset.empty()) state_offset.push_back(0);
    if (block_offset.empty()) block_offset.push_back(0);
    state_entries.insert(state_entries.end(), t.states.begin(), t.states.end());
    block_entries.insert(block_entries.end(), t.blocks.begin(), t.blocks.end());
    state_offset.push_back(state_entries.size());
    block_offset.push_back(block_entries.size());
    meta.push_back({t.eps_c, t.background_upper, t.mass_budget, learned});
}

namespace {

// Calls fn(state) for every cell in the range, wrapping periodic dimensions.
template <class Fn>
void for_each_cell(const Partition& p, const CellRange& r, Fn&& fn) {
    const std::size_t n = p.dim();
    const auto& cells = p.cells_per_dim();
    std::vector<int> idx(r.lo), c(n);
    while (true) {
        for (std::size_t d = 0; d < n; ++d) c[d] = idx[d] % cells[d];
        fn(p.cell_at(c));
        std::size_t d = 0;
        for (; d < n; ++d) {
            if (++idx[d] <= r.hi[d]) break;
            idx[d] = r.lo[d];
        }
        if (d == n) break;
    }
}

CellRange block_range(const Partition& p, const CellRange& r) {
    CellRange b = r;
    for (std::size_t d = 0; d < p.dim(); ++d) {
        b.lo[d] = r.lo[d] / p.block_shape()[d];
        b.hi[d] = r.hi[d] / p.block_shape()[d];
    }
    return b;
}

template <class Fn>
void for_each_block(const Partition& p, const CellRange& br, Fn&& fn) {
    const std::size_t n = p.dim();
    const auto& blocks = p.blocks_per_dim();
    std::vector<int> idx(br.lo), c(n);
    while (true) {
        for (std::size_t d = 0; d < n; ++d) c[d] = idx[d] % blocks[d];
        fn(p.block_at(c));
        std::size_t d = 0;
        for (; d < n; ++d) {
            if (++idx[d] <= br.hi[d]) break;
            idx[d] = br.lo[d];
        }
        if (d == n) break;
    }
}

bool single(const CellRange& r) {
    for (std::size_t d = 0; d < r.lo.size(); ++d)
        if (r.lo[d] != r.hi[d]) return false;
    return true;
}

struct Scratch {
    std::vector<double> cont, inter, bcont, binter;
    std::vector<char> smark, bmark;
    std::vector<StateId> states;
    std::vector<BlockId> blocks;

    Scratch(StateId ns, BlockId nb)
        : cont(ns, 0.0), inter(ns, 0.0), bcont(nb, 0.0), binter(nb, 0.0), smark(ns, 0), bmark(nb, 0) {}

    void touch_state(StateId s) {
        if (!smark[s]) {
            smark[s] = 1;
            states.push_back(s);
        }
    }
    void touch_block(BlockId q) {
        if (!bmark[q]) {
            bmark[q] = 1;
            blocks.push_back(q);
        }
    }
    void reset() {
        for (StateId s : states) {
            cont[s] = inter[s] = 0.0;
            smark[s] = 0;
        }
        for (BlockId q : blocks) {
            bcont[q] = binter[q] = 0.0;
            bmark[q] = 0;
        }
        states.clear();
        blocks.clear();
    }

    void add(const Partition& p, const CellRange& r, double w) {
        const bool inside_one = !r.escapes && single(r);
        if (!r.outside) {
            for_each_cell(p, r, [&](StateId c) {
                touch_state(c);
                inter[c] += w;
                if (inside_one) cont[c] += w;
            });
            CellRange br = block_range(p, r);
            const bool one_block = !r.escapes && single(br);
            for_each_block(p, br, [&](BlockId q) {
                touch_block(q);
                binter[q] += w;
                if (one_block) bcont[q] += w;
            });
        }
        if (r.escapes) {
            StateId u = p.unsafe_index();
            BlockId ub = p.unsafe_block();
            touch_state(u);
            touch_block(ub);
            inter[u] += w;
            binter[ub] += w;
            if (r.outside) {
                cont[u] += w;
                bcont[ub] += w;
            }
        }
    }
};

// Blocks covering the image of the cell under the learned support.
std::vector<BlockId> support_blocks(const Partition& p, const DynamicsModel& f, const NoiseModel& noise, StateId s,
                                    ActionId a) {
    AxisBox box = reach_overapprox(f, p.cell_box(s), a, noise.support_center, noise.support_radius);
    CellRange r = p.touched(box);
    std::vector<BlockId> q;
    if (!r.outside) for_each_block(p, block_range(p, r), [&](BlockId b) { q.push_back(b); });
    if (r.escapes) q.push_back(p.unsafe_block());
    std::sort(q.begin(), q.end());
    q.erase(std::unique(q.begin(), q.end()), q.end());
    return q;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

} // namespace

std::pair<double, double> empirical_counts(const Partition& p, const std::vector<AxisBox>& boxes,
                                           const std::vector<double>& weights, const std::vector<StateId>& target) {
    std::vector<char> in_target(p.n_states(), 0);
    for (StateId s : target) in_target[s] = 1;
    double contained = 0.0, intersecting = 0.0;
    for (std::size_t j = 0; j < boxes.size(); ++j) {
        CellRange r = p.touched(boxes[j]);
        bool all_in = true, any_in = false;
        if (!r.outside)
            for_each_cell(p, r, [&](StateId c) {
                all_in = all_in && in_target[c];
                any_in = any_in || in_target[c];
            });
        if (r.escapes) {
            all_in = all_in && in_target[p.unsafe_index()];
            any_in = any_in || in_target[p.unsafe_index()];
        }
        if (all_in) contained += weights[j];
        if (any_in) intersecting += weights[j];
    }
    return {contained, intersecting};
}

double hoeffding_eps(double beta, std::size_t n) {
    if (!(beta > 0 && beta < 1) || n < 1) throw Error(ErrorKind::InvalidArgument, "hoeffding_eps: beta in (0,1), N >= 1");
    return std::sqrt(std::log(2.0 / beta) / (2.0 * static_cast<double>(n)));
}

std::size_t required_sample_size(double alpha, double eps, double eps_c, std::size_t n_learn) {
    const double ratio = static_cast<double>(n_learn) / alpha;
    const double hoeffding = std::log(2.0 * ratio) / (2.0 * eps * eps);
    const double support = std::log(ratio) / -std::log1p(-eps_c);
    return static_cast<std::size_t>(std::ceil(std::max(hoeffding, support) - 1e-9));
}

UmdpAbstraction build_abstraction(const Partition& p, const DynamicsModel& f, const NoiseModel& noise,
                                  const BuildOptions& opt) {
    if (p.dim() != f.state_dim()) throw Error(ErrorKind::DimensionMismatch, "partition and model state dimension");
    if (noise.dim() != f.noise_dim()) throw Error(ErrorKind::DimensionMismatch, "samples and model noise dimension");
    if (noise.samples.n == 0 || noise.clusters.empty()) throw Error(ErrorKind::InsufficientSamples, "no samples");
    const bool budget = opt.mode != AbstractionMode::NaiveImdp;
    if (budget) {
        std::size_t need = support_required_n(noise.eps_c, noise.beta_c);
        if (noise.samples.n < need)
            throw Error(ErrorKind::InsufficientSamples, "support learning needs " + std::to_string(need) +
                                                            " samples for eps_c=" + std::to_string(noise.eps_c) +
                                                            ", have " + std::to_string(noise.samples.n));
    }

    const StateId ns = p.n_states();
    const ActionId na = f.n_actions();
    const StateId n_safe = p.n_cells();

    // Counting pass: the number of learned intervals fixes beta and eps.
    std::vector<std::size_t> learned(static_cast<std::size_t>(n_safe) * na, 0);
    if (opt.mode == AbstractionMode::NaiveImdp) {
        std::fill(learned.begin(), learned.end(), static_cast<std::size_t>(ns));
    } else {
        std::size_t block_size = 1;
        for (int b : p.block_shape()) block_size *= static_cast<std::size_t>(b);
        parallel_for(static_cast<std::size_t>(n_safe), [&](std::size_t s) {
            for (ActionId a = 0; a < na; ++a) {
                auto q = support_blocks(p, f, noise, static_cast<StateId>(s), a);
                std::size_t c = 0;
                for (BlockId b : q) c += b == p.unsafe_block() ? 1 : block_size;
                learned[s * na + a] = c + (opt.mode == AbstractionMode::Full ? q.size() : 0);
            }
        });
    }
    std::size_t total = 0;
    for (auto v : learned) total += v;

    ConfidenceLedger ledger;
    ledger.beta_c = budget ? noise.beta_c : 0.0;
    ledger.n_learn = 1 + total;
    ledger.n_samples = noise.samples.n;
    if (opt.beta_override) {
        ledger.beta = *opt.beta_override;
        ledger.alpha = ledger.beta_c + static_cast<double>(total) * ledger.beta;
    } else {
        if (!(opt.alpha > ledger.beta_c && opt.alpha < 1))
            throw Error(ErrorKind::InvalidArgument, "alpha must lie in (beta_c, 1)");
        ledger.alpha = opt.alpha;
        ledger.beta = (opt.alpha - ledger.beta_c) / static_cast<double>(total);
    }
    const double eps = hoeffding_eps(ledger.beta, noise.samples.n);
    ledger.eps = eps;

    std::vector<double> weights(noise.clusters.size());
    for (std::size_t j = 0; j < weights.size(); ++j)
        weights[j] = static_cast<double>(noise.clusters[j].count) / static_cast<double>(noise.samples.n);

    std::vector<BlockId> block_of(ns);
    for (StateId s = 0; s < ns; ++s) block_of[s] = p.block_of(s);

    std::vector<std::vector<TransitionBounds>> rows(n_safe);
    const std::size_t n_chunks = std::min<std::size_t>(static_cast<std::size_t>(n_safe), 256);
    parallel_for(n_chunks, [&](std::size_t chunk) {
        Scratch sc(ns, p.n_blocks());
        const std::size_t lo = chunk * n_safe / n_chunks, hi = (chunk + 1) * n_safe / n_chunks;
        for (std::size_t si = lo; si < hi; ++si) {
            const StateId s = static_cast<StateId>(si);
            const AxisBox cell = p.cell_box(s);
            rows[s].resize(na);
            for (ActionId a = 0; a < na; ++a) {
                sc.reset();
                for (std::size_t j = 0; j < noise.clusters.size(); ++j) {
                    const Cluster& c = noise.clusters[j];
                    AxisBox box = reach_overapprox(f, cell, a, c.center, 0.5 * c.diameter);
                    sc.add(p, p.touched(box), weights[j]);
                }
                TransitionBounds t;
                if (opt.mode == AbstractionMode::NaiveImdp) {
                    std::vector<StateId> touched = sc.states;
                    std::sort(touched.begin(), touched.end());
                    for (StateId x : touched)
                        t.states.push_back({x, clamp01(sc.cont[x] - eps), clamp01(sc.inter[x] + eps), -1});
                    t.background_upper = clamp01(eps);
                } else {
                    std::vector<BlockId> q = support_blocks(p, f, noise, s, a);
                    for (std::size_t k = 0; k < q.size(); ++k) {
                        const BlockId b = q[k];
                        const std::int32_t slot = opt.mode == AbstractionMode::Full ? static_cast<std::int32_t>(k) : -1;
                        if (opt.mode == AbstractionMode::Full)
                            t.blocks.push_back({b, clamp01(sc.bcont[b] - eps), clamp01(sc.binter[b] + eps)});
                        for (StateId x : p.block_members(b))
                            t.states.push_back({x, clamp01(sc.cont[x] - eps), clamp01(sc.inter[x] + eps), slot});
                    }
                    std::sort(t.states.begin(), t.states.end(),
                              [](const StateBound& x, const StateBound& y) { return x.state < y.state; });
                    t.mass_budget = true;
                    t.eps_c = noise.eps_c;
                }
                auto cert = check_certificates(t.view(), ns, 1e-9);
                if (!cert.ok)
                    throw Error(ErrorKind::InfeasibleGamma, "state " + std::to_string(s) + " action " +
                                                                std::to_string(a) + ": " + cert.message);
                rows[s][a] = std::move(t);
            }
        }
    });

    UmdpAbstraction abs;
    abs.n_states = ns;
    abs.n_actions = na;
    abs.unsafe = p.unsafe_index();
    abs.unsafe_block = p.unsafe_block();
    abs.mode = opt.mode;
    abs.ledger = ledger;
    abs.block_of = block_of;
    abs.labels.resize(ns);
    for (StateId s = 0; s < ns; ++s) abs.labels[s] = p.labels(s);
    for (StateId s = 0; s < n_safe; ++s)
        for (ActionId a = 0; a < na; ++a)
            abs.push_row(rows[s][a], static_cast<std::uint32_t>(learned[static_cast<std::size_t>(s) * na + a]));
    TransitionBounds dirac;
    dirac.states.push_back({abs.unsafe, 1.0, 1.0, 0});
    dirac.blocks.push_back({abs.unsafe_block, 1.0, 1.0});
    for (ActionId a = 0; a < na; ++a) abs.push_row(dirac, 0);
    return abs;
}

std::size_t learned_intervals(const UmdpAbstraction& abs, StateId s, ActionId a) {
    return abs.meta[abs.row(s, a)].learned;
}

ConfidenceLedger confidence_ledger(const UmdpAbstraction& abs) {
    ConfidenceLedger l = abs.ledger;
    std::size_t total = 0;
    for (StateId s = 0; s < abs.n_states; ++s)
        for (ActionId a = 0; a < abs.n_actions; ++a) total += learned_intervals(abs, s, a);
    l.n_learn = 1 + total;
    l.alpha = l.beta_c + static_cast<double>(total) * l.beta;
    return l;
}

UmdpAbstraction simplify(const UmdpAbstraction& abs) {
    UmdpAbstraction out;
    out.n_states = abs.n_states;
    out.n_actions = abs.n_actions;
    out.unsafe = abs.unsafe;
    out.unsafe_block = abs.unsafe_block;
    out.mode = abs.mode;
    out.ledger = abs.ledger;
    out.block_of = abs.block_of;
    out.labels = abs.labels;
    out.simplified = true;
    for (StateId s = 0; s < abs.n_states; ++s)
        for (ActionId a = 0; a < abs.n_actions; ++a)
            out.push_row(simplify(abs.bounds(s, a), abs.unsafe, abs.unsafe_block), abs.meta[abs.row(s, a)].learned);
    return out;
}

// ---------------------------------------------------------------- io

namespace {

void put_double(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

} // namespace

void save_abstraction(const std::string& path, const UmdpAbstraction& abs) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::ParseError, "cannot write '" + path + "'");
    nlohmann::json head;
    head["n_states"] = abs.n_states;
    head["n_actions"] = abs.n_actions;
    head["unsafe_state"] = abs.unsafe;
    head["unsafe_block"] = abs.unsafe_block;
    head["mode"] = to_string(abs.mode);
    head["simplified"] = abs.simplified;
    head["block_of"] = abs.block_of;
    head["labels"] = abs.labels;
    head["ledger"] = {{"alpha", abs.ledger.alpha},     {"beta", abs.ledger.beta},
                      {"beta_c", abs.ledger.beta_c},   {"n_learn", abs.ledger.n_learn},
                      {"eps", abs.ledger.eps},         {"n_samples", abs.ledger.n_samples}};
    std::string text = head.dump();
    text.pop_back(); // reopen the object to stream entries
    text += ",\"entries\":[";
    f << text;
    std::string buf;
    for (StateId s = 0; s < abs.n_states; ++s)
        for (ActionId a = 0; a < abs.n_actions; ++a) {
            buf.clear();
            if (s != 0 || a != 0) buf += ',';
            BoundsView b = abs.bounds(s, a);
            buf += "{\"s\":" + std::to_string(s) + ",\"a\":" + std::to_string(a) + ",\"state_bounds\":[";
            for (std::size_t k = 0; k < b.states.size(); ++k) {
                if (k) buf += ',';
                buf += '[' + std::to_string(b.states[k].state) + ',';
                put_double(buf, b.states[k].lower);
                buf += ',';
                put_double(buf, b.states[k].upper);
                buf += ']';
            }
            buf += "],\"block_bounds\":[";
            for (std::size_t k = 0; k < b.blocks.size(); ++k) {
                if (k) buf += ',';
                buf += '[' + std::to_string(b.blocks[k].block) + ',';
                put_double(buf, b.blocks[k].lower);
                buf += ',';
                put_double(buf, b.blocks[k].upper);
                buf += ']';
            }
            buf += "],\"eps_c\":";
            put_double(buf, b.eps_c);
            buf += ",\"mass_budget\":";
            buf += b.mass_budget ? "true" : "false";
            buf += ",\"background_upper\":";
            put_double(buf, b.background_upper);
            buf += ",\"learned\":" + std::to_string(abs.meta[abs.row(s, a)].learned);
            buf += '}';
            f << buf;
        }
    f << "]}\n";
}

namespace {

struct LoadedRow {
    StateId s = 0;
    ActionId a = 0;
    TransitionBounds t;
    std::uint32_t learned = 0;
};

LoadedRow parse_entry(const nlohmann::json& e) {
    LoadedRow r;
    r.s = e.at("s").get<StateId>();
    r.a = e.at("a").get<ActionId>();
    for (const auto& x : e.at("state_bounds"))
        r.t.states.push_back({x.at(0).get<StateId>(), x.at(1).get<double>(), x.at(2).get<double>(), -1});
    for (const auto& x : e.at("block_bounds"))
        r.t.blocks.push_back({x.at(0).get<BlockId>(), x.at(1).get<double>(), x.at(2).get<double>()});
    r.t.eps_c = e.value("eps_c", 0.0);
    r.t.mass_budget = e.value("mass_budget", false);
    r.t.background_upper = e.value("background_upper", 0.0);
    r.learned = e.value("learned", 0u);
    return r;
}

} // namespace

UmdpAbstraction load_abstraction(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::ParseError, "cannot open abstraction '" + path + "'");
    // Entries are converted as soon as each one is parsed and dropped from the
    // document, so large abstractions never exist as a full JSON tree.
    std::vector<LoadedRow> rows;
    std::string top_key;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f, [&](int depth, nlohmann::json::parse_event_t ev, nlohmann::json& parsed) {
            if (depth == 1 && ev == nlohmann::json::parse_event_t::key) top_key = parsed.get<std::string>();
            if (depth == 2 && ev == nlohmann::json::parse_event_t::object_end && top_key == "entries") {
                rows.push_back(parse_entry(parsed));
                return false;
            }
            return true;
        });
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
    try {
        UmdpAbstraction abs;
        abs.n_states = j.at("n_states").get<StateId>();
        abs.n_actions = j.at("n_actions").get<ActionId>();
        abs.unsafe = j.value("unsafe_state", abs.n_states - 1);
        abs.unsafe_block = j.at("unsafe_block").get<BlockId>();
        abs.mode = parse_mode(j.value("mode", std::string("full")));
        abs.simplified = j.value("simplified", false);
        abs.block_of = j.at("block_of").get<std::vector<BlockId>>();
        abs.labels = j.at("labels").get<std::vector<std::vector<std::string>>>();
        const auto& l = j.at("ledger");
        abs.ledger.alpha = l.at("alpha");
        abs.ledger.beta = l.at("beta");
        abs.ledger.beta_c = l.at("beta_c");
        abs.ledger.n_learn = l.at("n_learn");
        abs.ledger.eps = l.at("eps");
        abs.ledger.n_samples = l.at("n_samples");
        if (!j.contains("entries")) throw Error(ErrorKind::ParseError, path + ": missing entries");
        if (rows.size() != static_cast<std::size_t>(abs.n_states) * abs.n_actions)
            throw Error(ErrorKind::ParseError, path + ": expected one entry per (s, a)");
        std::size_t k = 0;
        for (StateId s = 0; s < abs.n_states; ++s)
            for (ActionId a = 0; a < abs.n_actions; ++a, ++k) {
                LoadedRow& r = rows[k];
                if (r.s != s || r.a != a) throw Error(ErrorKind::ParseError, path + ": entries must be ordered by (s, a)");
                r.t.link_blocks(abs.block_of);
                abs.push_row(r.t, r.learned);
                r.t = {};
            }
        return abs;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
}

} // namespace umdp
