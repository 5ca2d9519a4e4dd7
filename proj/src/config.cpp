#include "umdp/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "umdp/error.hpp"

namespace umdp {

// Defined in the generated presets source.
const std::vector<std::pair<std::string, std::string>>& embedded_presets();

namespace {

using nlohmann::json;

const std::map<std::string, std::set<std::string>> kKeys = {
    {"", {"name", "preset", "model", "partition", "noise", "spec", "synthesis", "simulation", "output"}},
    {"model", {"kind", "params"}},
    {"partition", {"safe_box", "cells_per_dim", "block_shape", "periodic", "regions"}},
    {"noise",
     {"samples", "n_samples", "truth", "eps_c", "beta_c", "alpha", "beta", "clusters", "support_center", "seed"}},
    {"spec", {"dfa", "horizon"}},
    {"synthesis", {"mode", "adversary", "tol", "max_iters", "bounded_steps", "objective"}},
    {"simulation", {"runs", "sweep_cells", "trajectories", "max_steps", "x0", "seed"}},
};

class Reader {
public:
    Reader(const json& doc, const std::vector<ConfigSource>& sources) : doc_(doc), sources_(sources) {}

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        throw Error(ErrorKind::ConfigError, where(key) + key + ": " + msg);
    }

    const json* find(const std::string& key) const {
        const json* cur = &doc_;
        std::size_t pos = 0;
        while (pos <= key.size()) {
            std::size_t dot = key.find('.', pos);
            std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
            if (!cur->is_object() || !cur->contains(part)) return nullptr;
            cur = &(*cur)[part];
            if (dot == std::string::npos) break;
            pos = dot + 1;
        }
        return cur;
    }

    bool has(const std::string& key) const {
        const json* j = find(key);
        return j && !j->is_null();
    }

    template <class T>
    T get(const std::string& key) const {
        const json* j = find(key);
        if (!j || j->is_null()) fail(key, "missing required key");
        try {
            return j->get<T>();
        } catch (const json::exception&) {
            fail(key, "unexpected value " + j->dump());
        }
    }

    template <class T>
    T get(const std::string& key, T fallback) const {
        return has(key) ? get<T>(key) : fallback;
    }

    double positive(const std::string& key, double fallback) const {
        double v = get<double>(key, fallback);
        if (!(v > 0.0) || !std::isfinite(v)) fail(key, "must be positive");
        return v;
    }

    double probability(const std::string& key, double fallback) const {
        double v = get<double>(key, fallback);
        if (!(v > 0.0 && v < 1.0)) fail(key, "must lie in (0, 1)");
        return v;
    }

private:
    std::string where(const std::string& key) const {
        for (auto it = sources_.rbegin(); it != sources_.rend(); ++it) {
            int line = key_line(it->text, key);
            if (line > 0) return it->name + ":" + std::to_string(line) + ": ";
        }
        return "";
    }

    const json& doc_;
    const std::vector<ConfigSource>& sources_;
};

void check_keys(const Reader& r, const json& doc) {
    for (const auto& [section, allowed] : kKeys) {
        const json* j = section.empty() ? &doc : r.find(section);
        if (!j || j->is_null()) continue;
        if (!j->is_object()) r.fail(section, "expected an object");
        for (const auto& item : j->items())
            if (!allowed.count(item.key())) r.fail(section.empty() ? item.key() : section + "." + item.key(), "unknown key");
    }
}

json parse_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // Convert the byte offset into a line number.
        std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        int line = 1;
        for (std::size_t i = 0; i + 1 < upto; ++i) line += text[i] == '\n';
        throw Error(ErrorKind::ConfigError, origin + ":" + std::to_string(line) + ": invalid JSON (" + e.what() + ")");
    }
}

} // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& p : embedded_presets()) out.push_back(p.first);
    return out;
}

const std::string& preset_text(const std::string& name) {
    for (const auto& p : embedded_presets())
        if (p.first == name) return p.second;
    std::string known;
    for (const auto& p : embedded_presets()) known += (known.empty() ? "" : ", ") + p.first;
    throw Error(ErrorKind::ConfigError, "unknown preset '" + name + "' (known: " + known + ")");
}

void merge_json(json& base, const json& patch) {
    if (!patch.is_object() || !base.is_object()) {
        base = patch;
        return;
    }
    for (const auto& item : patch.items()) {
        if (base.contains(item.key()) && base[item.key()].is_object() && item.value().is_object())
            merge_json(base[item.key()], item.value());
        else
            base[item.key()] = item.value();
    }
}

int key_line(const std::string& text, const std::string& dotted_key) {
    std::size_t pos = 0, start = 0;
    while (true) {
        std::size_t dot = dotted_key.find('.', start);
        std::string part = dotted_key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        std::size_t hit = text.find('"' + part + '"', pos);
        if (hit == std::string::npos) return 0;
        pos = hit + part.size() + 2;
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    int line = 1;
    for (std::size_t i = 0; i < pos && i < text.size(); ++i) line += text[i] == '\n';
    return line;
}

std::string content_hash(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void ConfigBuilder::add_preset(const std::string& name) {
    const std::string& text = preset_text(name);
    merge_json(doc_, parse_text(text, "preset " + name));
    sources_.push_back({"preset " + name, text});
}

void ConfigBuilder::add_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    add_text(ss.str(), path);
}

void ConfigBuilder::add_text(const std::string& text, const std::string& origin) {
    json j = parse_text(text, origin);
    if (!j.is_object()) throw Error(ErrorKind::ConfigError, origin + ":1: config must be a JSON object");
    // A config may start from a preset and override some keys.
    if (j.contains("preset")) {
        if (!j["preset"].is_string()) throw Error(ErrorKind::ConfigError, origin + ":" +
                                                  std::to_string(key_line(text, "preset")) + ": preset must be a string");
        add_preset(j["preset"].get<std::string>());
    }
    merge_json(doc_, j);
    sources_.push_back({origin, text});
}

void ConfigBuilder::set(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw Error(ErrorKind::ConfigError, "--set expects key.path=value, got '" + assignment + "'");
    std::string key = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    set(key, std::move(value));
}

void ConfigBuilder::set(const std::string& dotted_key, json value) {
    json patch = json::object();
    json* cur = &patch;
    std::size_t start = 0;
    while (true) {
        std::size_t dot = dotted_key.find('.', start);
        std::string part = dotted_key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (dot == std::string::npos) {
            (*cur)[part] = value;
            break;
        }
        (*cur)[part] = json::object();
        cur = &(*cur)[part];
        start = dot + 1;
    }
    merge_json(doc_, patch);
    sources_.push_back({"--set " + dotted_key, patch.dump(2)});
}

RunConfig ConfigBuilder::build() const {
    Reader r(doc_, sources_);
    check_keys(r, doc_);
    RunConfig c;
    c.merged = doc_;
    c.name = r.get<std::string>("name", "run");

    c.model_kind = r.get<std::string>("model.kind");
    if (r.has("model.params")) c.model_params = *r.find("model.params");

    Vec lo = r.get<Vec>("partition.safe_box.lower"), hi = r.get<Vec>("partition.safe_box.upper");
    if (lo.size() != hi.size() || lo.empty()) r.fail("partition.safe_box", "lower and upper must have equal, nonzero length");
    for (std::size_t d = 0; d < lo.size(); ++d)
        if (!(lo[d] < hi[d])) r.fail("partition.safe_box", "lower must be below upper in every dimension");
    c.safe_box = AxisBox(lo, hi);
    const std::size_t n = lo.size();
    c.cells_per_dim = r.get<std::vector<int>>("partition.cells_per_dim");
    if (c.cells_per_dim.size() != n) r.fail("partition.cells_per_dim", "needs one entry per dimension");
    for (int k : c.cells_per_dim)
        if (k < 1) r.fail("partition.cells_per_dim", "entries must be >= 1");
    c.block_shape = r.get<std::vector<int>>("partition.block_shape", std::vector<int>(n, 1));
    if (c.block_shape.size() != n) r.fail("partition.block_shape", "needs one entry per dimension");
    c.periodic = r.get<std::vector<bool>>("partition.periodic", std::vector<bool>(n, false));
    if (c.periodic.size() != n) r.fail("partition.periodic", "needs one entry per dimension");
    if (r.has("partition.regions")) {
        const json& regions = *r.find("partition.regions");
        if (!regions.is_array()) r.fail("partition.regions", "expected an array");
        for (const auto& reg : regions) {
            try {
                Vec rl = reg.at("lower").get<Vec>(), ru = reg.at("upper").get<Vec>();
                if (rl.size() != n || ru.size() != n) r.fail("partition.regions", "region dimension mismatch");
                c.regions.push_back({AxisBox(rl, ru), reg.at("labels").get<std::vector<std::string>>()});
            } catch (const json::exception& e) {
                r.fail("partition.regions", std::string("malformed region: ") + e.what());
            }
        }
    }

    c.samples_path = r.get<std::string>("noise.samples", "");
    c.n_samples = r.get<std::size_t>("noise.n_samples", 10000);
    if (c.samples_path.empty() && c.n_samples == 0) r.fail("noise.n_samples", "must be positive");
    if (r.has("noise.truth")) {
        c.truth.mean = r.get<Vec>("noise.truth.mean");
        c.truth.stddev = r.get<Vec>("noise.truth.stddev");
        if (c.truth.stddev.size() != c.truth.mean.size()) r.fail("noise.truth.stddev", "must match the mean's length");
        std::string t = r.get<std::string>("noise.truth.truncation", "none");
        if (t == "none") {
            c.truth.truncation = NoiseDistribution::Truncation::None;
        } else if (t == "box") {
            c.truth.truncation = NoiseDistribution::Truncation::Box;
            c.truth.box_lower = r.get<Vec>("noise.truth.lower");
            c.truth.box_upper = r.get<Vec>("noise.truth.upper");
        } else if (t == "ball") {
            c.truth.truncation = NoiseDistribution::Truncation::Ball;
            c.truth.ball_radius = r.positive("noise.truth.radius", 1.0);
        } else {
            r.fail("noise.truth.truncation", "expected none, box or ball");
        }
    } else if (c.samples_path.empty()) {
        r.fail("noise.truth", "needed when noise.samples is not given");
    }
    if (r.has("noise.eps_c")) {
        const json& e = *r.find("noise.eps_c");
        if (e.is_string() && e.get<std::string>() == "auto") {
            c.eps_c.reset();
        } else if (e.is_number()) {
            c.eps_c = r.probability("noise.eps_c", 0.5);
        } else {
            r.fail("noise.eps_c", "expected a number in (0, 1) or \"auto\"");
        }
    }
    c.beta_c = r.probability("noise.beta_c", 0.001);
    c.alpha = r.probability("noise.alpha", 0.01);
    if (!(c.alpha > c.beta_c)) r.fail("noise.alpha", "must exceed noise.beta_c");
    if (r.has("noise.beta")) c.beta = r.probability("noise.beta", 0.5);
    c.clusters = r.get<std::size_t>("noise.clusters", 40);
    if (c.clusters == 0) r.fail("noise.clusters", "must be positive");
    c.support_center = r.get<Vec>("noise.support_center", {});
    c.noise_seed = r.get<std::uint64_t>("noise.seed", 0);

    c.dfa = r.get<std::string>("spec.dfa", "phi1");
    c.horizon = r.get<int>("spec.horizon", 15);
    if (c.horizon < 1) r.fail("spec.horizon", "must be >= 1");

    try {
        c.mode = parse_mode(r.get<std::string>("synthesis.mode", "full"));
    } catch (const Error&) {
        r.fail("synthesis.mode", "expected full, support-only-imdp or naive-imdp");
    }
    std::string adv = r.get<std::string>("synthesis.adversary", "two-layer");
    if (adv == "two-layer" || adv == "alg1") c.adversary = AdversaryKind::TwoLayer;
    else if (adv == "lp") c.adversary = AdversaryKind::Lp;
    else r.fail("synthesis.adversary", "expected two-layer or lp");
    c.tol = r.positive("synthesis.tol", 1e-6);
    c.max_iters = r.get<std::size_t>("synthesis.max_iters", 10000);
    if (c.max_iters == 0) r.fail("synthesis.max_iters", "must be positive");
    if (r.has("synthesis.bounded_steps")) c.bounded_steps = r.get<std::size_t>("synthesis.bounded_steps");
    std::string obj = r.get<std::string>("synthesis.objective", "reach");
    if (obj == "reach") c.objective = Objective::Reach;
    else if (obj == "invariance") c.objective = Objective::Invariance;
    else r.fail("synthesis.objective", "expected reach or invariance");
    if (c.objective == Objective::Invariance && !c.bounded_steps)
        r.fail("synthesis.objective", "invariance needs synthesis.bounded_steps");

    c.runs = r.get<std::size_t>("simulation.runs", 1000);
    c.sweep_cells = r.get<std::size_t>("simulation.sweep_cells", 50);
    c.trajectories = r.get<std::size_t>("simulation.trajectories", 10);
    if (r.has("simulation.max_steps")) {
        c.max_steps = r.get<std::size_t>("simulation.max_steps");
        if (*c.max_steps == 0) r.fail("simulation.max_steps", "must be >= 1");
    }
    c.x0 = r.get<Vec>("simulation.x0", c.safe_box.center());
    if (c.x0.size() != n) r.fail("simulation.x0", "needs one entry per dimension");
    c.sim_seed = r.get<std::uint64_t>("simulation.seed", 0);

    c.output = r.get<std::string>("output", "out");
    return c;
}

} // namespace umdp
