#include "umdp/dfa.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "umdp/error.hpp"

namespace umdp {

namespace {

constexpr std::size_t kMaxAp = 20;

bool matches(const Dfa::Edge& e, std::uint32_t letter, const std::vector<std::string>& ap) {
    for (const auto& [prop, value] : e.label) {
        auto it = std::find(ap.begin(), ap.end(), prop);
        const bool holds = (letter >> (it - ap.begin())) & 1u;
        if (holds != value) return false;
    }
    return true;
}

} // namespace

Dfa::Dfa(std::vector<std::string> ap, DfaState n_states, DfaState initial, std::vector<DfaState> accepting,
         const std::vector<Edge>& edges)
    : ap_(std::move(ap)), n_(n_states), initial_(initial), accepting_(n_states > 0 ? n_states : 0, 0) {
    if (n_ < 1) throw Error(ErrorKind::InvalidArgument, "DFA needs at least one state");
    if (ap_.size() > kMaxAp) throw Error(ErrorKind::InvalidArgument, "DFA alphabet limited to 20 propositions");
    for (std::size_t i = 0; i < ap_.size(); ++i)
        for (std::size_t j = i + 1; j < ap_.size(); ++j)
            if (ap_[i] == ap_[j]) throw Error(ErrorKind::InvalidArgument, "duplicate proposition '" + ap_[i] + "'");
    auto check_state = [&](DfaState z, const char* what) {
        if (z < 0 || z >= n_) throw Error(ErrorKind::InvalidArgument, std::string("DFA ") + what + " state out of range");
    };
    check_state(initial_, "initial");
    for (DfaState z : accepting) {
        check_state(z, "accepting");
        accepting_[z] = 1;
    }
    for (const auto& e : edges) {
        check_state(e.from, "edge source");
        check_state(e.to, "edge target");
        for (const auto& lit : e.label)
            if (std::find(ap_.begin(), ap_.end(), lit.first) == ap_.end())
                throw Error(ErrorKind::UnknownProposition, "edge label uses '" + lit.first + "' outside the alphabet");
    }

    n_letters_ = 1u << ap_.size();
    table_.assign(static_cast<std::size_t>(n_) * n_letters_, -1);
    for (DfaState z = 0; z < n_; ++z) {
        DfaState fallback = -1;
        for (const auto& e : edges) {
            if (e.from != z || !e.is_else) continue;
            if (fallback >= 0 && fallback != e.to)
                throw Error(ErrorKind::NondeterministicEdge, "state " + std::to_string(z) + " has conflicting else edges");
            fallback = e.to;
        }
        for (std::uint32_t l = 0; l < n_letters_; ++l) {
            DfaState target = -1;
            for (const auto& e : edges) {
                if (e.from != z || e.is_else || !matches(e, l, ap_)) continue;
                if (target >= 0 && target != e.to) {
                    std::ostringstream m;
                    m << "state " << z << " has overlapping edges to " << target << " and " << e.to << " on {";
                    bool first = true;
                    for (std::size_t i = 0; i < ap_.size(); ++i)
                        if ((l >> i) & 1u) {
                            m << (first ? "" : ", ") << ap_[i];
                            first = false;
                        }
                    m << "}";
                    throw Error(ErrorKind::NondeterministicEdge, m.str());
                }
                target = e.to;
            }
            if (target < 0) target = fallback;
            if (target < 0)
                throw Error(ErrorKind::IncompleteTransition,
                            "state " + std::to_string(z) + " has no edge for letter " + std::to_string(l));
            table_[static_cast<std::size_t>(z) * n_letters_ + l] = target;
        }
    }
}

std::uint32_t Dfa::letter(const std::vector<std::string>& props) const {
    std::uint32_t l = 0;
    for (const auto& p : props) {
        auto it = std::find(ap_.begin(), ap_.end(), p);
        if (it == ap_.end()) throw Error(ErrorKind::UnknownProposition, "proposition '" + p + "' not in the DFA alphabet");
        l |= 1u << (it - ap_.begin());
    }
    return l;
}

Dfa parse_dfa(const std::string& text, const std::string& origin) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ParseError, origin + ": " + e.what());
    }
    try {
        auto ap = j.at("ap").get<std::vector<std::string>>();
        auto n = j.at("states").get<DfaState>();
        auto initial = j.at("initial").get<DfaState>();
        auto accepting = j.at("accepting").get<std::vector<DfaState>>();
        std::vector<Dfa::Edge> edges;
        for (const auto& e : j.at("edges")) {
            Dfa::Edge edge;
            edge.from = e.at("from").get<DfaState>();
            edge.to = e.at("to").get<DfaState>();
            const auto& label = e.at("label");
            if (label.is_string()) {
                if (label.get<std::string>() != "else")
                    throw Error(ErrorKind::ParseError, origin + ": edge label must be an object or \"else\"");
                edge.is_else = true;
            } else {
                for (auto it = label.begin(); it != label.end(); ++it) edge.label.emplace_back(it.key(), it.value().get<bool>());
            }
            edges.push_back(std::move(edge));
        }
        return Dfa(std::move(ap), n, initial, std::move(accepting), edges);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, origin + ": " + e.what());
    }
}

Dfa load_dfa(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::ParseError, "cannot open DFA file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_dfa(ss.str(), path);
}

std::string dfa_to_json(const Dfa& d) {
    nlohmann::json j;
    j["ap"] = d.ap();
    j["states"] = d.n_states();
    j["initial"] = d.initial();
    std::vector<DfaState> acc;
    for (DfaState z = 0; z < d.n_states(); ++z)
        if (d.accepting(z)) acc.push_back(z);
    j["accepting"] = acc;
    j["edges"] = nlohmann::json::array();
    const std::uint32_t n_letters = 1u << d.ap().size();
    for (DfaState z = 0; z < d.n_states(); ++z)
        for (std::uint32_t l = 0; l < n_letters; ++l) {
            nlohmann::json label = nlohmann::json::object();
            for (std::size_t i = 0; i < d.ap().size(); ++i) label[d.ap()[i]] = static_cast<bool>((l >> i) & 1u);
            j["edges"].push_back({{"from", z}, {"label", label}, {"to", d.next(z, l)}});
        }
    return j.dump(2);
}

DfaRun dfa_run(const Dfa& d, const std::vector<std::vector<std::string>>& trace) {
    DfaRun r{d.initial(), d.accepting(d.initial())};
    for (const auto& props : trace) {
        if (r.accepted) {
            d.letter(props); // still validate the remaining letters
            continue;
        }
        r.final_state = d.next(r.final_state, props);
        r.accepted = d.accepting(r.final_state);
    }
    return r;
}

namespace {

Dfa::Edge edge(DfaState from, std::vector<std::pair<std::string, bool>> label, DfaState to) {
    return {from, std::move(label), false, to};
}
Dfa::Edge otherwise(DfaState from, DfaState to) { return {from, {}, true, to}; }

} // namespace

Dfa dfa_reach_avoid() {
    // 0: try, 1: accept, 2: trap
    return Dfa({"goal", kUnsafeProp}, 3, 0, {1},
               {edge(0, {{kUnsafeProp, true}}, 2), edge(0, {{kUnsafeProp, false}, {"goal", true}}, 1), otherwise(0, 0),
                otherwise(1, 1), otherwise(2, 2)});
}

Dfa dfa_water_carpet_charge() {
    // 0: dry, 1: wet (must reach carpet before charge), 2: accept, 3: trap
    const std::string u = kUnsafeProp;
    return Dfa({"water", "carpet", "charge", u}, 4, 0, {2},
               {edge(0, {{u, true}}, 3),
                edge(0, {{u, false}, {"charge", true}, {"water", true}, {"carpet", false}}, 3),
                edge(0, {{u, false}, {"charge", true}, {"water", false}}, 2),
                edge(0, {{u, false}, {"charge", true}, {"carpet", true}}, 2),
                edge(0, {{u, false}, {"charge", false}, {"water", true}, {"carpet", false}}, 1),
                otherwise(0, 0),
                edge(1, {{u, true}}, 3),
                edge(1, {{u, false}, {"carpet", true}, {"charge", true}}, 2),
                edge(1, {{u, false}, {"carpet", true}, {"charge", false}}, 0),
                edge(1, {{u, false}, {"carpet", false}, {"charge", true}}, 3),
                otherwise(1, 1),
                otherwise(2, 2),
                otherwise(3, 3)});
}

Dfa dfa_bounded_safety(int horizon) {
    if (horizon < 1) throw Error(ErrorKind::InvalidArgument, "bounded safety horizon must be >= 1");
    // Counters 0..K, then accept = K + 1, trap = K + 2. The counter holds the
    // number of safe letters read; reading the safe letter at counter K accepts.
    const DfaState accept = horizon + 1, trap = horizon + 2;
    std::vector<Dfa::Edge> edges;
    for (DfaState k = 0; k <= horizon; ++k) {
        edges.push_back(edge(k, {{kUnsafeProp, true}}, trap));
        edges.push_back(otherwise(k, k == horizon ? accept : k + 1));
    }
    edges.push_back(otherwise(accept, accept));
    edges.push_back(otherwise(trap, trap));
    return Dfa({kUnsafeProp}, horizon + 3, 0, {accept}, edges);
}

Dfa dfa_safety() {
    // 0: ok (accepting while safe), 1: trap
    return Dfa({kUnsafeProp}, 2, 0, {0}, {edge(0, {{kUnsafeProp, true}}, 1), otherwise(0, 0), otherwise(1, 1)});
}

Dfa dfa_trivial(std::vector<std::string> ap) { return Dfa(std::move(ap), 1, 0, {0}, {otherwise(0, 0)}); }

Dfa dfa_preset(const std::string& name, int horizon) {
    if (name == "phi1" || name == "reach-avoid") return dfa_reach_avoid();
    if (name == "phi2" || name == "water-carpet-charge") return dfa_water_carpet_charge();
    if (name == "phi3" || name == "bounded-safety") return dfa_bounded_safety(horizon);
    if (name == "safety") return dfa_safety();
    if (name == "true" || name == "trivial") return dfa_trivial();
    throw Error(ErrorKind::ConfigError, "unknown DFA preset '" + name + "'");
}

} // namespace umdp
