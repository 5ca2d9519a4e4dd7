#include "umdp/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "umdp/error.hpp"

namespace umdp {

namespace {

constexpr double kMassTol = 1e-9;

// Position of state s among the listed entries (sorted by state id), or -1.
std::ptrdiff_t find_listed(const BoundsView& b, StateId s) {
    auto it = std::lower_bound(b.states.begin(), b.states.end(), s,
                               [](const StateBound& e, StateId x) { return e.state < x; });
    if (it == b.states.end() || it->state != s) return -1;
    return it - b.states.begin();
}

} // namespace

double o_maximize_2layer(const BoundsView& b, std::span<const double> values, Direction dir, AdversaryWorkspace& ws,
                         Gamma* gamma_out, const BackgroundValues* background) {
    if (b.mass_budget) throw Error(ErrorKind::InvalidArgument, "simplify the mass budget away before O-maximization");
    const std::size_t n = b.states.size();
    const bool use_background = background != nullptr && b.background_upper > 0;

    // Value order over the listed states; ties by state id, reversed for Maximize.
    ws.order.resize(n);
    for (std::size_t k = 0; k < n; ++k) ws.order[k] = k;
    std::sort(ws.order.begin(), ws.order.end(), [&](std::size_t x, std::size_t y) {
        if (values[x] != values[y]) return values[x] < values[y];
        return b.states[x].state < b.states[y].state;
    });
    if (dir == Direction::Maximize) std::reverse(ws.order.begin(), ws.order.end());

    // Seed with the lower bounds.
    ws.gamma.resize(n);
    ws.block_mass.assign(b.blocks.size(), 0.0);
    double mass = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        ws.gamma[k] = b.states[k].lower;
        mass -= b.states[k].lower;
        if (b.states[k].block_slot >= 0) ws.block_mass[b.states[k].block_slot] += b.states[k].lower;
    }

    // Raise every block to its lower bound, cheapest members first.
    if (!b.blocks.empty()) {
        for (std::size_t k : ws.order) {
            const std::int32_t q = b.states[k].block_slot;
            if (q < 0) continue;
            const double deficit = b.blocks[q].lower - ws.block_mass[q];
            if (deficit <= 0) continue;
            const double add = std::min({b.states[k].upper - ws.gamma[k], deficit, std::max(mass, 0.0)});
            if (add <= 0) continue;
            ws.gamma[k] += add;
            ws.block_mass[q] += add;
            mass -= add;
        }
    }

    auto room = [&](std::size_t k) {
        double r = b.states[k].upper - ws.gamma[k];
        const std::int32_t q = b.states[k].block_slot;
        if (q >= 0) r = std::min(r, b.blocks[q].upper - ws.block_mass[q]);
        return r;
    };
    auto place = [&](std::size_t k) {
        const double add = std::min(room(k), mass);
        if (add <= 0) return;
        ws.gamma[k] += add;
        if (b.states[k].block_slot >= 0) ws.block_mass[b.states[k].block_slot] += add;
        mass -= add;
    };

    double objective = 0.0;
    if (gamma_out) gamma_out->clear();
    if (!use_background) {
        for (std::size_t k : ws.order) {
            if (mass <= 0) break;
            place(k);
        }
    } else {
        // Walk every state in value order; unlisted ones can take background_upper.
        const std::size_t total = background->order.size();
        for (std::size_t i = 0; i < total && mass > 0; ++i) {
            const StateId s = background->order[dir == Direction::Minimize ? i : total - 1 - i];
            const std::ptrdiff_t k = find_listed(b, s);
            if (k >= 0) {
                place(static_cast<std::size_t>(k));
            } else {
                const double add = std::min(b.background_upper, mass);
                mass -= add;
                objective += add * background->value[s];
                if (gamma_out) gamma_out->emplace_back(s, add);
            }
        }
    }
    if (mass > kMassTol) {
        std::ostringstream m;
        m << "O-maximization left mass " << mass << " unplaced";
        throw Error(ErrorKind::InfeasibleGamma, m.str());
    }
    for (std::size_t k = 0; k < n; ++k) objective += ws.gamma[k] * values[k];
    if (gamma_out) {
        for (std::size_t k = 0; k < n; ++k)
            if (ws.gamma[k] > 0) gamma_out->emplace_back(b.states[k].state, ws.gamma[k]);
        std::sort(gamma_out->begin(), gamma_out->end());
    }
    return objective;
}

double o_maximize_2layer(const BoundsView& b, std::span<const double> values, Direction dir, Gamma* gamma_out,
                         const BackgroundValues* background) {
    AdversaryWorkspace ws;
    return o_maximize_2layer(b, values, dir, ws, gamma_out, background);
}

ConstraintReport check_gamma(const BoundsView& b, const Gamma& gamma, StateId n_states, double tol) {
    ConstraintReport r;
    std::ostringstream m;
    auto violate = [&](double amount, const std::string& what) {
        if (amount > tol) {
            r.ok = false;
            m << what << " by " << amount << "; ";
        }
        r.worst = std::max(r.worst, amount);
    };
    std::vector<double> listed(b.states.size(), 0.0);
    std::vector<double> block(b.blocks.size(), 0.0);
    double total = 0.0, support = 0.0;
    for (const auto& [s, g] : gamma) {
        total += g;
        violate(-g, "negative mass at " + std::to_string(s));
        if (s < 0 || s >= n_states) violate(std::abs(g), "mass on unknown state " + std::to_string(s));
        std::ptrdiff_t k = find_listed(b, s);
        if (k >= 0) {
            listed[k] += g;
            support += g;
        } else if (b.mass_budget) {
            // states outside the support only draw on the eps_c budget
        } else {
            violate(g - b.background_upper, "unlisted state " + std::to_string(s) + " exceeds background bound");
        }
    }
    violate(std::abs(total - 1.0), "total mass differs from 1");
    for (std::size_t k = 0; k < b.states.size(); ++k) {
        const auto& e = b.states[k];
        violate(e.lower - listed[k], "state " + std::to_string(e.state) + " below lower bound");
        violate(listed[k] - e.upper, "state " + std::to_string(e.state) + " above upper bound");
        if (e.block_slot >= 0) block[e.block_slot] += listed[k];
    }
    for (std::size_t q = 0; q < b.blocks.size(); ++q) {
        violate(b.blocks[q].lower - block[q], "block " + std::to_string(b.blocks[q].block) + " below lower bound");
        violate(block[q] - b.blocks[q].upper, "block " + std::to_string(b.blocks[q].block) + " above upper bound");
    }
    if (b.mass_budget) violate(1.0 - b.eps_c - support, "support mass below 1 - eps_c");
    r.message = m.str();
    return r;
}

} // namespace umdp
