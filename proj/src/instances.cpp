#include "umdp/instances.hpp"

#include <algorithm>
#include <cmath>

namespace umdp {

TransitionBounds random_gamma(std::mt19937_64& rng, const RandomGammaOptions& opt) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const std::size_t n = std::max<std::size_t>(1, opt.n_post);

    // Witness: normalized exponentials, with some exact zeros.
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& x : w) {
        x = u01(rng) < 0.2 ? 0.0 : -std::log(1.0 - u01(rng));
        total += x;
    }
    if (total == 0.0) {
        w[0] = 1.0;
        total = 1.0;
    }
    for (auto& x : w) x /= total;

    TransitionBounds t;
    t.states.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double lo = u01(rng) < opt.p_zero_lower ? 0.0 : std::max(0.0, w[k] - opt.max_halfwidth * u01(rng));
        const double hi = std::min(1.0, w[k] + opt.max_halfwidth * u01(rng));
        t.states[k] = {opt.first_state + static_cast<StateId>(k), lo, hi, -1};
    }

    // Consecutive runs of states form the blocks.
    std::uniform_int_distribution<std::size_t> size_dist(1, std::max<std::size_t>(1, opt.max_block));
    for (std::size_t k = 0; k < n;) {
        if (u01(rng) < opt.p_unblocked) {
            ++k;
            continue;
        }
        const std::size_t len = std::min(size_dist(rng), n - k);
        double mass = 0.0;
        const auto slot = static_cast<std::int32_t>(t.blocks.size());
        for (std::size_t i = k; i < k + len; ++i) {
            mass += w[i];
            t.states[i].block_slot = slot;
        }
        const double lo = std::max(0.0, mass - opt.max_halfwidth * u01(rng) * 0.5);
        const double hi = std::min(1.0, mass + opt.max_halfwidth * u01(rng) * 0.5);
        t.blocks.push_back({static_cast<BlockId>(slot), lo, hi});
        k += len;
    }
    return t;
}

} // namespace umdp

namespace umdp {

UmdpAbstraction assemble_umdp(StateId n_states, ActionId n_actions, std::vector<std::vector<std::string>> labels,
                              const std::vector<TransitionBounds>& rows, std::vector<BlockId> block_of) {
    UmdpAbstraction abs;
    abs.n_states = n_states;
    abs.n_actions = n_actions;
    abs.unsafe = n_states - 1;
    if (block_of.empty()) {
        block_of.resize(n_states);
        for (StateId s = 0; s < n_states; ++s) block_of[s] = s;
    }
    abs.unsafe_block = block_of[abs.unsafe];
    abs.block_of = std::move(block_of);
    labels.resize(n_states);
    auto& u = labels[abs.unsafe];
    if (std::find(u.begin(), u.end(), kUnsafeProp) == u.end()) u.push_back(kUnsafeProp);
    abs.labels = std::move(labels);
    abs.state_offset.push_back(0);
    abs.block_offset.push_back(0);
    for (const auto& r : rows) {
        TransitionBounds t = r;
        if (!t.blocks.empty()) t.link_blocks(abs.block_of);
        abs.push_row(t, static_cast<std::uint32_t>(t.states.size() + t.blocks.size()));
    }
    return abs;
}

UmdpAbstraction random_umdp(std::mt19937_64& rng, const RandomUmdpOptions& opt) {
    const StateId n = opt.n_cells + 1;
    std::vector<BlockId> block_of(n);
    for (StateId s = 0; s < opt.n_cells; ++s) block_of[s] = s / 2;
    block_of[opt.n_cells] = (opt.n_cells + 1) / 2;

    std::vector<std::vector<std::string>> labels(n);
    for (StateId s = 0; s < std::min(opt.n_goal, opt.n_cells); ++s) labels[s] = {"goal"};

    std::vector<StateId> all(n);
    for (StateId s = 0; s < n; ++s) all[s] = s;
    std::vector<TransitionBounds> rows;
    for (StateId s = 0; s < n; ++s)
        for (ActionId a = 0; a < opt.n_actions; ++a) {
            TransitionBounds t;
            if (s == opt.n_cells) {
                t.states = {{s, 1.0, 1.0, -1}};
                t.blocks = {{block_of[s], 1.0, 1.0}};
                rows.push_back(std::move(t));
                continue;
            }
            // Support: a random subset, sorted by id.
            std::shuffle(all.begin(), all.end(), rng);
            const std::size_t k =
                1 + std::uniform_int_distribution<std::size_t>(0, std::min<std::size_t>(opt.max_post, n) - 1)(rng);
            std::vector<StateId> post(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
            std::sort(post.begin(), post.end());

            RandomGammaOptions g;
            g.n_post = k;
            g.max_block = 1;
            TransitionBounds base = random_gamma(rng, g);
            for (std::size_t i = 0; i < k; ++i)
                t.states.push_back({post[i], base.states[i].lower, base.states[i].upper, -1});
            // Block bounds: sums of member bounds intersected with sums of the
            // per-state witness intervals, so the witness stays feasible.
            for (std::size_t i = 0; i < k;) {
                std::size_t j = i;
                double lo = 0.0, hi = 0.0, wlo = 0.0, whi = 0.0;
                while (j < k && block_of[post[j]] == block_of[post[i]]) {
                    lo += t.states[j].lower;
                    hi += t.states[j].upper;
                    wlo += base.blocks[j].lower;
                    whi += base.blocks[j].upper;
                    ++j;
                }
                t.blocks.push_back({block_of[post[i]], std::max(lo, wlo), std::min({1.0, hi, whi})});
                i = j;
            }
            if (opt.eps_c > 0.0) {
                t.mass_budget = true;
                t.eps_c = opt.eps_c;
            }
            rows.push_back(std::move(t));
        }
    return assemble_umdp(n, opt.n_actions, std::move(labels), rows, std::move(block_of));
}

} // namespace umdp
