#pragma once

#include <algorithm>
#include <functional>
#include <random>
#include <vector>

#include "smg/game.hpp"

namespace smg::testing {

struct RandomGameShape {
    std::size_t min_states = 2;
    std::size_t max_states = 6;
    std::size_t max_choices = 3;
    std::size_t max_branches = 3;
    std::size_t players = 2;
};

// Probabilities are drawn from a small grid so that branch lists are
// reproducible across platforms; the last branch takes the remainder.
inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t k) {
    std::uniform_int_distribution<int> w(1, 9);
    std::vector<int> weights(k);
    int total = 0;
    for (auto& x : weights) total += (x = w(rng));
    std::vector<double> p(k);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < k; ++i) acc += (p[i] = static_cast<double>(weights[i]) / total);
    p[k - 1] = 1.0 - acc;
    return p;
}

inline void add_random_choices(StochasticGame& g, StateIndex s, const std::vector<StateIndex>& successors,
                               std::mt19937_64& rng, const RandomGameShape& shape) {
    std::uniform_int_distribution<std::size_t> nc(1, shape.max_choices);
    std::uniform_int_distribution<std::size_t> nb(1, std::min(shape.max_branches, successors.size()));
    auto choices = nc(rng);
    for (std::size_t c = 0; c < choices; ++c) {
        auto pool = successors;
        std::shuffle(pool.begin(), pool.end(), rng);
        pool.resize(nb(rng));
        auto probs = random_distribution(rng, pool.size());
        Choice ch;
        ch.action = c;
        for (std::size_t b = 0; b < pool.size(); ++b) ch.branches.push_back({pool[b], probs[b]});
        g.states[s].choices.push_back(std::move(ch));
    }
}

inline StochasticGame empty_game(std::size_t n, std::size_t players, std::size_t actions) {
    StochasticGame g;
    for (std::size_t p = 0; p < players; ++p) g.players.push_back("p" + std::to_string(p + 1));
    g.variables = {"s"};
    for (std::size_t a = 0; a < actions; ++a) g.action_labels.push_back("a" + std::to_string(a));
    g.states.resize(n);
    for (StateIndex s = 0; s < n; ++s) g.states[s].valuation = {static_cast<std::int64_t>(s)};
    return g;
}

inline StochasticGame random_game(std::mt19937_64& rng, const RandomGameShape& shape = {}) {
    std::uniform_int_distribution<std::size_t> ns(shape.min_states, shape.max_states);
    const auto n = ns(rng);
    auto g = empty_game(n, shape.players, shape.max_choices);
    std::uniform_int_distribution<std::size_t> owner(0, shape.players - 1);
    std::vector<StateIndex> all(n);
    for (StateIndex s = 0; s < n; ++s) all[s] = s;
    for (StateIndex s = 0; s < n; ++s) {
        g.states[s].owner = owner(rng);
        add_random_choices(g, s, all, rng, shape);
    }
    return g;
}

/// Game whose states split into transient states and two closed groups with
/// no transitions between them, so there are at least two disjoint end
/// components.
inline StochasticGame random_multichain_game(std::mt19937_64& rng, const RandomGameShape& shape = {}) {
    std::uniform_int_distribution<std::size_t> ns(std::max<std::size_t>(shape.min_states, 2), shape.max_states);
    const auto n = ns(rng);
    auto g = empty_game(n, shape.players, shape.max_choices);
    std::uniform_int_distribution<std::size_t> owner(0, shape.players - 1);
    // group A = {0}, group B = {1}, rest split at random
    std::vector<int> group(n);
    group[0] = 0;
    group[1] = 1;
    std::uniform_int_distribution<int> pick(0, 2);
    for (StateIndex s = 2; s < n; ++s) group[s] = pick(rng);
    for (StateIndex s = 0; s < n; ++s) {
        g.states[s].owner = owner(rng);
        std::vector<StateIndex> succ;
        for (StateIndex t = 0; t < n; ++t)
            if (group[s] == 2 || group[t] == group[s]) succ.push_back(t);
        add_random_choices(g, s, succ, rng, shape);
    }
    return g;
}

inline std::vector<bool> random_set(std::mt19937_64& rng, std::size_t n, double density = 0.4) {
    std::bernoulli_distribution in(density);
    std::vector<bool> out(n);
    for (std::size_t s = 0; s < n; ++s) out[s] = in(rng);
    return out;
}

inline RewardStructure random_rewards(std::mt19937_64& rng, const StochasticGame& g) {
    std::uniform_int_distribution<int> r(0, 10);
    RewardStructure rs;
    for (StateIndex s = 0; s < g.num_states(); ++s) {
        rs.state_rewards.push_back(r(rng));
        std::vector<double> row;
        for (std::size_t c = 0; c < g.states[s].choices.size(); ++c) row.push_back(r(rng) / 2.0);
        rs.action_rewards.push_back(std::move(row));
    }
    return rs;
}

/// Number of maximal end components, by repeatedly removing choices that
/// leave their strongly connected component.
inline std::size_t count_end_components(const StochasticGame& g) {
    const auto n = g.num_states();
    std::vector<std::vector<bool>> keep(n);
    std::vector<bool> alive(n, true);
    for (StateIndex s = 0; s < n; ++s) keep[s].assign(g.states[s].choices.size(), true);
    std::vector<std::size_t> comp(n);
    while (true) {
        // SCCs of the graph restricted to kept choices (Kosaraju)
        std::vector<std::vector<StateIndex>> fwd(n), bwd(n);
        for (StateIndex s = 0; s < n; ++s)
            if (alive[s])
                for (std::size_t c = 0; c < keep[s].size(); ++c)
                    if (keep[s][c])
                        for (const auto& b : g.states[s].choices[c].branches) {
                            fwd[s].push_back(b.target);
                            bwd[b.target].push_back(s);
                        }
        std::vector<bool> seen(n, false);
        std::vector<StateIndex> order;
        std::function<void(StateIndex)> dfs1 = [&](StateIndex v) {
            seen[v] = true;
            for (auto w : fwd[v])
                if (!seen[w]) dfs1(w);
            order.push_back(v);
        };
        for (StateIndex s = 0; s < n; ++s)
            if (alive[s] && !seen[s]) dfs1(s);
        std::fill(seen.begin(), seen.end(), false);
        std::size_t label = 0;
        std::function<void(StateIndex)> dfs2 = [&](StateIndex v) {
            seen[v] = true;
            comp[v] = label;
            for (auto w : bwd[v])
                if (!seen[w] && alive[w]) dfs2(w);
        };
        for (auto it = order.rbegin(); it != order.rend(); ++it)
            if (!seen[*it]) {
                dfs2(*it);
                ++label;
            }
        bool changed = false;
        for (StateIndex s = 0; s < n; ++s) {
            if (!alive[s]) continue;
            bool any = false;
            for (std::size_t c = 0; c < keep[s].size(); ++c) {
                if (!keep[s][c]) continue;
                for (const auto& b : g.states[s].choices[c].branches)
                    if (!alive[b.target] || comp[b.target] != comp[s]) {
                        keep[s][c] = false;
                        changed = true;
                        break;
                    }
                any = any || keep[s][c];
            }
            if (!any) {
                alive[s] = false;
                changed = true;
            }
        }
        if (!changed) break;
    }
    std::vector<bool> counted(n, false);
    std::size_t count = 0;
    for (StateIndex s = 0; s < n; ++s)
        if (alive[s] && !counted[comp[s]]) {
            counted[comp[s]] = true;
            ++count;
        }
    return count;
}

}  // namespace smg::testing
