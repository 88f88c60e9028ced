#include "smg/solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

namespace smg {

namespace {

// Sweeps below this size run on the calling thread.
constexpr std::size_t kParallelThreshold = 4096;

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t, std::size_t)>& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads <= 1 || n < kParallelThreshold) {
        body(0, n);
        return;
    }
    threads = std::min(threads, n);
    std::vector<std::jthread> pool;
    pool.reserve(threads - 1);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 1; t < threads; ++t) {
        std::size_t begin = t * chunk, end = std::min(n, begin + chunk);
        if (begin < end) pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
    body(0, std::min(n, chunk));
}

std::vector<bool> maximizing_states(const StochasticGame& game, const Coalition& coalition, Direction direction) {
    if (coalition.empty()) throw SolverError("empty coalition");
    std::vector<bool> out(game.num_states());
    for (StateIndex s = 0; s < game.num_states(); ++s)
        out[s] = coalition_role(game, coalition, s, direction) == Role::Maximizer;
    return out;
}

void check_size(const StochasticGame& game, const std::vector<bool>& set, const char* what) {
    if (set.size() != game.num_states())
        throw SolverError(std::string(what) + " has " + std::to_string(set.size()) + " entries for " +
                          std::to_string(game.num_states()) + " states");
}

double expected(const Choice& c, const std::vector<double>& v) {
    double sum = 0.0;
    for (const auto& b : c.branches) sum += b.probability * v[b.target];
    return sum;
}

// Index of the optimal entry of q; entries within `tol` of the optimum count
// as ties and resolve to the lowest action id (then the lowest choice index).
std::size_t argopt(const GameState& st, const std::vector<double>& q, bool maximize, double tol) {
    double best = q[0];
    for (std::size_t c = 1; c < q.size(); ++c) best = maximize ? std::max(best, q[c]) : std::min(best, q[c]);
    std::size_t pick = q.size();
    for (std::size_t c = 0; c < q.size(); ++c) {
        bool tie = maximize ? q[c] >= best - tol : q[c] <= best + tol;
        if (tie && (pick == q.size() || st.choices[c].action < st.choices[pick].action)) pick = c;
    }
    return pick;
}

StrategyProfile empty_profile(const StochasticGame& game) {
    StrategyProfile p;
    p.choice.assign(game.num_states(), std::nullopt);
    return p;
}

// Shared driver for finite-horizon objectives: `base` gives V_0 and `step`
// maps (state, expected successor value per choice) to Q values.
template <typename Pin>
SolveResult bounded_sweeps(const StochasticGame& game, const Coalition& coalition, Direction direction, std::size_t k,
                           const std::vector<double>& v0, Pin pinned, const SolverParams& params) {
    const auto n = game.num_states();
    const auto maxim = maximizing_states(game, coalition, direction);
    SolveResult res;
    std::vector<double> prev = v0, cur(n);
    res.q_values.resize(n);
    for (StateIndex s = 0; s < n; ++s) res.q_values[s].assign(game.states[s].choices.size(), 0.0);
    for (std::size_t j = 1; j <= k; ++j) {
        StrategyProfile step = empty_profile(game);
        parallel_for(n, params.threads, [&](std::size_t begin, std::size_t end) {
            for (StateIndex s = begin; s < end; ++s) {
                const auto& st = game.states[s];
                auto& q = res.q_values[s];
                for (std::size_t c = 0; c < st.choices.size(); ++c) {
                    auto fixed = pinned(s);
                    q[c] = fixed ? *fixed : expected(st.choices[c], prev);
                }
                auto pick = argopt(st, q, maxim[s], 0.0);
                cur[s] = q[pick];
                if (coalition.contains(st.owner)) step.choice[s] = pick;
            }
        });
        res.step_strategies.push_back(std::move(step));
        std::swap(prev, cur);
    }
    res.values = std::move(prev);
    res.strategy = res.step_strategies.empty() ? empty_profile(game) : res.step_strategies.back();
    res.iterations = k;
    return res;
}

}  // namespace

SolveResult solve_bounded_safety(const StochasticGame& game, const Coalition& coalition, const std::vector<bool>& safe,
                                 std::size_t k, Direction direction, const SolverParams& params) {
    check_size(game, safe, "safe set");
    if (k < 1) throw SolverError("bounded safety needs a horizon k >= 1");
    std::vector<double> v0(game.num_states());
    for (StateIndex s = 0; s < v0.size(); ++s) v0[s] = safe[s] ? 1.0 : 0.0;
    return bounded_sweeps(
        game, coalition, direction, k, v0,
        [&](StateIndex s) -> std::optional<double> {
            if (!safe[s]) return 0.0;
            return std::nullopt;
        },
        params);
}

SolveResult solve_bounded_until(const StochasticGame& game, const Coalition& coalition, const std::vector<bool>& phi1,
                                const std::vector<bool>& phi2, std::size_t k, Direction direction,
                                const SolverParams& params) {
    check_size(game, phi1, "left operand");
    check_size(game, phi2, "right operand");
    std::vector<double> v0(game.num_states());
    for (StateIndex s = 0; s < v0.size(); ++s) v0[s] = phi2[s] ? 1.0 : 0.0;
    auto pinned = [&](StateIndex s) -> std::optional<double> {
        if (phi2[s]) return 1.0;
        if (!phi1[s]) return 0.0;
        return std::nullopt;
    };
    if (k == 0) {
        SolveResult res;
        res.values = v0;
        res.q_values.resize(game.num_states());
        for (StateIndex s = 0; s < game.num_states(); ++s)
            res.q_values[s].assign(game.states[s].choices.size(), v0[s]);
        maximizing_states(game, coalition, direction);
        res.strategy = empty_profile(game);
        return res;
    }
    return bounded_sweeps(game, coalition, direction, k, v0, pinned, params);
}

SolveResult solve_next(const StochasticGame& game, const Coalition& coalition, const std::vector<bool>& phi,
                       Direction direction, const SolverParams& params) {
    check_size(game, phi, "operand");
    std::vector<double> v0(game.num_states());
    for (StateIndex s = 0; s < v0.size(); ++s) v0[s] = phi[s] ? 1.0 : 0.0;
    return bounded_sweeps(
        game, coalition, direction, 1, v0, [](StateIndex) -> std::optional<double> { return std::nullopt; }, params);
}

namespace {

// States from which the maximizer reaches phi2 with positive probability
// (paths stay in phi1 until then).
std::vector<bool> positive_reach(const StochasticGame& game, const std::vector<bool>& maxim,
                                 const std::vector<bool>& phi1, const std::vector<bool>& phi2,
                                 const std::vector<bool>& allowed) {
    const auto n = game.num_states();
    std::vector<bool> x(n, false);
    for (StateIndex s = 0; s < n; ++s) x[s] = phi2[s] && allowed[s];
    bool changed = true;
    while (changed) {
        changed = false;
        for (StateIndex s = 0; s < n; ++s) {
            if (x[s] || !phi1[s] || !allowed[s]) continue;
            const auto& st = game.states[s];
            auto hits = [&](const Choice& c) {
                bool inside = true, touches = false;
                for (const auto& b : c.branches) {
                    inside = inside && allowed[b.target];
                    touches = touches || x[b.target];
                }
                return inside && touches;
            };
            bool ok = maxim[s] ? std::any_of(st.choices.begin(), st.choices.end(), hits)
                               : std::all_of(st.choices.begin(), st.choices.end(), hits);
            if (ok) {
                x[s] = true;
                changed = true;
            }
        }
    }
    return x;
}

std::vector<bool> almost_sure_reach(const StochasticGame& game, const std::vector<bool>& maxim,
                                    const std::vector<bool>& phi1, const std::vector<bool>& phi2) {
    const auto n = game.num_states();
    std::vector<bool> y(n, true);
    while (true) {
        auto x = positive_reach(game, maxim, phi1, phi2, y);
        if (x == y) return y;
        y = std::move(x);
    }
}

}  // namespace

SolveResult solve_until(const StochasticGame& game, const Coalition& coalition, const std::vector<bool>& phi1,
                        const std::vector<bool>& phi2, Direction direction, const SolverParams& params) {
    check_size(game, phi1, "left operand");
    check_size(game, phi2, "right operand");
    const auto n = game.num_states();
    const auto maxim = maximizing_states(game, coalition, direction);

    const std::vector<bool> everything(n, true);
    const auto positive = positive_reach(game, maxim, phi1, phi2, everything);
    const auto sure = almost_sure_reach(game, maxim, phi1, phi2);

    std::vector<bool> unknown(n);
    std::vector<double> v(n, 0.0);
    for (StateIndex s = 0; s < n; ++s) {
        if (sure[s]) v[s] = 1.0;
        unknown[s] = positive[s] && !sure[s];
    }

    SolveResult res;
    res.converged = false;
    std::vector<double> next = v;
    while (res.iterations < params.max_iterations) {
        ++res.iterations;
        std::vector<double> diffs(n, 0.0);
        parallel_for(n, params.threads, [&](std::size_t begin, std::size_t end) {
            for (StateIndex s = begin; s < end; ++s) {
                if (!unknown[s]) continue;
                const auto& st = game.states[s];
                double best = maxim[s] ? 0.0 : 1.0;
                for (const auto& c : st.choices) {
                    double e = expected(c, v);
                    best = maxim[s] ? std::max(best, e) : std::min(best, e);
                }
                // values only grow when iterating from below
                assert(best >= v[s] - 1e-12);
                next[s] = best;
                diffs[s] = std::abs(best - v[s]);
            }
        });
        std::swap(v, next);
        if (*std::max_element(diffs.begin(), diffs.end()) < params.epsilon) {
            res.converged = true;
            break;
        }
    }
    if (n == 0) res.converged = true;

    for (auto& x : v) x = std::clamp(x, 0.0, 1.0);
    res.q_values.resize(n);
    for (StateIndex s = 0; s < n; ++s) {
        const auto& st = game.states[s];
        res.q_values[s].resize(st.choices.size());
        for (std::size_t c = 0; c < st.choices.size(); ++c)
            res.q_values[s][c] = phi2[s] ? 1.0 : (!phi1[s] ? 0.0 : std::clamp(expected(st.choices[c], v), 0.0, 1.0));
    }

    // Strategy. Minimizing coalition states take the greedy choice. A
    // maximizing coalition must also make progress towards phi2: among
    // near-optimal choices pick one that moves into the already-resolved
    // region, growing it backwards from phi2 (opponent states join once all
    // their choices touch the region).
    res.strategy = empty_profile(game);
    const double tol = params.epsilon;
    std::vector<bool> region(n, false);
    for (StateIndex s = 0; s < n; ++s) {
        const auto& st = game.states[s];
        if (phi2[s] || !phi1[s] || !positive[s]) {
            region[s] = phi2[s];
            if (coalition.contains(st.owner)) res.strategy.choice[s] = argopt(st, res.q_values[s], maxim[s], tol);
            continue;
        }
        if (coalition.contains(st.owner) && !maxim[s]) res.strategy.choice[s] = argopt(st, res.q_values[s], false, tol);
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (StateIndex s = 0; s < n; ++s) {
            if (region[s] || !positive[s] || !phi1[s]) continue;
            const auto& st = game.states[s];
            auto touches = [&](const Choice& c) {
                return std::any_of(c.branches.begin(), c.branches.end(), [&](const Branch& b) { return region[b.target]; });
            };
            if (maxim[s]) {
                const auto& q = res.q_values[s];
                double best = *std::max_element(q.begin(), q.end());
                std::optional<std::size_t> pick;
                for (std::size_t c = 0; c < st.choices.size(); ++c) {
                    if (q[c] < best - tol || !touches(st.choices[c])) continue;
                    if (!pick || st.choices[c].action < st.choices[*pick].action) pick = c;
                }
                if (pick) {
                    if (coalition.contains(st.owner)) res.strategy.choice[s] = *pick;
                    region[s] = true;
                    changed = true;
                }
            } else if (std::all_of(st.choices.begin(), st.choices.end(), touches)) {
                region[s] = true;
                changed = true;
            }
        }
    }
    for (StateIndex s = 0; s < n; ++s)
        if (coalition.contains(game.states[s].owner) && !res.strategy.covers(s))
            res.strategy.choice[s] = argopt(game.states[s], res.q_values[s], maxim[s], tol);

    res.values = std::move(v);
    return res;
}

SolveResult solve_reachability(const StochasticGame& game, const Coalition& coalition, const std::vector<bool>& target,
                               Direction direction, const SolverParams& params) {
    return solve_until(game, coalition, std::vector<bool>(game.num_states(), true), target, direction, params);
}

SolveResult solve_mean_payoff(const StochasticGame& game, const Coalition& coalition, const RewardStructure& reward,
                              Direction direction, const SolverParams& params) {
    const auto n = game.num_states();
    const auto maxim = maximizing_states(game, coalition, direction);
    if (!reward.state_rewards.empty() && reward.state_rewards.size() != n)
        throw SolverError("reward structure does not match the game");
    if (params.lra_window == 0) throw SolverError("lra window must be positive");
    const double tau = params.aperiodicity;
    if (!(tau >= 0.0 && tau < 1.0)) throw SolverError("aperiodicity factor must lie in [0, 1)");

    // v holds the total-reward iterate minus `offset`; subtracting a constant
    // commutes with the Bellman operator, so differences stay exact.
    std::vector<double> v(n, 0.0), next(n, 0.0);
    double offset = 0.0;
    std::vector<double> snapshot(n, 0.0);
    double snapshot_offset = 0.0;
    std::vector<double> gain(n, 0.0), prev_gain;

    auto choice_value = [&](StateIndex s, std::size_t c, const std::vector<double>& vals) {
        const auto& ch = game.states[s].choices[c];
        return reward.action_reward(s, c) + (1.0 - tau) * expected(ch, vals);
    };

    SolveResult res;
    res.converged = false;
    while (res.iterations < params.max_iterations) {
        ++res.iterations;
        parallel_for(n, params.threads, [&](std::size_t begin, std::size_t end) {
            for (StateIndex s = begin; s < end; ++s) {
                const auto& st = game.states[s];
                double best = choice_value(s, 0, v);
                for (std::size_t c = 1; c < st.choices.size(); ++c) {
                    double q = choice_value(s, c, v);
                    best = maxim[s] ? std::max(best, q) : std::min(best, q);
                }
                next[s] = reward.state_reward(s) + tau * v[s] + best;
            }
        });
        std::swap(v, next);
        if (n > 0) {
            double shift = v[0];
            for (auto& x : v) x -= shift;
            offset += shift;
        }
        if (res.iterations % params.lra_window != 0) continue;
        for (StateIndex s = 0; s < n; ++s)
            gain[s] = ((v[s] - snapshot[s]) + (offset - snapshot_offset)) / static_cast<double>(params.lra_window);
        snapshot = v;
        snapshot_offset = offset;
        if (!prev_gain.empty()) {
            double delta = 0.0;
            for (StateIndex s = 0; s < n; ++s) delta = std::max(delta, std::abs(gain[s] - prev_gain[s]));
            if (delta < params.lra_gain_tolerance) {
                res.converged = true;
                break;
            }
        }
        prev_gain = gain;
    }
    if (res.iterations < params.lra_window) {
        // max_iterations below one window: fall back to the average so far
        for (StateIndex s = 0; s < n; ++s) gain[s] = (v[s] + offset) / static_cast<double>(std::max<std::size_t>(1, res.iterations));
    }

    res.values = gain;
    res.q_values.resize(n);
    res.strategy = empty_profile(game);
    for (StateIndex s = 0; s < n; ++s) {
        const auto& st = game.states[s];
        res.q_values[s].resize(st.choices.size());
        std::vector<double> bellman(st.choices.size());
        double scale = 1.0;
        for (std::size_t c = 0; c < st.choices.size(); ++c) {
            res.q_values[s][c] = expected(st.choices[c], gain);
            bellman[c] = choice_value(s, c, v);
            scale = std::max(scale, std::abs(bellman[c]));
        }
        if (coalition.contains(st.owner)) res.strategy.choice[s] = argopt(st, bellman, maxim[s], 1e-9 * scale);
    }
    return res;
}

SolveResult evaluate(const StochasticGame& game, const BoundProperty& bp, const SolverParams& params) {
    const auto& path = bp.property.path;
    const auto n = game.num_states();
    const std::vector<bool> all(n, true);
    switch (path.kind) {
        case PathKind::Next: return solve_next(game, bp.coalition, bp.right, bp.direction, params);
        case PathKind::Finally: return solve_until(game, bp.coalition, all, bp.right, bp.direction, params);
        case PathKind::FinallyBounded:
            return solve_bounded_until(game, bp.coalition, all, bp.right, path.bound, bp.direction, params);
        case PathKind::Until: return solve_until(game, bp.coalition, bp.left, bp.right, bp.direction, params);
        case PathKind::UntilBounded:
            return solve_bounded_until(game, bp.coalition, bp.left, bp.right, path.bound, bp.direction, params);
        case PathKind::GloballyBounded:
            return solve_bounded_safety(game, bp.coalition, bp.right, path.bound, bp.direction, params);
        case PathKind::Globally: {
            // G phi = 1 - F !phi with the roles swapped
            std::vector<bool> bad(n);
            for (StateIndex s = 0; s < n; ++s) bad[s] = !bp.right[s];
            auto flipped = bp.direction == Direction::Maximize ? Direction::Minimize : Direction::Maximize;
            auto res = solve_until(game, bp.coalition, all, bad, flipped, params);
            for (auto& x : res.values) x = 1.0 - x;
            for (auto& row : res.q_values)
                for (auto& x : row) x = 1.0 - x;
            return res;
        }
        case PathKind::SteadyState:
            if (!bp.reward) throw SolverError("steady-state query without a reward structure");
            return solve_mean_payoff(game, bp.coalition, *bp.reward, bp.direction, params);
    }
    throw SolverError("unsupported path formula");
}

}  // namespace smg
