#include "smg/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace smg::oracle {

std::size_t profile_count(const StochasticGame& game) {
    std::size_t count = 1;
    for (const auto& st : game.states) {
        if (st.choices.empty()) return 0;
        if (count > std::numeric_limits<std::size_t>::max() / st.choices.size())
            return std::numeric_limits<std::size_t>::max();
        count *= st.choices.size();
    }
    return count;
}

namespace {

void check_budget(const StochasticGame& game, const Budget& budget) {
    if (game.num_states() > budget.max_states)
        throw BudgetExceeded("oracle refuses games with " + std::to_string(game.num_states()) + " states (budget " +
                             std::to_string(budget.max_states) + ")");
    auto count = profile_count(game);
    if (count > budget.max_profile_count)
        throw BudgetExceeded("oracle refuses games with " + std::to_string(count) + " profiles (budget " +
                             std::to_string(budget.max_profile_count) + ")");
}

// Odometer over the choice counts of `states`.
void for_each_assignment(const StochasticGame& game, const std::vector<StateIndex>& states, StrategyProfile& profile,
                         const std::function<void()>& visit) {
    for (auto s : states) profile.choice[s] = 0;
    while (true) {
        visit();
        std::size_t i = states.size();
        while (i > 0) {
            --i;
            auto s = states[i];
            if (++*profile.choice[s] < game.states[s].choices.size()) break;
            profile.choice[s] = 0;
            if (i == 0) return;
        }
        if (states.empty()) return;
    }
}

std::vector<bool> can_reach(const MarkovChain& mc, const std::vector<bool>& through, const std::vector<bool>& goal) {
    const auto n = mc.num_states();
    std::vector<bool> reach = goal;
    bool changed = true;
    while (changed) {
        changed = false;
        for (StateIndex s = 0; s < n; ++s) {
            if (reach[s] || !through[s]) continue;
            for (const auto& b : mc.rows[s])
                if (reach[b.target]) {
                    reach[s] = true;
                    changed = true;
                    break;
                }
        }
    }
    return reach;
}

}  // namespace

void for_each_profile(const StochasticGame& game, const Budget& budget,
                      const std::function<void(const StrategyProfile&)>& visit) {
    check_budget(game, budget);
    StrategyProfile profile;
    profile.choice.assign(game.num_states(), std::nullopt);
    std::vector<StateIndex> all(game.num_states());
    for (StateIndex s = 0; s < all.size(); ++s) all[s] = s;
    for_each_assignment(game, all, profile, [&] { visit(profile); });
}

std::vector<StrategyProfile> enumerate_profiles(const StochasticGame& game, const Budget& budget) {
    std::vector<StrategyProfile> out;
    for_each_profile(game, budget, [&](const StrategyProfile& p) { out.push_back(p); });
    return out;
}

std::vector<double> mc_until_exact(const MarkovChain& mc, const std::vector<bool>& phi1, const std::vector<bool>& phi2) {
    const auto n = mc.num_states();
    auto reach = can_reach(mc, phi1, phi2);
    std::vector<StateIndex> unknown;
    std::vector<std::ptrdiff_t> pos(n, -1);
    for (StateIndex s = 0; s < n; ++s)
        if (reach[s] && !phi2[s]) {
            pos[s] = static_cast<std::ptrdiff_t>(unknown.size());
            unknown.push_back(s);
        }
    std::vector<double> out(n, 0.0);
    for (StateIndex s = 0; s < n; ++s)
        if (phi2[s]) out[s] = 1.0;
    if (unknown.empty()) return out;

    const auto m = static_cast<Eigen::Index>(unknown.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (const auto& b : mc.rows[unknown[i]]) {
            if (phi2[b.target]) {
                rhs(i) += b.probability;
            } else if (pos[b.target] >= 0) {
                a(i, pos[b.target]) -= b.probability;
            }
        }
    }
    Eigen::VectorXd x = a.partialPivLu().solve(rhs);
    for (Eigen::Index i = 0; i < m; ++i) out[unknown[i]] = x(i);
    return out;
}

std::vector<double> mc_reach_exact(const MarkovChain& mc, const std::vector<bool>& target) {
    return mc_until_exact(mc, std::vector<bool>(mc.num_states(), true), target);
}

std::vector<std::vector<StateIndex>> bottom_sccs(const MarkovChain& mc) {
    // Tarjan
    const auto n = mc.num_states();
    std::vector<std::ptrdiff_t> index(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<StateIndex> stack;
    std::vector<std::vector<StateIndex>> sccs;
    std::ptrdiff_t counter = 0;
    std::function<void(StateIndex)> connect = [&](StateIndex v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (const auto& b : mc.rows[v]) {
            if (index[b.target] < 0) {
                connect(b.target);
                low[v] = std::min(low[v], low[b.target]);
            } else if (on_stack[b.target]) {
                low[v] = std::min(low[v], index[b.target]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<StateIndex> scc;
            StateIndex w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                scc.push_back(w);
            } while (w != v);
            sccs.push_back(std::move(scc));
        }
    };
    for (StateIndex s = 0; s < n; ++s)
        if (index[s] < 0) connect(s);

    std::vector<std::vector<StateIndex>> bottom;
    std::vector<std::size_t> comp(n);
    for (std::size_t i = 0; i < sccs.size(); ++i)
        for (auto s : sccs[i]) comp[s] = i;
    for (std::size_t i = 0; i < sccs.size(); ++i) {
        bool closed = true;
        for (auto s : sccs[i])
            for (const auto& b : mc.rows[s])
                if (comp[b.target] != i) closed = false;
        if (closed) {
            auto scc = sccs[i];
            std::sort(scc.begin(), scc.end());
            bottom.push_back(std::move(scc));
        }
    }
    std::sort(bottom.begin(), bottom.end());
    return bottom;
}

std::vector<double> mc_lra_exact(const MarkovChain& mc, const RewardStructure& reward) {
    const auto n = mc.num_states();
    auto step_reward = [&](StateIndex s) {
        double r = reward.state_reward(s);
        if (!reward.action_rewards.empty()) r += reward.action_rewards[s].at(0);
        return r;
    };
    std::vector<double> gain(n, 0.0);
    std::vector<bool> recurrent(n, false);
    for (const auto& scc : bottom_sccs(mc)) {
        const auto m = static_cast<Eigen::Index>(scc.size());
        std::vector<std::ptrdiff_t> pos(n, -1);
        for (Eigen::Index i = 0; i < m; ++i) pos[scc[i]] = i;
        // pi (P - I) = 0 with the last equation replaced by sum(pi) = 1
        Eigen::MatrixXd a = -Eigen::MatrixXd::Identity(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (const auto& b : mc.rows[scc[i]]) a(pos[b.target], i) += b.probability;
        a.row(m - 1).setOnes();
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
        rhs(m - 1) = 1.0;
        Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
        double g = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) g += pi(i) * step_reward(scc[i]);
        for (auto s : scc) {
            gain[s] = g;
            recurrent[s] = true;
        }
    }
    // transient: g_T = P_TT g_T + P_TR g_R
    std::vector<StateIndex> transient;
    std::vector<std::ptrdiff_t> pos(n, -1);
    for (StateIndex s = 0; s < n; ++s)
        if (!recurrent[s]) {
            pos[s] = static_cast<std::ptrdiff_t>(transient.size());
            transient.push_back(s);
        }
    if (transient.empty()) return gain;
    const auto m = static_cast<Eigen::Index>(transient.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (const auto& b : mc.rows[transient[i]]) {
            if (recurrent[b.target]) {
                rhs(i) += b.probability * gain[b.target];
            } else {
                a(i, pos[b.target]) -= b.probability;
            }
        }
    Eigen::VectorXd x = a.partialPivLu().solve(rhs);
    for (Eigen::Index i = 0; i < m; ++i) gain[transient[i]] = x(i);
    return gain;
}

RewardStructure project_reward(const StochasticGame& game, const RewardStructure& game_reward,
                               const StrategyProfile& profile) {
    RewardStructure out;
    out.state_rewards = game_reward.state_rewards;
    if (!game_reward.action_rewards.empty()) {
        out.action_rewards.resize(game.num_states());
        for (StateIndex s = 0; s < game.num_states(); ++s)
            out.action_rewards[s] = {game_reward.action_rewards[s].at(profile.choice.at(s).value())};
    }
    return out;
}

Objective Objective::reach(std::vector<bool> target) {
    Objective o;
    o.kind = Kind::Reach;
    o.right = std::move(target);
    return o;
}

Objective Objective::until(std::vector<bool> phi1, std::vector<bool> phi2) {
    Objective o;
    o.kind = Kind::Until;
    o.left = std::move(phi1);
    o.right = std::move(phi2);
    return o;
}

Objective Objective::bounded_safety(std::vector<bool> safe, std::size_t k) {
    Objective o;
    o.kind = Kind::BoundedSafety;
    o.right = std::move(safe);
    o.horizon = k;
    return o;
}

Objective Objective::mean_payoff(const RewardStructure& reward) {
    Objective o;
    o.kind = Kind::MeanPayoff;
    o.reward = &reward;
    return o;
}

namespace {

// Finite-horizon safety of a fixed chain by forward distribution propagation.
std::vector<double> mc_bounded_safety(const MarkovChain& mc, const std::vector<bool>& safe, std::size_t k) {
    const auto n = mc.num_states();
    std::vector<double> out(n);
    for (StateIndex start = 0; start < n; ++start) {
        std::vector<double> dist(n, 0.0);
        if (safe[start]) dist[start] = 1.0;
        for (std::size_t j = 0; j < k; ++j) {
            std::vector<double> next(n, 0.0);
            for (StateIndex s = 0; s < n; ++s)
                if (dist[s] > 0.0)
                    for (const auto& b : mc.rows[s])
                        if (safe[b.target]) next[b.target] += dist[s] * b.probability;
            dist = std::move(next);
        }
        double mass = 0.0;
        for (double d : dist) mass += d;
        out[start] = mass;
    }
    return out;
}

}  // namespace

std::vector<double> profile_value(const StochasticGame& game, const StrategyProfile& profile,
                                  const Objective& objective) {
    auto mc = induce_markov_chain(game, profile);
    switch (objective.kind) {
        case Objective::Kind::Reach: return mc_reach_exact(mc, objective.right);
        case Objective::Kind::Until: return mc_until_exact(mc, objective.left, objective.right);
        case Objective::Kind::BoundedSafety: return mc_bounded_safety(mc, objective.right, objective.horizon);
        case Objective::Kind::MeanPayoff: return mc_lra_exact(mc, project_reward(game, *objective.reward, profile));
    }
    return {};
}

std::vector<double> value(const StochasticGame& game, const Coalition& coalition, const Objective& objective,
                          Direction direction, const Budget& budget) {
    check_budget(game, budget);
    const auto n = game.num_states();
    if (objective.kind == Objective::Kind::BoundedSafety) {
        // memoryless profiles do not suffice for finite horizons
        auto q = bounded_safety_tree(game, coalition, objective.right, objective.horizon, direction);
        std::vector<double> out(n);
        for (StateIndex s = 0; s < n; ++s) {
            bool maxim = coalition_role(game, coalition, s, direction) == Role::Maximizer;
            out[s] = maxim ? *std::max_element(q[s].begin(), q[s].end()) : *std::min_element(q[s].begin(), q[s].end());
        }
        return out;
    }
    std::vector<StateIndex> ours, theirs;
    for (StateIndex s = 0; s < n; ++s) (coalition.contains(game.states[s].owner) ? ours : theirs).push_back(s);
    const bool maximize = direction == Direction::Maximize;
    const double worst = maximize ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();

    StrategyProfile profile;
    profile.choice.assign(n, std::nullopt);
    std::vector<double> best(n, worst);
    for_each_assignment(game, ours, profile, [&] {
        std::vector<double> response(n, -worst);
        for_each_assignment(game, theirs, profile, [&] {
            auto v = profile_value(game, profile, objective);
            for (StateIndex s = 0; s < n; ++s) response[s] = maximize ? std::min(response[s], v[s]) : std::max(response[s], v[s]);
        });
        for (StateIndex s = 0; s < n; ++s) best[s] = maximize ? std::max(best[s], response[s]) : std::min(best[s], response[s]);
    });
    return best;
}

namespace {

struct TreeEval {
    const StochasticGame& game;
    const Coalition& coalition;
    const std::vector<bool>& safe;
    Direction direction;
    const std::vector<StrategyProfile>* steps = nullptr;

    double node(StateIndex s, std::size_t remaining) const {
        if (!safe[s]) return 0.0;
        if (remaining == 0) return 1.0;
        const auto& st = game.states[s];
        if (steps && coalition.contains(st.owner)) return edge(s, steps->at(remaining - 1).choice[s].value(), remaining);
        bool maxim = coalition_role(game, coalition, s, direction) == Role::Maximizer;
        double best = maxim ? 0.0 : 1.0;
        for (std::size_t c = 0; c < st.choices.size(); ++c) {
            double v = edge(s, c, remaining);
            best = maxim ? std::max(best, v) : std::min(best, v);
        }
        return best;
    }

    double edge(StateIndex s, std::size_t c, std::size_t remaining) const {
        if (!safe[s]) return 0.0;
        double sum = 0.0;
        for (const auto& b : game.states[s].choices[c].branches) sum += b.probability * node(b.target, remaining - 1);
        return sum;
    }
};

}  // namespace

std::vector<std::vector<double>> bounded_safety_tree(const StochasticGame& game, const Coalition& coalition,
                                                     const std::vector<bool>& safe, std::size_t k,
                                                     Direction direction) {
    TreeEval eval{game, coalition, safe, direction};
    std::vector<std::vector<double>> q(game.num_states());
    for (StateIndex s = 0; s < game.num_states(); ++s)
        for (std::size_t c = 0; c < game.states[s].choices.size(); ++c) q[s].push_back(eval.edge(s, c, k));
    return q;
}

std::vector<double> bounded_safety_against_strategy(const StochasticGame& game, const Coalition& coalition,
                                                    const std::vector<bool>& safe, std::size_t k,
                                                    const std::vector<StrategyProfile>& steps, Direction direction) {
    if (steps.size() < k) throw std::invalid_argument("strategy has fewer steps than the horizon");
    TreeEval eval{game, coalition, safe, direction, &steps};
    std::vector<double> out(game.num_states());
    for (StateIndex s = 0; s < game.num_states(); ++s) out[s] = eval.node(s, k);
    return out;
}

}  // namespace smg::oracle
