#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "smg/game.hpp"

namespace smg::oracle {

// Reference results for small games by brute force: every memoryless
// deterministic profile is enumerated and its Markov chain solved exactly
// with dense linear algebra. Turn-based games with these objectives have
// optimal memoryless strategies that are optimal from every state at once,
// so the value is the per-state max-min over profiles.

struct Budget {
    std::size_t max_states = 8;
    std::size_t max_profile_count = 1'000'000;
};

class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::size_t profile_count(const StochasticGame& game);

/// Calls `visit` once for every full deterministic memoryless profile.
void for_each_profile(const StochasticGame& game, const Budget& budget,
                      const std::function<void(const StrategyProfile&)>& visit);
std::vector<StrategyProfile> enumerate_profiles(const StochasticGame& game, const Budget& budget = {});

std::vector<double> mc_reach_exact(const MarkovChain& mc, const std::vector<bool>& target);
std::vector<double> mc_until_exact(const MarkovChain& mc, const std::vector<bool>& phi1, const std::vector<bool>& phi2);

/// Per-state long-run average reward: stationary distributions of the bottom
/// SCCs, absorption-weighted for transient states. `reward` is indexed like
/// the chain (action rewards, if any, in column 0).
std::vector<double> mc_lra_exact(const MarkovChain& mc, const RewardStructure& reward);

/// Bottom strongly connected components of the chain, each sorted.
std::vector<std::vector<StateIndex>> bottom_sccs(const MarkovChain& mc);

/// Reward of `game_reward` seen by the chain induced by `profile`.
RewardStructure project_reward(const StochasticGame& game, const RewardStructure& game_reward,
                               const StrategyProfile& profile);

struct Objective {
    enum class Kind { Reach, Until, BoundedSafety, MeanPayoff };
    Kind kind = Kind::Reach;
    std::vector<bool> left;   // Until
    std::vector<bool> right;  // target / safe set
    std::size_t horizon = 0;  // BoundedSafety
    const RewardStructure* reward = nullptr;

    static Objective reach(std::vector<bool> target);
    static Objective until(std::vector<bool> phi1, std::vector<bool> phi2);
    static Objective bounded_safety(std::vector<bool> safe, std::size_t k);
    static Objective mean_payoff(const RewardStructure& reward);
};

/// Value of the coalition from every state: best coalition strategy against
/// the worst opponent strategy, per state.
std::vector<double> value(const StochasticGame& game, const Coalition& coalition, const Objective& objective,
                          Direction direction, const Budget& budget = {});

/// Same quantity for a fixed full profile (no optimization).
std::vector<double> profile_value(const StochasticGame& game, const StrategyProfile& profile,
                                  const Objective& objective);

/// Q_k(s, c) for bounded safety by expanding the full game tree of depth k
/// (no sharing between subtrees), indexed [state][choice].
std::vector<std::vector<double>> bounded_safety_tree(const StochasticGame& game, const Coalition& coalition,
                                                     const std::vector<bool>& safe, std::size_t k,
                                                     Direction direction);

/// Probability of staying in `safe` for steps 0..k when the coalition follows
/// the horizon-indexed strategy (steps[j] = decision with j + 1 steps left)
/// and the opponent plays its best finite-horizon response. Evaluated by the
/// same full tree expansion.
std::vector<double> bounded_safety_against_strategy(const StochasticGame& game, const Coalition& coalition,
                                                    const std::vector<bool>& safe, std::size_t k,
                                                    const std::vector<StrategyProfile>& steps, Direction direction);

}  // namespace smg::oracle
