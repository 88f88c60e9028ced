#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "smg/game.hpp"
#include "smg/property.hpp"

namespace smg {

struct SolverParams {
    double epsilon = 1e-6;
    std::size_t max_iterations = 1'000'000;
    std::size_t lra_window = 100;
    double lra_gain_tolerance = 1e-4;
    // Weight of the self-loop mixed into every choice by the mean-payoff
    // engine; gains are unchanged, periodic oscillation is damped.
    double aperiodicity = 0.5;
    std::size_t threads = 0;  // 0 = all hardware threads
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolveResult {
    std::vector<double> values;
    std::vector<std::vector<double>> q_values;  // [state][choice]
    StrategyProfile strategy;                    // coalition states only
    // Bounded objectives only: step_strategies[j] holds the decisions with
    // j + 1 steps remaining; strategy equals step_strategies.back().
    std::vector<StrategyProfile> step_strategies;
    std::size_t iterations = 0;
    bool converged = true;
};

/// Probability of staying inside `safe` for steps 0..k.
///
/// V_0(s) = [s in safe], V_j(s) = [s in safe] * opt_c sum_t P(s,c,t) V_{j-1}(t)
/// with opt = max at maximizer states and min elsewhere. q_values holds
/// Q_k(s,c) = [s in safe] * sum_t P(s,c,t) V_{k-1}(t). Exact k sweeps.
SolveResult solve_bounded_safety(const StochasticGame& game, const Coalition& coalition, const std::vector<bool>& safe,
                                 std::size_t k, Direction direction = Direction::Maximize,
                                 const SolverParams& params = {});

/// Probability of reaching phi2 within k steps while staying in phi1.
SolveResult solve_bounded_until(const StochasticGame& game, const Coalition& coalition, const std::vector<bool>& phi1,
                                const std::vector<bool>& phi2, std::size_t k, Direction direction,
                                const SolverParams& params = {});

/// Probability that the next state satisfies phi.
SolveResult solve_next(const StochasticGame& game, const Coalition& coalition, const std::vector<bool>& phi,
                       Direction direction, const SolverParams& params = {});

/// Unbounded until: graph precomputation of the value-0 and value-1 regions,
/// then value iteration from below on the remaining states until the max-norm
/// change drops below epsilon.
SolveResult solve_until(const StochasticGame& game, const Coalition& coalition, const std::vector<bool>& phi1,
                        const std::vector<bool>& phi2, Direction direction, const SolverParams& params = {});

SolveResult solve_reachability(const StochasticGame& game, const Coalition& coalition, const std::vector<bool>& target,
                               Direction direction, const SolverParams& params = {});

/// Long-run average reward. values[s] is the gain from s (state dependent).
SolveResult solve_mean_payoff(const StochasticGame& game, const Coalition& coalition, const RewardStructure& reward,
                              Direction direction, const SolverParams& params = {});

/// Dispatches a bound property to the matching engine. Shield annotations
/// are ignored here.
SolveResult evaluate(const StochasticGame& game, const BoundProperty& property, const SolverParams& params = {});

}  // namespace smg
