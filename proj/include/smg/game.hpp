#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace smg {

using StateIndex = std::size_t;
using PlayerId = std::size_t;
using ActionId = std::size_t;

// Probabilities in a choice must sum to one within this tolerance.
inline constexpr double kProbabilityTolerance = 1e-9;

struct Branch {
    StateIndex target = 0;
    double probability = 0.0;

    friend bool operator==(const Branch&, const Branch&) = default;
};

struct Choice {
    ActionId action = 0;
    std::vector<Branch> branches;

    friend bool operator==(const Choice&, const Choice&) = default;
};

struct GameState {
    PlayerId owner = 0;
    std::vector<std::int64_t> valuation;  // parallel to StochasticGame::variables
    std::vector<Choice> choices;

    friend bool operator==(const GameState&, const GameState&) = default;
};

// State rewards are charged on every visit; action rewards are charged
// whenever the corresponding choice is taken. action_rewards is indexed
// [state][choice index] and may be empty (meaning all zero).
struct RewardStructure {
    std::vector<double> state_rewards;
    std::vector<std::vector<double>> action_rewards;

    double state_reward(StateIndex s) const { return state_rewards.empty() ? 0.0 : state_rewards[s]; }
    double action_reward(StateIndex s, std::size_t choice) const {
        return action_rewards.empty() ? 0.0 : action_rewards[s][choice];
    }

    friend bool operator==(const RewardStructure&, const RewardStructure&) = default;
};

/// Explicit turn-based stochastic multi-player game.
///
/// Every state is owned by exactly one player who picks one of the state's
/// choices; the choice's branch distribution then selects the successor.
/// A game is treated as immutable once built, so all const operations may
/// be used concurrently.
struct StochasticGame {
    std::vector<std::string> players;
    std::vector<std::string> variables;
    std::vector<std::string> action_labels;  // indexed by ActionId
    std::vector<GameState> states;
    StateIndex initial_state = 0;
    std::map<std::string, std::vector<bool>> labels;
    std::map<std::string, RewardStructure> reward_structures;

    std::size_t num_states() const { return states.size(); }
    std::size_t num_choices() const;
    std::size_t num_transitions() const;

    const std::string& action_label(const Choice& c) const { return action_labels.at(c.action); }
    bool has_label(StateIndex s, const std::string& label) const;
    std::optional<PlayerId> player_index(const std::string& name) const;
    std::optional<ActionId> action_index(const std::string& label) const;

    // "move=0 & x1=0 & y1=0" style rendering of a state's valuation.
    std::string valuation_string(StateIndex s) const;

    friend bool operator==(const StochasticGame&, const StochasticGame&) = default;
};

struct Coalition {
    std::set<PlayerId> members;

    bool contains(PlayerId p) const { return members.count(p) != 0; }
    bool empty() const { return members.empty(); }
};

enum class Direction { Maximize, Minimize };
enum class Role { Maximizer, Minimizer };

/// Role of the owner of `state`: the coalition optimizes in the query's
/// direction, its complement in the opposite one.
Role coalition_role(const StochasticGame& game, const Coalition& coalition, StateIndex state,
                    Direction direction);

/// Memoryless deterministic strategy: a choice index per state, or nothing
/// for states the strategy does not cover.
struct StrategyProfile {
    std::vector<std::optional<std::size_t>> choice;

    bool covers(StateIndex s) const { return s < choice.size() && choice[s].has_value(); }
};

struct MarkovChain {
    std::vector<std::vector<Branch>> rows;
    std::map<std::string, RewardStructure> reward_structures;  // action rewards collapse to one column

    std::size_t num_states() const { return rows.size(); }
};

struct Diagnostic {
    StateIndex state = 0;
    std::string rule;
    std::string message;
};

std::vector<Diagnostic> validate(const StochasticGame& game);

class GameError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fixes every state's choice to the profile's pick. Reward structures are
/// carried over; the action reward of the picked choice lands in column 0.
MarkovChain induce_markov_chain(const StochasticGame& game, const StrategyProfile& profile);

/// Keeps only the profile's choice at the states it covers; other states
/// keep all of their choices.
StochasticGame restrict_to_profile(const StochasticGame& game, const StrategyProfile& profile);

/// Debug dump: header comments followed by one line per choice,
/// `state owner action_id action_label target:prob ...`.
std::string dump_game(const StochasticGame& game);
StochasticGame parse_game_dump(const std::string& text);

}  // namespace smg
