#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "smg/game.hpp"
#include "smg/property.hpp"
#include "smg/solver.hpp"

namespace smg {

struct AllowedAction {
    std::size_t choice = 0;
    ActionId action = 0;
    std::string label;
    double value = 0.0;
};

struct PreShieldRow {
    StateIndex state = 0;
    std::vector<AllowedAction> allowed;  // ascending action id
    std::size_t blocked = 0;
};

struct PreShield {
    Threshold threshold;
    std::size_t horizon = 0;
    std::vector<PreShieldRow> rows;  // coalition states, ascending id
};

struct Forwarding {
    std::size_t choice = 0;
    ActionId action = 0;
    std::string label;
    std::size_t forwarded_choice = 0;
    ActionId forwarded = 0;
    std::string forwarded_label;
};

struct PostShieldRow {
    StateIndex state = 0;
    std::vector<Forwarding> forwards;  // one per available choice, ascending action id
};

struct PostShield {
    std::optional<Threshold> threshold;  // empty for an optimal shield
    std::size_t horizon = 0;
    std::vector<PostShieldRow> rows;

    bool optimal() const { return !threshold.has_value(); }
    std::size_t corrections() const;
};

class ShieldError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// `q` must come from solve_bounded_safety over the same game.
PreShield synthesize_pre_safety(const StochasticGame& game, const Coalition& coalition, const SolveResult& q,
                                const Threshold& threshold, std::size_t horizon = 0);
PostShield synthesize_post_safety(const StochasticGame& game, const Coalition& coalition, const SolveResult& q,
                                  const Threshold& threshold, std::size_t horizon = 0);
/// `lra` must come from solve_mean_payoff; every action is redirected to the
/// strategy's pick.
PostShield synthesize_optimal(const StochasticGame& game, const Coalition& coalition, const SolveResult& lra);

std::string render_shield(const PreShield& shield, const StochasticGame& game);
std::string render_shield(const PostShield& shield, const StochasticGame& game);

/// Tab-separated export, one line per state. See docs/formats.md.
std::string export_shield_tsv(const PreShield& shield, const StochasticGame& game);
std::string export_shield_tsv(const PostShield& shield, const StochasticGame& game);

/// Safety values as they appear in shield listings: up to 15 significant
/// digits, with ".0" kept when rounding hid a nonzero remainder (a sum of
/// branch probabilities that lands just below 1 prints as "1.0", an exact 1
/// as "1").
std::string format_shield_value(double v);

}  // namespace smg
