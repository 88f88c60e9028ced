#include "smg/shield.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace smg {

namespace {

std::string shortest(double v) {
    std::array<char, 32> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

void check_threshold(const Threshold& t) {
    if (!(t.value >= 0.0 && t.value <= 1.0))
        throw ShieldError(std::string(t.kind == Threshold::Kind::Absolute ? "gamma" : "lambda") + " out of range [0, 1]");
}

void check_q(const StochasticGame& game, const SolveResult& q) {
    if (q.q_values.size() != game.num_states()) throw ShieldError("solver result does not match the game");
}

std::vector<StateIndex> coalition_states(const StochasticGame& game, const Coalition& coalition) {
    std::vector<StateIndex> out;
    for (StateIndex s = 0; s < game.num_states(); ++s)
        if (coalition.contains(game.states[s].owner)) out.push_back(s);
    return out;
}

// Choice indices ordered by action id, then by position.
std::vector<std::size_t> by_action(const GameState& st) {
    std::vector<std::size_t> order(st.choices.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return st.choices[a].action < st.choices[b].action; });
    return order;
}

std::vector<bool> passing(const std::vector<double>& q, const Threshold& t) {
    double best = q.empty() ? 0.0 : *std::max_element(q.begin(), q.end());
    double bar = t.kind == Threshold::Kind::Absolute ? t.value : t.value * best;
    std::vector<bool> out(q.size());
    for (std::size_t c = 0; c < q.size(); ++c) out[c] = q[c] >= bar;
    return out;
}

std::size_t best_choice(const GameState& st, const std::vector<double>& q) {
    std::size_t pick = 0;
    for (auto c : by_action(st))
        if (q[c] > q[pick] || (q[c] == q[pick] && st.choices[c].action < st.choices[pick].action)) pick = c;
    return pick;
}

std::string threshold_text(const Threshold& t) {
    return t.kind == Threshold::Kind::Absolute ? "absolute comparison (gamma = " + shortest(t.value) + ")"
                                               : "relative comparison (lambda = " + shortest(t.value) + ")";
}

std::string threshold_tsv(const Threshold& t) {
    return t.kind == Threshold::Kind::Absolute ? "gamma=" + shortest(t.value) : "lambda=" + shortest(t.value);
}

}  // namespace

std::string format_shield_value(double v) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.15g", v);
    std::string text(buf.data());
    bool integral = text.find_first_of(".en") == std::string::npos;
    if (integral && v != std::stod(text)) text += ".0";
    return text;
}

std::size_t PostShield::corrections() const {
    std::size_t n = 0;
    for (const auto& row : rows)
        for (const auto& f : row.forwards)
            if (f.forwarded_choice != f.choice) ++n;
    return n;
}

PreShield synthesize_pre_safety(const StochasticGame& game, const Coalition& coalition, const SolveResult& q,
                                const Threshold& threshold, std::size_t horizon) {
    check_threshold(threshold);
    check_q(game, q);
    PreShield shield{threshold, horizon, {}};
    for (auto s : coalition_states(game, coalition)) {
        const auto& st = game.states[s];
        const auto& qs = q.q_values[s];
        auto pass = passing(qs, threshold);
        if (std::none_of(pass.begin(), pass.end(), [](bool b) { return b; })) {
            double best = *std::max_element(qs.begin(), qs.end());
            for (std::size_t c = 0; c < qs.size(); ++c) pass[c] = qs[c] == best;
        }
        PreShieldRow row{s, {}, 0};
        for (auto c : by_action(st)) {
            if (pass[c]) {
                row.allowed.push_back({c, st.choices[c].action, game.action_label(st.choices[c]), qs[c]});
            } else {
                ++row.blocked;
            }
        }
        shield.rows.push_back(std::move(row));
    }
    return shield;
}

PostShield synthesize_post_safety(const StochasticGame& game, const Coalition& coalition, const SolveResult& q,
                                  const Threshold& threshold, std::size_t horizon) {
    check_threshold(threshold);
    check_q(game, q);
    PostShield shield{threshold, horizon, {}};
    for (auto s : coalition_states(game, coalition)) {
        const auto& st = game.states[s];
        const auto& qs = q.q_values[s];
        auto pass = passing(qs, threshold);
        auto fallback = best_choice(st, qs);
        PostShieldRow row{s, {}};
        for (auto c : by_action(st)) {
            auto f = pass[c] ? c : fallback;
            row.forwards.push_back({c, st.choices[c].action, game.action_label(st.choices[c]), f,
                                    st.choices[f].action, game.action_label(st.choices[f])});
        }
        shield.rows.push_back(std::move(row));
    }
    return shield;
}

PostShield synthesize_optimal(const StochasticGame& game, const Coalition& coalition, const SolveResult& lra) {
    PostShield shield;
    for (auto s : coalition_states(game, coalition)) {
        const auto& st = game.states[s];
        if (!lra.strategy.covers(s)) throw ShieldError("strategy does not cover coalition state " + std::to_string(s));
        auto f = *lra.strategy.choice[s];
        PostShieldRow row{s, {}};
        for (auto c : by_action(st))
            row.forwards.push_back({c, st.choices[c].action, game.action_label(st.choices[c]), f,
                                    st.choices[f].action, game.action_label(st.choices[f])});
        shield.rows.push_back(std::move(row));
    }
    return shield;
}

std::string render_shield(const PreShield& shield, const StochasticGame& game) {
    std::string out = "Pre-Safety-Shield with " + threshold_text(shield.threshold) + ":\n";
    out += " state_id [label]:  'allowed actions' [<value>: (<action_id {label})>]:\n\n";
    for (const auto& row : shield.rows) {
        out += std::to_string(row.state) + " [" + game.valuation_string(row.state) + "]:  ";
        for (std::size_t i = 0; i < row.allowed.size(); ++i) {
            const auto& a = row.allowed[i];
            if (i) out += "; ";
            out += format_shield_value(a.value) + ":(" + std::to_string(a.action) + " {" + a.label + "})";
        }
        out += '\n';
    }
    return out;
}

std::string render_shield(const PostShield& shield, const StochasticGame& game) {
    std::string out = shield.optimal() ? "Optimal-Shield:\n"
                                       : "Post-Safety-Shield with " + threshold_text(*shield.threshold) + ":\n";
    out += " state_id [label]: 'forwarded actions' [<action_id> {label}: <forwarded_action_id> {label}]:\n\n";
    for (const auto& row : shield.rows) {
        out += std::to_string(row.state) + " [" + game.valuation_string(row.state) + "]:  ";
        for (std::size_t i = 0; i < row.forwards.size(); ++i) {
            const auto& f = row.forwards[i];
            if (i) out += "; ";
            out += std::to_string(f.action) + "{" + f.label + "}:" + std::to_string(f.forwarded) + "{" +
                   f.forwarded_label + "}";
        }
        out += '\n';
    }
    return out;
}

std::string export_shield_tsv(const PreShield& shield, const StochasticGame& game) {
    std::string out = "# pre-safety\t" + threshold_tsv(shield.threshold) + "\thorizon=" +
                      std::to_string(shield.horizon) + "\n";
    for (const auto& row : shield.rows) {
        out += std::to_string(row.state) + '\t' + game.valuation_string(row.state);
        for (const auto& a : row.allowed)
            out += '\t' + std::to_string(a.action) + '\t' + a.label + '\t' + shortest(a.value);
        out += '\n';
    }
    return out;
}

std::string export_shield_tsv(const PostShield& shield, const StochasticGame& game) {
    std::string out = shield.optimal() ? "# optimal\n"
                                       : "# post-safety\t" + threshold_tsv(*shield.threshold) + "\thorizon=" +
                                             std::to_string(shield.horizon) + "\n";
    for (const auto& row : shield.rows) {
        out += std::to_string(row.state) + '\t' + game.valuation_string(row.state);
        for (const auto& f : row.forwards)
            out += '\t' + std::to_string(f.action) + '\t' + f.label + '\t' + std::to_string(f.forwarded) + '\t' +
                   f.forwarded_label;
        out += '\n';
    }
    return out;
}

}  // namespace smg
