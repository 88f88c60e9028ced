#include "smg/game.hpp"

#include <cmath>
#include <sstream>

namespace smg {

std::size_t StochasticGame::num_choices() const {
    std::size_t n = 0;
    for (const auto& s : states) n += s.choices.size();
    return n;
}

std::size_t StochasticGame::num_transitions() const {
    std::size_t n = 0;
    for (const auto& s : states)
        for (const auto& c : s.choices) n += c.branches.size();
    return n;
}

bool StochasticGame::has_label(StateIndex s, const std::string& label) const {
    auto it = labels.find(label);
    return it != labels.end() && it->second.at(s);
}

std::optional<PlayerId> StochasticGame::player_index(const std::string& name) const {
    for (PlayerId p = 0; p < players.size(); ++p)
        if (players[p] == name) return p;
    return std::nullopt;
}

std::optional<ActionId> StochasticGame::action_index(const std::string& label) const {
    for (ActionId a = 0; a < action_labels.size(); ++a)
        if (action_labels[a] == label) return a;
    return std::nullopt;
}

std::string StochasticGame::valuation_string(StateIndex s) const {
    std::string out;
    const auto& val = states.at(s).valuation;
    for (std::size_t i = 0; i < variables.size() && i < val.size(); ++i) {
        if (i) out += " & ";
        out += variables[i] + "=" + std::to_string(val[i]);
    }
    return out;
}

Role coalition_role(const StochasticGame& game, const Coalition& coalition, StateIndex state,
                    Direction direction) {
    bool in = coalition.contains(game.states.at(state).owner);
    bool maximizing = (direction == Direction::Maximize) ? in : !in;
    return maximizing ? Role::Maximizer : Role::Minimizer;
}

std::vector<Diagnostic> validate(const StochasticGame& game) {
    std::vector<Diagnostic> out;
    const auto n = game.num_states();
    if (n == 0) {
        out.push_back({0, "initial state", "game has no states"});
        return out;
    }
    if (game.initial_state >= n)
        out.push_back({game.initial_state, "initial state", "initial state index out of range"});
    for (StateIndex s = 0; s < n; ++s) {
        const auto& st = game.states[s];
        if (st.owner >= game.players.size())
            out.push_back({s, "owner", "owner " + std::to_string(st.owner) + " is not a declared player"});
        if (st.choices.empty()) out.push_back({s, "deadlock", "state has no choices"});
        for (std::size_t c = 0; c < st.choices.size(); ++c) {
            const auto& ch = st.choices[c];
            if (ch.action >= game.action_labels.size())
                out.push_back({s, "action id", "choice " + std::to_string(c) + " has unknown action id"});
            double sum = 0.0;
            bool ranges_ok = true;
            for (const auto& b : ch.branches) {
                if (b.target >= n) {
                    out.push_back({s, "branch target", "choice " + std::to_string(c) + " targets state " +
                                                           std::to_string(b.target) + " out of range"});
                }
                if (!(b.probability > 0.0 && b.probability <= 1.0) || !std::isfinite(b.probability))
                    ranges_ok = false;
                sum += b.probability;
            }
            if (!ranges_ok)
                out.push_back({s, "probability range", "choice " + std::to_string(c) + " has a probability outside (0, 1]"});
            if (std::abs(sum - 1.0) > kProbabilityTolerance) {
                std::ostringstream msg;
                msg << "choice " << c << " has probability sum " << sum;
                out.push_back({s, "probability sum", msg.str()});
            }
        }
    }
    for (const auto& [name, rs] : game.reward_structures) {
        for (StateIndex s = 0; s < rs.state_rewards.size(); ++s)
            if (!std::isfinite(rs.state_rewards[s]))
                out.push_back({s, "reward", "non-finite state reward in \"" + name + "\""});
        for (StateIndex s = 0; s < rs.action_rewards.size(); ++s)
            for (double r : rs.action_rewards[s])
                if (!std::isfinite(r)) out.push_back({s, "reward", "non-finite action reward in \"" + name + "\""});
    }
    return out;
}

MarkovChain induce_markov_chain(const StochasticGame& game, const StrategyProfile& profile) {
    MarkovChain mc;
    const auto n = game.num_states();
    mc.rows.resize(n);
    for (StateIndex s = 0; s < n; ++s) {
        if (!profile.covers(s)) throw GameError("strategy profile does not cover state " + std::to_string(s));
        auto c = *profile.choice[s];
        if (c >= game.states[s].choices.size())
            throw GameError("strategy profile picks a missing choice at state " + std::to_string(s));
        mc.rows[s] = game.states[s].choices[c].branches;
    }
    for (const auto& [name, rs] : game.reward_structures) {
        RewardStructure out;
        out.state_rewards = rs.state_rewards;
        if (!rs.action_rewards.empty()) {
            out.action_rewards.resize(n);
            for (StateIndex s = 0; s < n; ++s) out.action_rewards[s] = {rs.action_rewards[s][*profile.choice[s]]};
        }
        mc.reward_structures.emplace(name, std::move(out));
    }
    return mc;
}

StochasticGame restrict_to_profile(const StochasticGame& game, const StrategyProfile& profile) {
    StochasticGame out = game;
    for (StateIndex s = 0; s < out.num_states(); ++s) {
        if (!profile.covers(s)) continue;
        auto c = *profile.choice[s];
        auto& choices = out.states[s].choices;
        choices = {choices.at(c)};
        for (auto& [name, rs] : out.reward_structures)
            if (!rs.action_rewards.empty()) rs.action_rewards[s] = {rs.action_rewards[s].at(c)};
    }
    return out;
}

namespace {

std::string dump_label(const std::string& label) { return label.empty() ? "-" : label; }
std::string undump_label(const std::string& label) { return label == "-" ? "" : label; }

}  // namespace

std::string dump_game(const StochasticGame& game) {
    std::ostringstream out;
    out.precision(17);
    out << "# smg explicit game\n";
    out << "players";
    for (const auto& p : game.players) out << ' ' << p;
    out << "\nvariables";
    for (const auto& v : game.variables) out << ' ' << v;
    out << "\nactions";
    for (const auto& a : game.action_labels) out << ' ' << dump_label(a);
    out << "\nstates " << game.num_states() << "\ninitial " << game.initial_state << '\n';
    for (const auto& [name, bits] : game.labels) {
        out << "label " << name;
        for (StateIndex s = 0; s < bits.size(); ++s)
            if (bits[s]) out << ' ' << s;
        out << '\n';
    }
    for (StateIndex s = 0; s < game.num_states(); ++s) {
        const auto& st = game.states[s];
        if (!st.valuation.empty()) {
            out << "valuation " << s;
            for (auto v : st.valuation) out << ' ' << v;
            out << '\n';
        }
    }
    for (StateIndex s = 0; s < game.num_states(); ++s) {
        const auto& st = game.states[s];
        if (st.choices.empty()) out << "owner " << s << ' ' << st.owner << '\n';
        for (const auto& c : st.choices) {
            out << s << ' ' << st.owner << ' ' << c.action << ' ' << dump_label(game.action_label(c));
            for (const auto& b : c.branches) out << ' ' << b.target << ':' << b.probability;
            out << '\n';
        }
    }
    return out.str();
}

StochasticGame parse_game_dump(const std::string& text) {
    StochasticGame game;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& what) {
        throw GameError("game dump line " + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (head == "players") {
            for (std::string p; ls >> p;) game.players.push_back(p);
        } else if (head == "variables") {
            for (std::string v; ls >> v;) game.variables.push_back(v);
        } else if (head == "actions") {
            for (std::string a; ls >> a;) game.action_labels.push_back(undump_label(a));
        } else if (head == "states") {
            std::size_t n = 0;
            if (!(ls >> n)) fail("bad state count");
            game.states.resize(n);
        } else if (head == "initial") {
            if (!(ls >> game.initial_state)) fail("bad initial state");
        } else if (head == "label") {
            std::string name;
            ls >> name;
            auto& bits = game.labels[name];
            bits.assign(game.num_states(), false);
            for (StateIndex s; ls >> s;) {
                if (s >= bits.size()) fail("label state out of range");
                bits[s] = true;
            }
        } else if (head == "valuation") {
            StateIndex s = 0;
            if (!(ls >> s) || s >= game.num_states()) fail("bad valuation state");
            for (std::int64_t v; ls >> v;) game.states[s].valuation.push_back(v);
        } else if (head == "owner") {
            StateIndex s = 0;
            PlayerId p = 0;
            if (!(ls >> s >> p) || s >= game.num_states()) fail("bad owner line");
            game.states[s].owner = p;
        } else {
            StateIndex s = 0;
            try {
                s = std::stoull(head);
            } catch (const std::exception&) {
                fail("unknown directive '" + head + "'");
            }
            if (s >= game.num_states()) fail("state out of range");
            Choice c;
            std::string label;
            PlayerId owner = 0;
            if (!(ls >> owner >> c.action >> label)) fail("truncated choice line");
            game.states[s].owner = owner;
            for (std::string tok; ls >> tok;) {
                auto colon = tok.find(':');
                if (colon == std::string::npos) fail("branch without ':'");
                c.branches.push_back({std::stoull(tok.substr(0, colon)), std::stod(tok.substr(colon + 1))});
            }
            game.states[s].choices.push_back(std::move(c));
        }
    }
    return game;
}

}  // namespace smg
