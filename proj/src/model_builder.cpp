#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <unordered_map>

#include "smg/model.hpp"

namespace smg {

namespace {

struct ValuationHash {
    std::size_t operator()(const std::vector<std::int64_t>& v) const noexcept {
        std::size_t h = 0xcbf29ce484222325ULL;
        for (auto x : v) {
            h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }
};

struct CompiledAssignment {
    std::size_t slot;
    ExprPtr value;
};

struct CompiledUpdate {
    ExprPtr probability;
    std::vector<CompiledAssignment> assignments;
};

struct CompiledCommand {
    std::size_t module = 0;
    std::size_t index = 0;  // global textual index
    std::optional<ActionId> action;
    ExprPtr guard;
    std::vector<CompiledUpdate> updates;
    PlayerId owner = 0;
    std::size_t line = 0;
};

// A unit of choice generation: either one unlabeled command or every module
// taking part in a synchronized action.
struct Slot {
    std::optional<std::size_t> command;
    ActionId action = 0;
    std::vector<std::vector<std::size_t>> participants;  // per module: its commands on this action
};

struct Bounds {
    std::int64_t low;
    std::int64_t high;
};

class Builder {
public:
    Builder(const ModelAst& ast, const ConstantOverrides& overrides, const BuildOptions& options)
        : ast_(ast), options_(options) {
        bind_constants(overrides);
        collect_variables();
        compile_commands();
        compile_labels_and_rewards();
    }

    StochasticGame build() {
        for (const auto& p : ast_.players) game_.players.push_back(p.name);
        for (const auto& v : variables_) game_.variables.push_back(v);

        std::vector<std::int64_t> init(variables_.size());
        for (std::size_t i = 0; i < init.size(); ++i) init[i] = initial_[i];

        index_of(init);
        for (StateIndex s = 0; s < valuations_.size(); ++s) explore(s);

        game_.initial_state = 0;
        game_.states.resize(valuations_.size());
        for (StateIndex s = 0; s < valuations_.size(); ++s) {
            game_.states[s].valuation = valuations_[s];
            game_.states[s].owner = owners_[s];
            game_.states[s].choices = std::move(choices_[s]);
        }
        evaluate_labels();
        evaluate_rewards();
        return std::move(game_);
    }

private:
    [[noreturn]] void fail(BuildErrorKind kind, const std::string& msg) const { throw BuildError(kind, msg); }

    std::string describe(const std::vector<std::int64_t>& val) const {
        std::string out = "(";
        for (std::size_t i = 0; i < val.size(); ++i) {
            if (i) out += ", ";
            out += variables_[i] + "=" + std::to_string(val[i]);
        }
        return out + ")";
    }

    ExprPtr resolve_constants_only(const ExprPtr& e) const {
        return resolve_names(e, [&](const Expr& id) -> ExprPtr {
            auto it = constants_.find(id.name);
            return it == constants_.end() ? nullptr : make_literal(it->second);
        });
    }

    ExprPtr compile(const ExprPtr& e) const {
        auto r = resolve_names(e, [&](const Expr& id) -> ExprPtr {
            if (auto it = constants_.find(id.name); it != constants_.end()) return make_literal(it->second);
            if (auto it = slot_of_.find(id.name); it != slot_of_.end()) {
                auto v = std::make_shared<Expr>();
                v->op = ExprOp::Variable;
                v->name = id.name;
                v->slot = it->second;
                return v;
            }
            fail(BuildErrorKind::Evaluation, "line " + std::to_string(id.line) + ": unknown identifier '" + id.name + "'");
        });
        try {
            return fold_constants(r);
        } catch (const EvalError& err) {
            fail(BuildErrorKind::Evaluation, "line " + std::to_string(e->line) + ": " + err.what());
        }
    }

    Value eval_constant(const ExprPtr& e, const std::string& what) const {
        try {
            return evaluate(*fold_constants(resolve_constants_only(e)), EvalContext{});
        } catch (const EvalError& err) {
            fail(BuildErrorKind::Evaluation, what + ": " + err.what());
        }
    }

    void bind_constants(const ConstantOverrides& overrides) {
        for (const auto& [name, value] : overrides) {
            bool known = std::any_of(ast_.constants.begin(), ast_.constants.end(),
                                     [&](const ConstantDecl& c) { return c.name == name; });
            if (!known) fail(BuildErrorKind::BadConstant, "override for unknown constant '" + name + "'");
        }
        for (const auto& c : ast_.constants) {
            Value v;
            if (auto it = overrides.find(c.name); it != overrides.end()) {
                v = it->second;
            } else if (c.value) {
                v = eval_constant(c.value, "constant '" + c.name + "'");
            } else {
                fail(BuildErrorKind::UndefinedConstant, "constant '" + c.name + "' is undefined; supply it with -const");
            }
            switch (c.type) {
                case ConstType::Int:
                    if (!std::holds_alternative<std::int64_t>(v))
                        fail(BuildErrorKind::BadConstant, "constant '" + c.name + "' must be an integer");
                    break;
                case ConstType::Double:
                    if (std::holds_alternative<bool>(v))
                        fail(BuildErrorKind::BadConstant, "constant '" + c.name + "' must be a number");
                    v = as_real(v);
                    break;
                case ConstType::Bool:
                    if (!std::holds_alternative<bool>(v))
                        fail(BuildErrorKind::BadConstant, "constant '" + c.name + "' must be a boolean");
                    break;
            }
            constants_[c.name] = v;
        }
    }

    std::int64_t int_constant(const ExprPtr& e, const std::string& what) const {
        auto v = eval_constant(e, what);
        if (!std::holds_alternative<std::int64_t>(v)) fail(BuildErrorKind::Evaluation, what + " must be an integer");
        return std::get<std::int64_t>(v);
    }

    void collect_variables() {
        for (const auto& m : ast_.modules) {
            for (const auto& v : m.variables) {
                slot_of_[v.name] = variables_.size();
                variables_.push_back(v.name);
                Bounds b{int_constant(v.low, "lower bound of '" + v.name + "'"),
                         int_constant(v.high, "upper bound of '" + v.name + "'")};
                if (b.low > b.high) fail(BuildErrorKind::OutOfRange, "empty range for variable '" + v.name + "'");
                auto init = int_constant(v.init, "initial value of '" + v.name + "'");
                if (init < b.low || init > b.high)
                    fail(BuildErrorKind::OutOfRange, "initial value of '" + v.name + "' is outside its range");
                bounds_.push_back(b);
                initial_.push_back(init);
            }
        }
    }

    ActionId intern_action(const std::string& label) {
        if (auto it = action_ids_.find(label); it != action_ids_.end()) return it->second;
        ActionId id = game_.action_labels.size();
        game_.action_labels.push_back(label);
        action_ids_[label] = id;
        return id;
    }

    void compile_commands() {
        std::map<std::string, PlayerId> module_owner, action_owner;
        for (PlayerId p = 0; p < ast_.players.size(); ++p) {
            for (const auto& m : ast_.players[p].modules) module_owner[m] = p;
            for (const auto& a : ast_.players[p].actions) action_owner[a] = p;
        }

        std::size_t global = 0;
        std::map<ActionId, std::size_t> slot_of_action;
        std::optional<ActionId> unlabeled;
        for (std::size_t mi = 0; mi < ast_.modules.size(); ++mi) {
            const auto& m = ast_.modules[mi];
            for (const auto& cmd : m.commands) {
                CompiledCommand cc;
                cc.module = mi;
                cc.index = global++;
                cc.line = cmd.line;
                cc.guard = compile(cmd.guard);
                for (const auto& u : cmd.updates) {
                    CompiledUpdate cu;
                    cu.probability = compile(u.probability);
                    for (const auto& a : u.assignments) cu.assignments.push_back({slot_of_.at(a.variable), compile(a.value)});
                    cc.updates.push_back(std::move(cu));
                }
                std::optional<PlayerId> owner;
                if (cmd.action && action_owner.count(*cmd.action)) {
                    owner = action_owner.at(*cmd.action);
                } else if (module_owner.count(m.name)) {
                    owner = module_owner.at(m.name);
                }
                if (!owner)
                    fail(BuildErrorKind::Ownership, "line " + std::to_string(cmd.line) + ": command in module '" + m.name +
                                                        "' has no owning player (list the module or its action in a player block)");
                cc.owner = *owner;

                const std::size_t ci = commands_.size();
                if (cmd.action && !cmd.action->empty()) {
                    cc.action = intern_action(*cmd.action);
                    auto [it, fresh] = slot_of_action.try_emplace(*cc.action, slots_.size());
                    if (fresh) {
                        Slot s;
                        s.action = *cc.action;
                        slots_.push_back(std::move(s));
                    }
                    auto& slot = slots_[it->second];
                    if (slot.participants.empty() || module_of_participant_.at(it->second).back() != mi) {
                        slot.participants.emplace_back();
                        module_of_participant_[it->second].push_back(mi);
                    }
                    slot.participants.back().push_back(ci);
                } else {
                    if (!unlabeled) unlabeled = intern_action("");
                    Slot s;
                    s.command = ci;
                    s.action = *unlabeled;
                    slots_.push_back(std::move(s));
                }
                commands_.push_back(std::move(cc));
            }
        }
        // A synchronized action has one owner; if it is not assigned explicitly
        // every participating module must belong to the same player.
        for (const auto& s : slots_) {
            if (s.command) continue;
            std::optional<PlayerId> owner;
            for (const auto& part : s.participants)
                for (auto ci : part) {
                    if (owner && *owner != commands_[ci].owner)
                        fail(BuildErrorKind::Ownership, "action [" + game_.action_labels[s.action] +
                                                            "] is shared by modules of different players; assign it in a player block");
                    owner = commands_[ci].owner;
                }
        }
    }

    void compile_labels_and_rewards() {
        for (const auto& l : ast_.labels) labels_.emplace_back(l.name, compile(l.expr));
        for (const auto& r : ast_.rewards) {
            std::vector<std::tuple<std::optional<std::string>, ExprPtr, ExprPtr>> items;
            for (const auto& item : r.items) items.emplace_back(item.action, compile(item.guard), compile(item.value));
            rewards_.emplace_back(r.name, std::move(items));
        }
    }

    StateIndex index_of(const std::vector<std::int64_t>& val) {
        auto [it, fresh] = index_.try_emplace(val, valuations_.size());
        if (fresh) {
            if (valuations_.size() >= options_.state_limit)
                fail(BuildErrorKind::StateLimitExceeded,
                     "state limit of " + std::to_string(options_.state_limit) + " states exceeded");
            valuations_.push_back(val);
            choices_.emplace_back();
            owners_.push_back(0);
        }
        return it->second;
    }

    bool eval_guard(const CompiledCommand& c, const EvalContext& ctx) const {
        try {
            return as_bool(evaluate(*c.guard, ctx));
        } catch (const EvalError& e) {
            fail(BuildErrorKind::Evaluation, "line " + std::to_string(c.line) + ": guard: " + e.what());
        }
    }

    // Outcomes of one command: (probability, update index), zero-probability
    // updates dropped.
    std::vector<std::pair<double, std::size_t>> outcomes(const CompiledCommand& c, const EvalContext& ctx,
                                                         const std::vector<std::int64_t>& val) const {
        std::vector<std::pair<double, std::size_t>> out;
        double sum = 0.0;
        for (std::size_t u = 0; u < c.updates.size(); ++u) {
            double p = 0.0;
            try {
                p = as_real(evaluate(*c.updates[u].probability, ctx));
            } catch (const EvalError& e) {
                fail(BuildErrorKind::Evaluation, "line " + std::to_string(c.line) + ": probability: " + e.what());
            }
            if (!(p >= 0.0) || p > 1.0 + kProbabilityTolerance)
                fail(BuildErrorKind::ProbabilitySum, "line " + std::to_string(c.line) + ": probability " + std::to_string(p) +
                                                         " outside [0, 1] in state " + describe(val));
            sum += p;
            if (p > 0.0) out.emplace_back(p, u);
        }
        if (std::abs(sum - 1.0) > kProbabilityTolerance) {
            std::ostringstream msg;
            msg << "line " << c.line << ": probability sum " << sum << " in state " << describe(val);
            fail(BuildErrorKind::ProbabilitySum, msg.str());
        }
        return out;
    }

    void apply(const CompiledCommand& c, std::size_t u, const EvalContext& ctx, std::vector<std::int64_t>& next,
               std::vector<bool>& written, const std::vector<std::int64_t>& val) const {
        for (const auto& a : c.updates[u].assignments) {
            if (written[a.slot])
                fail(BuildErrorKind::AssignmentConflict, "variable '" + variables_[a.slot] +
                                                             "' is assigned twice by synchronizing commands in state " +
                                                             describe(val));
            written[a.slot] = true;
            std::int64_t v = 0;
            try {
                v = as_int(evaluate(*a.value, ctx));
            } catch (const EvalError& e) {
                fail(BuildErrorKind::Evaluation, "line " + std::to_string(c.line) + ": update of '" + variables_[a.slot] +
                                                     "': " + e.what());
            }
            const auto& b = bounds_[a.slot];
            if (v < b.low || v > b.high)
                fail(BuildErrorKind::OutOfRange, "line " + std::to_string(c.line) + ": value " + std::to_string(v) +
                                                     " for '" + variables_[a.slot] + "' outside [" + std::to_string(b.low) +
                                                     ".." + std::to_string(b.high) + "] from state " + describe(val));
            next[a.slot] = v;
        }
    }

    void add_choice(StateIndex s, ActionId action, const std::vector<const CompiledCommand*>& parts,
                    const EvalContext& ctx, std::vector<std::optional<PlayerId>>& owner_seen) {
        const auto val = valuations_[s];
        std::vector<std::vector<std::pair<double, std::size_t>>> outs;
        for (const auto* c : parts) outs.push_back(outcomes(*c, ctx, val));

        Choice choice;
        choice.action = action;
        std::vector<std::size_t> pick(parts.size(), 0);
        while (true) {
            double p = 1.0;
            std::vector<std::int64_t> next = val;
            std::vector<bool> written(val.size(), false);
            for (std::size_t i = 0; i < parts.size(); ++i) {
                const auto& [prob, u] = outs[i][pick[i]];
                p *= prob;
                apply(*parts[i], u, ctx, next, written, val);
            }
            StateIndex t = index_of(next);
            auto it = std::find_if(choice.branches.begin(), choice.branches.end(),
                                   [&](const Branch& b) { return b.target == t; });
            if (it != choice.branches.end()) {
                it->probability += p;
            } else {
                choice.branches.push_back({t, p});
            }
            bool done = true;
            for (std::size_t i = parts.size(); i > 0; --i) {
                if (++pick[i - 1] < outs[i - 1].size()) {
                    done = false;
                    break;
                }
                pick[i - 1] = 0;
            }
            if (done) break;
        }

        PlayerId owner = parts.front()->owner;
        if (!owner_seen[0]) {
            owner_seen[0] = owner;
        } else if (*owner_seen[0] != owner) {
            fail(BuildErrorKind::TurnViolation, "state " + describe(val) + " has enabled commands of players '" +
                                                    ast_.players[*owner_seen[0]].name + "' and '" +
                                                    ast_.players[owner].name + "'");
        }
        choices_[s].push_back(std::move(choice));
    }

    void explore(StateIndex s) {
        const auto val = valuations_[s];
        EvalContext ctx{val, {}};
        std::vector<std::optional<PlayerId>> owner_seen(1);
        for (const auto& slot : slots_) {
            if (slot.command) {
                const auto& c = commands_[*slot.command];
                if (eval_guard(c, ctx)) add_choice(s, slot.action, {&c}, ctx, owner_seen);
                continue;
            }
            std::vector<std::vector<const CompiledCommand*>> enabled;
            bool all = true;
            for (const auto& part : slot.participants) {
                std::vector<const CompiledCommand*> on;
                for (auto ci : part)
                    if (eval_guard(commands_[ci], ctx)) on.push_back(&commands_[ci]);
                if (on.empty()) {
                    all = false;
                    break;
                }
                enabled.push_back(std::move(on));
            }
            if (!all) continue;
            std::vector<std::size_t> pick(enabled.size(), 0);
            while (true) {
                std::vector<const CompiledCommand*> parts;
                for (std::size_t i = 0; i < enabled.size(); ++i) parts.push_back(enabled[i][pick[i]]);
                add_choice(s, slot.action, parts, ctx, owner_seen);
                std::size_t i = enabled.size();
                bool done = true;
                while (i > 0) {
                    --i;
                    if (++pick[i] < enabled[i].size()) {
                        done = false;
                        break;
                    }
                    pick[i] = 0;
                }
                if (done) break;
            }
        }
        if (choices_[s].empty()) {
            if (!options_.fix_deadlocks)
                fail(BuildErrorKind::Deadlock, "deadlock in state " + describe(val) + " (use fix-deadlocks to add a self-loop)");
            Choice loop;
            loop.action = intern_action(kDeadlockAction);
            loop.branches.push_back({s, 1.0});
            choices_[s].push_back(std::move(loop));
            owners_[s] = 0;
        } else {
            owners_[s] = *owner_seen[0];
        }
    }

    void evaluate_labels() {
        for (const auto& [name, expr] : labels_) {
            auto& bits = game_.labels[name];
            bits.assign(valuations_.size(), false);
            for (StateIndex s = 0; s < valuations_.size(); ++s) {
                try {
                    bits[s] = as_bool(evaluate(*expr, EvalContext{valuations_[s], {}}));
                } catch (const EvalError& e) {
                    fail(BuildErrorKind::Evaluation, "label \"" + name + "\": " + e.what());
                }
            }
        }
    }

    void evaluate_rewards() {
        for (const auto& [name, items] : rewards_) {
            RewardStructure rs;
            rs.state_rewards.assign(valuations_.size(), 0.0);
            bool has_action_items = std::any_of(items.begin(), items.end(),
                                                [](const auto& it) { return std::get<0>(it).has_value(); });
            if (has_action_items) {
                rs.action_rewards.resize(valuations_.size());
                for (StateIndex s = 0; s < valuations_.size(); ++s)
                    rs.action_rewards[s].assign(game_.states[s].choices.size(), 0.0);
            }
            for (StateIndex s = 0; s < valuations_.size(); ++s) {
                EvalContext ctx{valuations_[s], {}};
                for (const auto& [action, guard, value] : items) {
                    try {
                        if (!as_bool(evaluate(*guard, ctx))) continue;
                        double r = as_real(evaluate(*value, ctx));
                        if (!action) {
                            rs.state_rewards[s] += r;
                            continue;
                        }
                        const auto& choices = game_.states[s].choices;
                        for (std::size_t c = 0; c < choices.size(); ++c)
                            if (game_.action_labels[choices[c].action] == *action) rs.action_rewards[s][c] += r;
                    } catch (const EvalError& e) {
                        fail(BuildErrorKind::Evaluation, "rewards \"" + name + "\": " + e.what());
                    }
                }
            }
            game_.reward_structures.emplace(name, std::move(rs));
        }
    }

    const ModelAst& ast_;
    BuildOptions options_;
    StochasticGame game_;
    std::map<std::string, Value> constants_;
    std::map<std::string, std::size_t> slot_of_;
    std::vector<std::string> variables_;
    std::vector<Bounds> bounds_;
    std::vector<std::int64_t> initial_;
    std::map<std::string, ActionId> action_ids_;
    std::vector<CompiledCommand> commands_;
    std::vector<Slot> slots_;
    std::map<std::size_t, std::vector<std::size_t>> module_of_participant_;
    std::vector<std::pair<std::string, ExprPtr>> labels_;
    std::vector<std::pair<std::string, std::vector<std::tuple<std::optional<std::string>, ExprPtr, ExprPtr>>>> rewards_;

    std::vector<std::vector<std::int64_t>> valuations_;
    std::unordered_map<std::vector<std::int64_t>, StateIndex, ValuationHash> index_;
    std::vector<std::vector<Choice>> choices_;
    std::vector<PlayerId> owners_;
};

}  // namespace

ConstantOverrides parse_constant_overrides(const std::string& spec) {
    ConstantOverrides out;
    std::stringstream in(spec);
    for (std::string item; std::getline(in, item, ',');) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw BuildError(BuildErrorKind::BadConstant, "malformed constant override '" + item + "' (expected name=value)");
        std::string name = item.substr(0, eq), text = item.substr(eq + 1);
        auto toks = tokenize(text);
        TokenStream ts(toks);
        Value v;
        try {
            auto e = parse_expression(ts);
            if (!ts.at_end()) ts.fail("trailing input");
            v = evaluate(*fold_constants(e), EvalContext{});
        } catch (const std::exception& e) {
            throw BuildError(BuildErrorKind::BadConstant, "bad value for constant '" + name + "': " + e.what());
        }
        out[name] = v;
    }
    return out;
}

StochasticGame build_game(const ModelAst& ast, const ConstantOverrides& overrides, const BuildOptions& options) {
    return Builder(ast, overrides, options).build();
}

}  // namespace smg
