#include <set>
#include <sstream>

#include "smg/model.hpp"

namespace smg {

namespace {

class ModelParser {
public:
    explicit ModelParser(const std::string& text) : ts_(tokenize(text)) {}

    ModelAst parse() {
        ts_.expect_keyword("smg");
        while (!ts_.at_end()) {
            if (ts_.is_keyword("const")) {
                parse_constant();
            } else if (ts_.is_keyword("module")) {
                parse_module();
            } else if (ts_.is_keyword("player")) {
                parse_player();
            } else if (ts_.is_keyword("rewards")) {
                parse_rewards();
            } else if (ts_.is_keyword("label")) {
                parse_label();
            } else {
                ts_.fail("expected 'const', 'module', 'player', 'rewards' or 'label'");
            }
        }
        check_semantics();
        return std::move(ast_);
    }

private:
    void declare(const std::string& name, const Token& at) {
        if (!identifiers_.insert(name).second) throw ParseError("duplicate identifier '" + name + "'", at.line, at.column);
    }

    void parse_constant() {
        ts_.expect_keyword("const");
        ConstantDecl c;
        if (ts_.accept_keyword("int")) {
            c.type = ConstType::Int;
        } else if (ts_.accept_keyword("double")) {
            c.type = ConstType::Double;
        } else if (ts_.accept_keyword("bool")) {
            c.type = ConstType::Bool;
        }
        auto name = ts_.expect_identifier("constant name");
        declare(name.text, name);
        c.name = name.text;
        if (ts_.accept_symbol("=")) c.value = parse_expression(ts_);
        ts_.expect_symbol(";");
        ast_.constants.push_back(std::move(c));
    }

    void parse_module() {
        ts_.expect_keyword("module");
        auto name = ts_.expect_identifier("module name");
        declare(name.text, name);
        ModuleDecl m;
        m.name = name.text;
        while (!ts_.is_keyword("endmodule")) {
            if (ts_.at_end()) ts_.fail("expected 'endmodule'");
            if (ts_.is_symbol("[")) {
                m.commands.push_back(parse_command());
            } else {
                m.variables.push_back(parse_variable());
            }
        }
        ts_.expect_keyword("endmodule");
        ast_.modules.push_back(std::move(m));
    }

    VariableDecl parse_variable() {
        auto name = ts_.expect_identifier("variable declaration or command");
        declare(name.text, name);
        ts_.expect_symbol(":");
        VariableDecl v;
        v.name = name.text;
        if (ts_.is_keyword("int") || ts_.is_keyword("bool") || ts_.is_keyword("double")) {
            const auto& t = ts_.peek();
            throw ParseError("unbounded variable '" + name.text + "' (declare a range [lo..hi])", t.line, t.column);
        }
        ts_.expect_symbol("[");
        v.low = parse_expression(ts_);
        ts_.expect_symbol("..");
        v.high = parse_expression(ts_);
        ts_.expect_symbol("]");
        if (ts_.accept_keyword("init")) {
            v.init = parse_expression(ts_);
        } else {
            v.init = v.low;
        }
        ts_.expect_symbol(";");
        return v;
    }

    bool at_assignment_list() const {
        if (ts_.is_keyword("true") && (ts_.is_symbol(";", 1) || ts_.is_symbol("+", 1))) return true;
        return ts_.is_symbol("(") && ts_.peek(1).kind == TokenKind::Identifier && ts_.is_symbol("'", 2);
    }

    std::vector<Assignment> parse_assignments() {
        std::vector<Assignment> out;
        if (ts_.accept_keyword("true")) return out;
        do {
            ts_.expect_symbol("(");
            auto var = ts_.expect_identifier("variable");
            ts_.expect_symbol("'");
            ts_.expect_symbol("=");
            auto value = parse_expression(ts_);
            ts_.expect_symbol(")");
            assignment_sites_.push_back({var.text, var});
            out.push_back({var.text, value});
        } while (ts_.accept_symbol("&"));
        return out;
    }

    Command parse_command() {
        Command cmd;
        auto open = ts_.expect_symbol("[");
        cmd.line = open.line;
        if (ts_.peek().kind == TokenKind::Identifier) {
            auto act = ts_.next();
            cmd.action = act.text;
            declared_actions_.insert(act.text);
        }
        ts_.expect_symbol("]");
        cmd.guard = parse_expression(ts_);
        ts_.expect_symbol("->");
        do {
            Update u;
            if (at_assignment_list()) {
                u.probability = make_literal(std::int64_t{1});
            } else {
                u.probability = parse_expression(ts_);
                ts_.expect_symbol(":");
            }
            u.assignments = parse_assignments();
            cmd.updates.push_back(std::move(u));
        } while (ts_.accept_symbol("+"));
        ts_.expect_symbol(";");
        return cmd;
    }

    void parse_player() {
        ts_.expect_keyword("player");
        auto name = ts_.expect_identifier("player name");
        declare(name.text, name);
        PlayerDecl p;
        p.name = name.text;
        do {
            if (ts_.accept_symbol("[")) {
                auto act = ts_.expect_identifier("action label");
                ts_.expect_symbol("]");
                p.actions.push_back(act.text);
                player_action_sites_.push_back({act.text, act});
            } else {
                auto mod = ts_.expect_identifier("module name or [action]");
                p.modules.push_back(mod.text);
                player_module_sites_.push_back({mod.text, mod});
            }
        } while (ts_.accept_symbol(","));
        ts_.expect_keyword("endplayer");
        ast_.players.push_back(std::move(p));
    }

    void parse_rewards() {
        ts_.expect_keyword("rewards");
        if (ts_.peek().kind != TokenKind::String) ts_.fail("expected reward structure name in quotes");
        auto name = ts_.next();
        if (!reward_names_.insert(name.text).second)
            throw ParseError("duplicate reward structure \"" + name.text + "\"", name.line, name.column);
        RewardDecl r;
        r.name = name.text;
        while (!ts_.accept_keyword("endrewards")) {
            if (ts_.at_end()) ts_.fail("expected 'endrewards'");
            RewardItem item;
            if (ts_.accept_symbol("[")) {
                item.action = std::string();
                if (ts_.peek().kind == TokenKind::Identifier) item.action = ts_.next().text;
                ts_.expect_symbol("]");
            }
            item.guard = parse_expression(ts_);
            ts_.expect_symbol(":");
            item.value = parse_expression(ts_);
            ts_.expect_symbol(";");
            r.items.push_back(std::move(item));
        }
        ast_.rewards.push_back(std::move(r));
    }

    void parse_label() {
        ts_.expect_keyword("label");
        if (ts_.peek().kind != TokenKind::String) ts_.fail("expected label name in quotes");
        auto name = ts_.next();
        if (!label_names_.insert(name.text).second)
            throw ParseError("duplicate label \"" + name.text + "\"", name.line, name.column);
        ts_.expect_symbol("=");
        LabelDecl l;
        l.name = name.text;
        l.expr = parse_expression(ts_);
        ts_.expect_symbol(";");
        ast_.labels.push_back(std::move(l));
    }

    void check_semantics() {
        std::set<std::string> variables, modules;
        for (const auto& m : ast_.modules) {
            modules.insert(m.name);
            for (const auto& v : m.variables) variables.insert(v.name);
        }
        for (const auto& [var, at] : assignment_sites_)
            if (!variables.count(var))
                throw ParseError("assignment to undeclared variable '" + var + "'", at.line, at.column);
        std::set<std::string> owned_modules, owned_actions;
        for (const auto& [mod, at] : player_module_sites_) {
            if (!modules.count(mod)) throw ParseError("player block names unknown module '" + mod + "'", at.line, at.column);
            if (!owned_modules.insert(mod).second)
                throw ParseError("module '" + mod + "' belongs to more than one player", at.line, at.column);
        }
        for (const auto& [act, at] : player_action_sites_) {
            if (!declared_actions_.count(act))
                throw ParseError("player block names action [" + act + "] that no command declares", at.line, at.column);
            if (!owned_actions.insert(act).second)
                throw ParseError("action [" + act + "] belongs to more than one player", at.line, at.column);
        }
    }

    TokenStream ts_;
    ModelAst ast_;
    std::set<std::string> identifiers_;
    std::set<std::string> reward_names_;
    std::set<std::string> label_names_;
    std::set<std::string> declared_actions_;
    std::vector<std::pair<std::string, Token>> assignment_sites_;
    std::vector<std::pair<std::string, Token>> player_module_sites_;
    std::vector<std::pair<std::string, Token>> player_action_sites_;
};

bool same_expr(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    return structurally_equal(*a, *b);
}

}  // namespace

ModelAst parse_model(const std::string& text) { return ModelParser(text).parse(); }

std::string print_model(const ModelAst& ast) {
    std::ostringstream out;
    out << "smg\n\n";
    for (const auto& c : ast.constants) {
        out << "const " << (c.type == ConstType::Int ? "int" : c.type == ConstType::Double ? "double" : "bool") << ' '
            << c.name;
        if (c.value) out << " = " << print_expression(*c.value);
        out << ";\n";
    }
    if (!ast.constants.empty()) out << '\n';
    for (const auto& p : ast.players) {
        out << "player " << p.name << '\n';
        std::vector<std::string> items;
        for (const auto& m : p.modules) items.push_back(m);
        for (const auto& a : p.actions) items.push_back("[" + a + "]");
        for (std::size_t i = 0; i < items.size(); ++i) out << "  " << items[i] << (i + 1 < items.size() ? ",\n" : "\n");
        out << "endplayer\n\n";
    }
    for (const auto& m : ast.modules) {
        out << "module " << m.name << '\n';
        for (const auto& v : m.variables)
            out << "  " << v.name << " : [" << print_expression(*v.low) << ".." << print_expression(*v.high)
                << "] init " << print_expression(*v.init) << ";\n";
        for (const auto& c : m.commands) {
            out << "  [" << c.action.value_or("") << "] " << print_expression(*c.guard) << " ->";
            for (std::size_t i = 0; i < c.updates.size(); ++i) {
                const auto& u = c.updates[i];
                out << (i ? " + " : " ") << print_expression(*u.probability) << " : ";
                if (u.assignments.empty()) out << "true";
                for (std::size_t j = 0; j < u.assignments.size(); ++j)
                    out << (j ? " & " : "") << '(' << u.assignments[j].variable << "'=" << print_expression(*u.assignments[j].value)
                        << ')';
            }
            out << ";\n";
        }
        out << "endmodule\n\n";
    }
    for (const auto& r : ast.rewards) {
        out << "rewards \"" << r.name << "\"\n";
        for (const auto& item : r.items) {
            out << "  ";
            if (item.action) out << '[' << *item.action << "] ";
            out << print_expression(*item.guard) << " : " << print_expression(*item.value) << ";\n";
        }
        out << "endrewards\n\n";
    }
    for (const auto& l : ast.labels) out << "label \"" << l.name << "\" = " << print_expression(*l.expr) << ";\n";
    return out.str();
}

bool equivalent(const ModelAst& a, const ModelAst& b) {
    if (a.constants.size() != b.constants.size() || a.modules.size() != b.modules.size() ||
        a.players.size() != b.players.size() || a.rewards.size() != b.rewards.size() ||
        a.labels.size() != b.labels.size())
        return false;
    for (std::size_t i = 0; i < a.constants.size(); ++i) {
        const auto &x = a.constants[i], &y = b.constants[i];
        if (x.type != y.type || x.name != y.name || !same_expr(x.value, y.value)) return false;
    }
    for (std::size_t i = 0; i < a.modules.size(); ++i) {
        const auto &x = a.modules[i], &y = b.modules[i];
        if (x.name != y.name || x.variables.size() != y.variables.size() || x.commands.size() != y.commands.size())
            return false;
        for (std::size_t j = 0; j < x.variables.size(); ++j) {
            const auto &u = x.variables[j], &v = y.variables[j];
            if (u.name != v.name || !same_expr(u.low, v.low) || !same_expr(u.high, v.high) || !same_expr(u.init, v.init))
                return false;
        }
        for (std::size_t j = 0; j < x.commands.size(); ++j) {
            const auto &c = x.commands[j], &d = y.commands[j];
            if (c.action != d.action || !same_expr(c.guard, d.guard) || c.updates.size() != d.updates.size()) return false;
            for (std::size_t k = 0; k < c.updates.size(); ++k) {
                const auto &u = c.updates[k], &v = d.updates[k];
                if (!same_expr(u.probability, v.probability) || u.assignments.size() != v.assignments.size()) return false;
                for (std::size_t l = 0; l < u.assignments.size(); ++l)
                    if (u.assignments[l].variable != v.assignments[l].variable ||
                        !same_expr(u.assignments[l].value, v.assignments[l].value))
                        return false;
            }
        }
    }
    for (std::size_t i = 0; i < a.players.size(); ++i) {
        const auto &x = a.players[i], &y = b.players[i];
        if (x.name != y.name || x.modules != y.modules || x.actions != y.actions) return false;
    }
    for (std::size_t i = 0; i < a.rewards.size(); ++i) {
        const auto &x = a.rewards[i], &y = b.rewards[i];
        if (x.name != y.name || x.items.size() != y.items.size()) return false;
        for (std::size_t j = 0; j < x.items.size(); ++j)
            if (x.items[j].action != y.items[j].action || !same_expr(x.items[j].guard, y.items[j].guard) ||
                !same_expr(x.items[j].value, y.items[j].value))
                return false;
    }
    for (std::size_t i = 0; i < a.labels.size(); ++i)
        if (a.labels[i].name != b.labels[i].name || !same_expr(a.labels[i].expr, b.labels[i].expr)) return false;
    return true;
}

}  // namespace smg
