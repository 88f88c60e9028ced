#include "smg/property.hpp"

#include <array>
#include <charconv>
#include <sstream>

namespace smg {

namespace {

std::string number(double v) {
    std::array<char, 32> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

bool same(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    return structurally_equal(*a, *b);
}

class PropertyParser {
public:
    explicit PropertyParser(const std::string& text) : ts_(tokenize(text)) {}

    Property parse() {
        Property p;
        const Token start = ts_.peek();
        if (ts_.is_symbol("<")) p.shield = parse_annotation();
        parse_coalition(p);
        parse_operator(p);
        ts_.expect_symbol("=");
        ts_.expect_symbol("?");
        ts_.expect_symbol("[");
        p.path = parse_path();
        ts_.expect_symbol("]");
        if (!ts_.at_end()) ts_.fail("unexpected trailing input");
        check(p, start);
        return p;
    }

private:
    ShieldAnnotation parse_annotation() {
        ts_.expect_symbol("<");
        auto kind = ts_.expect_identifier("shield kind");
        ShieldAnnotation a;
        if (kind.text == "PreSafety" || kind.text == "PostSafety") {
            a.kind = kind.text == "PreSafety" ? ShieldKind::PreSafety : ShieldKind::PostSafety;
            ts_.expect_symbol(",");
            auto which = ts_.expect_identifier("'gamma' or 'lambda'");
            if (which.text != "gamma" && which.text != "lambda")
                throw ParseError("malformed annotation: expected 'gamma' or 'lambda', found '" + which.text + "'",
                                 which.line, which.column);
            ts_.expect_symbol("=");
            const auto& t = ts_.peek();
            if (t.kind != TokenKind::Integer && t.kind != TokenKind::Real) ts_.fail("malformed annotation: expected a number");
            double v = std::stod(ts_.next().text);
            if (!(v >= 0.0 && v <= 1.0))
                throw ParseError(which.text + " out of range [0, 1]", which.line, which.column);
            a.threshold = which.text == "gamma" ? Threshold::absolute(v) : Threshold::relative(v);
        } else if (kind.text == "Optimal") {
            a.kind = ShieldKind::Optimal;
        } else {
            throw ParseError("malformed annotation: unknown shield kind '" + kind.text + "'", kind.line, kind.column);
        }
        ts_.expect_symbol(">");
        return a;
    }

    void parse_coalition(Property& p) {
        ts_.expect_symbol("<<");
        do {
            auto t = ts_.peek();
            if (t.kind == TokenKind::Identifier || t.kind == TokenKind::Integer) {
                p.coalition.push_back(ts_.next().text);
            } else {
                ts_.fail("expected player name");
            }
        } while (ts_.accept_symbol(","));
        ts_.expect_symbol(">>");
    }

    void parse_operator(Property& p) {
        auto op = ts_.expect_identifier("operator P or R");
        std::string name = op.text;
        bool reward = false;
        if (name == "R") {
            reward = true;
            ts_.expect_symbol("{");
            if (ts_.peek().kind != TokenKind::String) ts_.fail("expected reward structure name in quotes");
            p.reward_name = ts_.next().text;
            ts_.expect_symbol("}");
            name = ts_.expect_identifier("'max' or 'min'").text;
        } else if (name == "P") {
            name = ts_.expect_identifier("'max' or 'min'").text;
        } else if (name == "Pmax" || name == "Pmin") {
            name = name.substr(1);
        } else {
            throw ParseError("unknown operator '" + op.text + "'", op.line, op.column);
        }
        if (name != "max" && name != "min") throw ParseError("unknown operator '" + op.text + name + "'", op.line, op.column);
        bool max = name == "max";
        p.quantifier = reward ? (max ? Quantifier::Rmax : Quantifier::Rmin) : (max ? Quantifier::Pmax : Quantifier::Pmin);
    }

    std::size_t parse_bound() {
        const auto& t = ts_.peek();
        if (t.kind != TokenKind::Integer) ts_.fail("expected a step bound");
        return std::stoull(ts_.next().text);
    }

    PathFormula parse_path() {
        PathFormula path;
        if (ts_.is_keyword("S") && ts_.is_symbol("]", 1)) {
            ts_.next();
            path.kind = PathKind::SteadyState;
            return path;
        }
        if (ts_.is_keyword("X")) {
            ts_.next();
            path.kind = PathKind::Next;
            path.right = parse_expression(ts_);
            return path;
        }
        if (ts_.is_keyword("F") || ts_.is_keyword("G")) {
            bool finally = ts_.next().text == "F";
            if (ts_.accept_symbol("<=")) {
                path.bound = parse_bound();
                path.kind = finally ? PathKind::FinallyBounded : PathKind::GloballyBounded;
            } else {
                path.kind = finally ? PathKind::Finally : PathKind::Globally;
            }
            path.right = parse_expression(ts_);
            return path;
        }
        path.left = parse_expression(ts_);
        if (!ts_.accept_keyword("U")) ts_.fail("unknown path operator; expected X, F, G, U or S");
        if (ts_.accept_symbol("<=")) {
            path.bound = parse_bound();
            path.kind = PathKind::UntilBounded;
        } else {
            path.kind = PathKind::Until;
        }
        path.right = parse_expression(ts_);
        return path;
    }

    static void check(const Property& p, const Token& at) {
        auto fail = [&](const std::string& m) { throw ParseError(m, at.line, at.column); };
        bool prob = is_probability(p.quantifier);
        if (p.path.kind == PathKind::SteadyState && prob) fail("the steady-state operator S requires an R operator");
        if (p.path.kind != PathKind::SteadyState && !prob)
            fail("R operators support only the steady-state path formula [ S ]");
        if (!p.shield) return;
        switch (p.shield->kind) {
            case ShieldKind::PreSafety:
            case ShieldKind::PostSafety:
                if (!prob || p.path.kind != PathKind::GloballyBounded)
                    fail("annotation/quantifier mismatch: safety shields need a P operator with G<=k");
                if (p.path.bound < 1) fail("safety shields need a horizon k >= 1");
                break;
            case ShieldKind::Optimal:
                if (prob) fail("annotation/quantifier mismatch: Optimal shields need an R operator with [ S ]");
                break;
        }
    }

    TokenStream ts_;
};

}  // namespace

bool operator==(const Property& a, const Property& b) {
    return a.shield == b.shield && a.coalition == b.coalition && a.quantifier == b.quantifier &&
           a.reward_name == b.reward_name && a.path.kind == b.path.kind && a.path.bound == b.path.bound &&
           same(a.path.left, b.path.left) && same(a.path.right, b.path.right);
}

Property parse_property(const std::string& text) { return PropertyParser(text).parse(); }

std::vector<Property> parse_properties_file(const std::string& text) {
    std::vector<Property> out;
    std::istringstream in(text);
    std::size_t lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(parse_property(line));
        } catch (const ParseError& e) {
            throw ParseError(e.message(), lineno, e.column());
        }
    }
    return out;
}

std::string print_property(const Property& p) {
    std::string out;
    if (p.shield) {
        switch (p.shield->kind) {
            case ShieldKind::PreSafety: out += "<PreSafety, "; break;
            case ShieldKind::PostSafety: out += "<PostSafety, "; break;
            case ShieldKind::Optimal: out += "<Optimal> "; break;
        }
        if (p.shield->threshold) {
            out += p.shield->threshold->kind == Threshold::Kind::Absolute ? "gamma=" : "lambda=";
            out += number(p.shield->threshold->value) + "> ";
        }
    }
    out += "<<";
    for (std::size_t i = 0; i < p.coalition.size(); ++i) out += (i ? "," : "") + p.coalition[i];
    out += ">> ";
    switch (p.quantifier) {
        case Quantifier::Pmax: out += "Pmax"; break;
        case Quantifier::Pmin: out += "Pmin"; break;
        case Quantifier::Rmax: out += "R{\"" + p.reward_name + "\"}max"; break;
        case Quantifier::Rmin: out += "R{\"" + p.reward_name + "\"}min"; break;
    }
    out += "=? [ ";
    const auto bound = std::to_string(p.path.bound);
    switch (p.path.kind) {
        case PathKind::Next: out += "X " + print_expression(*p.path.right); break;
        case PathKind::Finally: out += "F " + print_expression(*p.path.right); break;
        case PathKind::FinallyBounded: out += "F<=" + bound + " " + print_expression(*p.path.right); break;
        case PathKind::Globally: out += "G " + print_expression(*p.path.right); break;
        case PathKind::GloballyBounded: out += "G<=" + bound + " " + print_expression(*p.path.right); break;
        case PathKind::Until:
            out += print_expression(*p.path.left) + " U " + print_expression(*p.path.right);
            break;
        case PathKind::UntilBounded:
            out += print_expression(*p.path.left) + " U<=" + bound + " " + print_expression(*p.path.right);
            break;
        case PathKind::SteadyState: out += "S"; break;
    }
    return out + " ]";
}

std::vector<bool> evaluate_state_formula(const StochasticGame& game, const ExprPtr& formula) {
    std::map<std::string, std::size_t> slots;
    for (std::size_t i = 0; i < game.variables.size(); ++i) slots[game.variables[i]] = i;

    auto label_known = [&](const std::string& name) { return game.labels.count(name) || name == "init"; };
    auto resolved = resolve_names(formula, [&](const Expr& id) -> ExprPtr {
        auto e = std::make_shared<Expr>(id);
        if (auto it = slots.find(id.name); it != slots.end()) {
            e->op = ExprOp::Variable;
            e->slot = it->second;
        } else if (label_known(id.name)) {
            e->op = ExprOp::Label;
        } else {
            throw BindError("unknown label or variable '" + id.name + "'");
        }
        return e;
    });
    std::function<void(const Expr&)> check_labels = [&](const Expr& e) {
        if (e.op == ExprOp::Label && !label_known(e.name)) throw BindError("unknown label \"" + e.name + "\"");
        for (const auto& a : e.args) check_labels(*a);
    };
    check_labels(*resolved);

    std::vector<bool> out(game.num_states());
    for (StateIndex s = 0; s < game.num_states(); ++s) {
        EvalContext ctx{game.states[s].valuation, [&](const std::string& name) {
                            if (auto it = game.labels.find(name); it != game.labels.end()) return bool(it->second[s]);
                            return s == game.initial_state;
                        }};
        try {
            out[s] = as_bool(evaluate(*resolved, ctx));
        } catch (const EvalError& e) {
            throw BindError(std::string("state formula: ") + e.what());
        }
    }
    return out;
}

BoundProperty bind(const Property& property, const StochasticGame& game) {
    BoundProperty b;
    b.property = property;
    for (const auto& name : property.coalition) {
        auto id = game.player_index(name);
        if (!id) {
            // numeric player references are 1-based, as in <<1, 2>>
            bool numeric = !name.empty() && name.find_first_not_of("0123456789") == std::string::npos;
            if (numeric) {
                auto k = std::stoull(name);
                if (k >= 1 && k <= game.players.size()) id = k - 1;
            }
        }
        if (!id) throw BindError("unknown player '" + name + "' in coalition");
        b.coalition.members.insert(*id);
    }
    b.direction = direction_of(property.quantifier);
    if (!is_probability(property.quantifier)) {
        auto it = game.reward_structures.find(property.reward_name);
        if (it == game.reward_structures.end())
            throw BindError("unknown reward structure \"" + property.reward_name + "\"");
        b.reward = &it->second;
    }
    if (property.path.left) b.left = evaluate_state_formula(game, property.path.left);
    if (property.path.right) b.right = evaluate_state_formula(game, property.path.right);
    return b;
}

}  // namespace smg
