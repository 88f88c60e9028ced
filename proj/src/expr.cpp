#include "smg/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

namespace smg {

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      message_(what),
      line_(line),
      column_(column) {}

// ---------------------------------------------------------------------------
// Lexer

namespace {

constexpr std::array<std::string_view, 9> kLongSymbols = {"<<", ">>", "<=", ">=", "!=", "=>", "->", "..", "&&"};
constexpr std::string_view kShortSymbols = "[](){};:,'=<>+-*/&|!?";

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0, line = 1, col = 1;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
            while (i < text.size() && text[i] != '\n') advance(1);
            continue;
        }
        Token tok;
        tok.line = line;
        tok.column = col;
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < text.size() && ident_char(text[j])) ++j;
            tok.kind = TokenKind::Identifier;
            tok.text = std::string(text.substr(i, j - i));
            advance(j - i);
        } else if (digit(c) || (c == '.' && i + 1 < text.size() && digit(text[i + 1]))) {
            std::size_t j = i;
            bool real = false;
            while (j < text.size() && digit(text[j])) ++j;
            if (j + 1 < text.size() && text[j] == '.' && digit(text[j + 1])) {
                real = true;
                ++j;
                while (j < text.size() && digit(text[j])) ++j;
            } else if (j < text.size() && text[j] == '.' && (j + 1 >= text.size() || text[j + 1] != '.')) {
                real = true;  // "1." style
                ++j;
            }
            if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
                if (k < text.size() && digit(text[k])) {
                    real = true;
                    j = k;
                    while (j < text.size() && digit(text[j])) ++j;
                }
            }
            tok.kind = real ? TokenKind::Real : TokenKind::Integer;
            tok.text = std::string(text.substr(i, j - i));
            advance(j - i);
        } else if (c == '"') {
            std::size_t j = i + 1;
            while (j < text.size() && text[j] != '"' && text[j] != '\n') ++j;
            if (j >= text.size() || text[j] != '"') throw ParseError("unterminated string", line, col);
            tok.kind = TokenKind::String;
            tok.text = std::string(text.substr(i + 1, j - i - 1));
            advance(j + 1 - i);
        } else {
            bool matched = false;
            for (auto sym : kLongSymbols) {
                if (text.substr(i, sym.size()) == sym) {
                    tok.kind = TokenKind::Symbol;
                    tok.text = std::string(sym);
                    advance(sym.size());
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                if (kShortSymbols.find(c) == std::string_view::npos)
                    throw ParseError(std::string("unexpected character '") + c + "'", line, col);
                tok.kind = TokenKind::Symbol;
                tok.text = std::string(1, c);
                advance(1);
            }
            if (tok.text == "&&") tok.text = "&";
        }
        out.push_back(std::move(tok));
    }
    Token end;
    end.kind = TokenKind::End;
    end.line = line;
    end.column = col;
    out.push_back(end);
    return out;
}

const Token& TokenStream::peek(std::size_t ahead) const {
    auto idx = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[idx];
}

Token TokenStream::next() {
    Token t = peek();
    if (pos_ < tokens_.size() - 1) ++pos_;
    return t;
}

bool TokenStream::is_symbol(std::string_view sym, std::size_t ahead) const {
    const auto& t = peek(ahead);
    return t.kind == TokenKind::Symbol && t.text == sym;
}

bool TokenStream::is_keyword(std::string_view word, std::size_t ahead) const {
    const auto& t = peek(ahead);
    return t.kind == TokenKind::Identifier && t.text == word;
}

bool TokenStream::accept_symbol(std::string_view sym) {
    if (!is_symbol(sym)) return false;
    next();
    return true;
}

bool TokenStream::accept_keyword(std::string_view word) {
    if (!is_keyword(word)) return false;
    next();
    return true;
}

Token TokenStream::expect_symbol(std::string_view sym) {
    if (!is_symbol(sym)) fail("expected '" + std::string(sym) + "'");
    return next();
}

Token TokenStream::expect_keyword(std::string_view word) {
    if (!is_keyword(word)) fail("expected '" + std::string(word) + "'");
    return next();
}

Token TokenStream::expect_identifier(std::string_view what) {
    if (peek().kind != TokenKind::Identifier) fail("expected " + std::string(what));
    return next();
}

void TokenStream::fail(const std::string& message) const {
    const auto& t = peek();
    std::string found = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(message + ", found " + found, t.line, t.column);
}

// ---------------------------------------------------------------------------
// Values

std::string value_to_string(const Value& v) {
    if (auto b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    if (auto i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    double d = std::get<double>(v);
    std::array<char, 32> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), d);
    std::string s(buf.data(), res.ptr);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

double as_real(const Value& v) {
    if (auto i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (auto d = std::get_if<double>(&v)) return *d;
    throw EvalError("expected a number, got a boolean");
}

std::int64_t as_int(const Value& v) {
    if (auto i = std::get_if<std::int64_t>(&v)) return *i;
    if (std::holds_alternative<double>(v)) throw EvalError("expected an integer, got a real number");
    throw EvalError("expected an integer, got a boolean");
}

bool as_bool(const Value& v) {
    if (auto b = std::get_if<bool>(&v)) return *b;
    throw EvalError("expected a boolean, got a number");
}

ExprPtr make_literal(Value v) {
    auto e = std::make_shared<Expr>();
    e->op = ExprOp::Literal;
    e->literal = v;
    return e;
}

ExprPtr make_node(ExprOp op, std::vector<ExprPtr> args) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->args = std::move(args);
    return e;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

ExprPtr with_pos(std::shared_ptr<Expr> e, const Token& t) {
    e->line = t.line;
    e->column = t.column;
    return e;
}

ExprPtr binary(ExprOp op, ExprPtr a, ExprPtr b, const Token& t) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->args = {std::move(a), std::move(b)};
    return with_pos(std::move(e), t);
}

ExprPtr parse_ite(TokenStream& ts);

ExprPtr parse_primary(TokenStream& ts) {
    const Token t = ts.peek();
    switch (t.kind) {
        case TokenKind::Integer: {
            ts.next();
            std::int64_t v = 0;
            auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
            if (res.ec != std::errc()) throw ParseError("integer literal out of range", t.line, t.column);
            auto e = std::make_shared<Expr>();
            e->literal = v;
            return with_pos(std::move(e), t);
        }
        case TokenKind::Real: {
            ts.next();
            auto e = std::make_shared<Expr>();
            e->literal = std::stod(t.text);
            return with_pos(std::move(e), t);
        }
        case TokenKind::String: {
            ts.next();
            auto e = std::make_shared<Expr>();
            e->op = ExprOp::Label;
            e->name = t.text;
            return with_pos(std::move(e), t);
        }
        case TokenKind::Identifier: {
            ts.next();
            if (t.text == "true" || t.text == "false") {
                auto e = std::make_shared<Expr>();
                e->literal = (t.text == "true");
                return with_pos(std::move(e), t);
            }
            if ((t.text == "min" || t.text == "max") && ts.is_symbol("(")) {
                ts.next();
                auto e = std::make_shared<Expr>();
                e->op = t.text == "min" ? ExprOp::Min : ExprOp::Max;
                e->args.push_back(parse_ite(ts));
                while (ts.accept_symbol(",")) e->args.push_back(parse_ite(ts));
                ts.expect_symbol(")");
                if (e->args.size() < 2) throw ParseError(t.text + " needs at least two arguments", t.line, t.column);
                return with_pos(std::move(e), t);
            }
            auto e = std::make_shared<Expr>();
            e->op = ExprOp::Identifier;
            e->name = t.text;
            return with_pos(std::move(e), t);
        }
        case TokenKind::Symbol:
            if (t.text == "(") {
                ts.next();
                auto inner = parse_ite(ts);
                ts.expect_symbol(")");
                return inner;
            }
            break;
        case TokenKind::End:
            break;
    }
    ts.fail("expected an expression");
}

ExprPtr parse_unary(TokenStream& ts) {
    if (ts.is_symbol("-")) {
        auto t = ts.next();
        auto e = std::make_shared<Expr>();
        e->op = ExprOp::Negate;
        e->args = {parse_unary(ts)};
        return with_pos(std::move(e), t);
    }
    return parse_primary(ts);
}

ExprPtr parse_mul(TokenStream& ts) {
    auto lhs = parse_unary(ts);
    while (ts.is_symbol("*") || ts.is_symbol("/")) {
        auto t = ts.next();
        lhs = binary(t.text == "*" ? ExprOp::Mul : ExprOp::Div, lhs, parse_unary(ts), t);
    }
    return lhs;
}

ExprPtr parse_add(TokenStream& ts) {
    auto lhs = parse_mul(ts);
    while (ts.is_symbol("+") || ts.is_symbol("-")) {
        auto t = ts.next();
        lhs = binary(t.text == "+" ? ExprOp::Add : ExprOp::Sub, lhs, parse_mul(ts), t);
    }
    return lhs;
}

ExprPtr parse_rel(TokenStream& ts) {
    auto lhs = parse_add(ts);
    static constexpr std::array<std::pair<std::string_view, ExprOp>, 6> ops = {{
        {"=", ExprOp::Eq},
        {"!=", ExprOp::Ne},
        {"<", ExprOp::Lt},
        {"<=", ExprOp::Le},
        {">", ExprOp::Gt},
        {">=", ExprOp::Ge},
    }};
    for (const auto& [sym, op] : ops) {
        if (ts.is_symbol(sym)) {
            auto t = ts.next();
            return binary(op, lhs, parse_add(ts), t);
        }
    }
    return lhs;
}

ExprPtr parse_not(TokenStream& ts) {
    if (ts.is_symbol("!")) {
        auto t = ts.next();
        auto e = std::make_shared<Expr>();
        e->op = ExprOp::Not;
        e->args = {parse_not(ts)};
        return with_pos(std::move(e), t);
    }
    return parse_rel(ts);
}

ExprPtr parse_and(TokenStream& ts) {
    auto lhs = parse_not(ts);
    while (ts.is_symbol("&")) {
        auto t = ts.next();
        lhs = binary(ExprOp::And, lhs, parse_not(ts), t);
    }
    return lhs;
}

ExprPtr parse_or(TokenStream& ts) {
    auto lhs = parse_and(ts);
    while (ts.is_symbol("|")) {
        auto t = ts.next();
        lhs = binary(ExprOp::Or, lhs, parse_and(ts), t);
    }
    return lhs;
}

ExprPtr parse_implies(TokenStream& ts) {
    auto lhs = parse_or(ts);
    if (ts.is_symbol("=>")) {
        auto t = ts.next();
        return binary(ExprOp::Implies, lhs, parse_implies(ts), t);
    }
    return lhs;
}

ExprPtr parse_ite(TokenStream& ts) {
    auto cond = parse_implies(ts);
    if (ts.is_symbol("?")) {
        auto t = ts.next();
        auto a = parse_ite(ts);
        ts.expect_symbol(":");
        auto b = parse_ite(ts);
        auto e = std::make_shared<Expr>();
        e->op = ExprOp::Ite;
        e->args = {cond, a, b};
        return with_pos(std::move(e), t);
    }
    return cond;
}

int precedence(ExprOp op) {
    switch (op) {
        case ExprOp::Ite: return 0;
        case ExprOp::Implies: return 1;
        case ExprOp::Or: return 2;
        case ExprOp::And: return 3;
        case ExprOp::Not: return 4;
        case ExprOp::Eq:
        case ExprOp::Ne:
        case ExprOp::Lt:
        case ExprOp::Le:
        case ExprOp::Gt:
        case ExprOp::Ge: return 5;
        case ExprOp::Add:
        case ExprOp::Sub: return 6;
        case ExprOp::Mul:
        case ExprOp::Div: return 7;
        case ExprOp::Negate: return 8;
        default: return 9;
    }
}

std::string_view symbol_of(ExprOp op) {
    switch (op) {
        case ExprOp::And: return "&";
        case ExprOp::Or: return "|";
        case ExprOp::Implies: return "=>";
        case ExprOp::Eq: return "=";
        case ExprOp::Ne: return "!=";
        case ExprOp::Lt: return "<";
        case ExprOp::Le: return "<=";
        case ExprOp::Gt: return ">";
        case ExprOp::Ge: return ">=";
        case ExprOp::Add: return "+";
        case ExprOp::Sub: return "-";
        case ExprOp::Mul: return "*";
        case ExprOp::Div: return "/";
        default: return "?";
    }
}

std::string wrap(const Expr& e, int min_prec) {
    auto s = print_expression(e);
    return precedence(e.op) < min_prec ? "(" + s + ")" : s;
}

}  // namespace

ExprPtr parse_expression(TokenStream& ts) { return parse_ite(ts); }

std::string print_expression(const Expr& e) {
    switch (e.op) {
        case ExprOp::Literal: return value_to_string(e.literal);
        case ExprOp::Identifier:
        case ExprOp::Variable: return e.name;
        case ExprOp::Label: return "\"" + e.name + "\"";
        case ExprOp::Not: return "!" + wrap(*e.args[0], precedence(ExprOp::Not));
        case ExprOp::Negate: return "-" + wrap(*e.args[0], precedence(ExprOp::Negate));
        case ExprOp::Min:
        case ExprOp::Max: {
            std::string s = e.op == ExprOp::Min ? "min(" : "max(";
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                if (i) s += ", ";
                s += print_expression(*e.args[i]);
            }
            return s + ")";
        }
        case ExprOp::Ite:
            return wrap(*e.args[0], 1) + " ? " + wrap(*e.args[1], 0) + " : " + wrap(*e.args[2], 0);
        case ExprOp::Implies:
            // right associative
            return wrap(*e.args[0], 2) + " => " + wrap(*e.args[1], 1);
        case ExprOp::Eq:
        case ExprOp::Ne:
        case ExprOp::Lt:
        case ExprOp::Le:
        case ExprOp::Gt:
        case ExprOp::Ge: {
            int p = precedence(e.op);
            return wrap(*e.args[0], p + 1) + symbol_of(e.op).data() + wrap(*e.args[1], p + 1);
        }
        default: {
            // left-associative binary operators
            int p = precedence(e.op);
            std::string sep = (e.op == ExprOp::And || e.op == ExprOp::Or) ? std::string(" ") + symbol_of(e.op).data() + " "
                                                                           : std::string(symbol_of(e.op));
            return wrap(*e.args[0], p) + sep + wrap(*e.args[1], p + 1);
        }
    }
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.op != b.op || a.args.size() != b.args.size()) return false;
    switch (a.op) {
        case ExprOp::Literal:
            if (a.literal != b.literal) return false;
            break;
        case ExprOp::Identifier:
        case ExprOp::Label:
        case ExprOp::Variable:
            if (a.name != b.name) return false;
            break;
        default: break;
    }
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!structurally_equal(*a.args[i], *b.args[i])) return false;
    return true;
}

ExprPtr resolve_names(const ExprPtr& e, const std::function<ExprPtr(const Expr&)>& resolve) {
    if (e->op == ExprOp::Identifier) {
        if (auto r = resolve(*e)) return r;
        return e;
    }
    if (e->args.empty()) return e;
    auto copy = std::make_shared<Expr>(*e);
    for (auto& a : copy->args) a = resolve_names(a, resolve);
    return copy;
}

namespace {

bool is_constant(const Expr& e) {
    if (e.op == ExprOp::Variable || e.op == ExprOp::Label || e.op == ExprOp::Identifier) return false;
    for (const auto& a : e.args)
        if (!is_constant(*a)) return false;
    return true;
}

}  // namespace

ExprPtr fold_constants(const ExprPtr& e) {
    if (e->op == ExprOp::Literal) return e;
    if (is_constant(*e)) {
        auto lit = std::make_shared<Expr>();
        lit->literal = evaluate(*e, EvalContext{});
        lit->line = e->line;
        lit->column = e->column;
        return lit;
    }
    if (e->args.empty()) return e;
    auto copy = std::make_shared<Expr>(*e);
    for (auto& a : copy->args) a = fold_constants(a);
    return copy;
}

namespace {

bool numeric_compare(ExprOp op, const Value& a, const Value& b) {
    if (std::holds_alternative<bool>(a) || std::holds_alternative<bool>(b)) {
        if (op != ExprOp::Eq && op != ExprOp::Ne) throw EvalError("ordering comparison on booleans");
        bool eq = as_bool(a) == as_bool(b);
        return op == ExprOp::Eq ? eq : !eq;
    }
    if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
        auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
        switch (op) {
            case ExprOp::Eq: return x == y;
            case ExprOp::Ne: return x != y;
            case ExprOp::Lt: return x < y;
            case ExprOp::Le: return x <= y;
            case ExprOp::Gt: return x > y;
            default: return x >= y;
        }
    }
    double x = as_real(a), y = as_real(b);
    switch (op) {
        case ExprOp::Eq: return x == y;
        case ExprOp::Ne: return x != y;
        case ExprOp::Lt: return x < y;
        case ExprOp::Le: return x <= y;
        case ExprOp::Gt: return x > y;
        default: return x >= y;
    }
}

Value arithmetic(ExprOp op, const Value& a, const Value& b) {
    if (op == ExprOp::Div) return as_real(a) / as_real(b);
    if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
        auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
        switch (op) {
            case ExprOp::Add: return x + y;
            case ExprOp::Sub: return x - y;
            default: return x * y;
        }
    }
    double x = as_real(a), y = as_real(b);
    switch (op) {
        case ExprOp::Add: return x + y;
        case ExprOp::Sub: return x - y;
        default: return x * y;
    }
}

}  // namespace

Value evaluate(const Expr& e, const EvalContext& ctx) {
    switch (e.op) {
        case ExprOp::Literal: return e.literal;
        case ExprOp::Identifier: throw EvalError("unknown identifier '" + e.name + "'");
        case ExprOp::Variable:
            if (e.slot >= ctx.valuation.size()) throw EvalError("variable '" + e.name + "' has no value here");
            return ctx.valuation[e.slot];
        case ExprOp::Label:
            if (!ctx.label) throw EvalError("label \"" + e.name + "\" used outside a state context");
            return ctx.label(e.name);
        case ExprOp::Not: return !as_bool(evaluate(*e.args[0], ctx));
        case ExprOp::Negate: {
            auto v = evaluate(*e.args[0], ctx);
            if (auto i = std::get_if<std::int64_t>(&v)) return -*i;
            return -as_real(v);
        }
        case ExprOp::And: return as_bool(evaluate(*e.args[0], ctx)) && as_bool(evaluate(*e.args[1], ctx));
        case ExprOp::Or: return as_bool(evaluate(*e.args[0], ctx)) || as_bool(evaluate(*e.args[1], ctx));
        case ExprOp::Implies: return !as_bool(evaluate(*e.args[0], ctx)) || as_bool(evaluate(*e.args[1], ctx));
        case ExprOp::Eq:
        case ExprOp::Ne:
        case ExprOp::Lt:
        case ExprOp::Le:
        case ExprOp::Gt:
        case ExprOp::Ge: return numeric_compare(e.op, evaluate(*e.args[0], ctx), evaluate(*e.args[1], ctx));
        case ExprOp::Add:
        case ExprOp::Sub:
        case ExprOp::Mul:
        case ExprOp::Div: return arithmetic(e.op, evaluate(*e.args[0], ctx), evaluate(*e.args[1], ctx));
        case ExprOp::Min:
        case ExprOp::Max: {
            Value best = evaluate(*e.args[0], ctx);
            for (std::size_t i = 1; i < e.args.size(); ++i) {
                Value v = evaluate(*e.args[i], ctx);
                bool less = numeric_compare(ExprOp::Lt, v, best);
                if ((e.op == ExprOp::Min) == less && v != best) best = v;
            }
            return best;
        }
        case ExprOp::Ite:
            return as_bool(evaluate(*e.args[0], ctx)) ? evaluate(*e.args[1], ctx) : evaluate(*e.args[2], ctx);
    }
    throw EvalError("malformed expression");
}

}  // namespace smg
