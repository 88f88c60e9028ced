#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace smg {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column);

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }
    // The message without the position prefix.
    const std::string& message() const { return message_; }

private:
    std::string message_;
    std::size_t line_;
    std::size_t column_;
};

// ---------------------------------------------------------------------------
// Lexing

enum class TokenKind { Identifier, Integer, Real, String, Symbol, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
};

std::vector<Token> tokenize(std::string_view text);

class TokenStream {
public:
    explicit TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    const Token& peek(std::size_t ahead = 0) const;
    Token next();
    bool at_end() const { return peek().kind == TokenKind::End; }

    bool is_symbol(std::string_view sym, std::size_t ahead = 0) const;
    bool is_keyword(std::string_view word, std::size_t ahead = 0) const;
    bool accept_symbol(std::string_view sym);
    bool accept_keyword(std::string_view word);
    Token expect_symbol(std::string_view sym);
    Token expect_keyword(std::string_view word);
    Token expect_identifier(std::string_view what = "identifier");
    [[noreturn]] void fail(const std::string& message) const;

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Values and expressions

using Value = std::variant<std::int64_t, double, bool>;

std::string value_to_string(const Value& v);
double as_real(const Value& v);
std::int64_t as_int(const Value& v);
bool as_bool(const Value& v);

enum class ExprOp {
    Literal,
    Identifier,  // unresolved name
    Variable,    // resolved to a valuation slot
    Label,       // quoted "name" or a bare name resolved to a label
    Not,
    Negate,
    And,
    Or,
    Implies,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
    Ite,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    ExprOp op = ExprOp::Literal;
    Value literal{std::int64_t{0}};
    std::string name;
    std::size_t slot = 0;  // Variable
    std::vector<ExprPtr> args;
    std::size_t line = 0;
    std::size_t column = 0;
};

ExprPtr make_literal(Value v);
ExprPtr make_node(ExprOp op, std::vector<ExprPtr> args);

/// Full expression grammar: ternary, =>, |, &, !, relations, + -, * /,
/// unary minus, min/max calls, parentheses, literals, names and "labels".
ExprPtr parse_expression(TokenStream& ts);

/// Renders with minimal parentheses; parse_expression(print(e)) is
/// structurally equal to e.
std::string print_expression(const Expr& e);
bool structurally_equal(const Expr& a, const Expr& b);

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rewrites Identifier nodes through `resolve`, which returns a replacement
/// node or nullptr to leave the name unresolved (an error at evaluation).
ExprPtr resolve_names(const ExprPtr& e, const std::function<ExprPtr(const Expr&)>& resolve);

/// Folds every subtree without Variable/Label/Identifier leaves into a literal.
ExprPtr fold_constants(const ExprPtr& e);

struct EvalContext {
    std::span<const std::int64_t> valuation;
    std::function<bool(const std::string&)> label;  // optional
};

Value evaluate(const Expr& e, const EvalContext& ctx);

}  // namespace smg
