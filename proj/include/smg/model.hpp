#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smg/expr.hpp"
#include "smg/game.hpp"

namespace smg {

enum class ConstType { Int, Double, Bool };

struct ConstantDecl {
    ConstType type = ConstType::Int;
    std::string name;
    ExprPtr value;  // null when left open for overrides
};

struct VariableDecl {
    std::string name;
    ExprPtr low;
    ExprPtr high;
    ExprPtr init;
};

struct Assignment {
    std::string variable;
    ExprPtr value;
};

struct Update {
    ExprPtr probability;  // literal 1 when omitted
    std::vector<Assignment> assignments;
};

struct Command {
    std::optional<std::string> action;
    ExprPtr guard;
    std::vector<Update> updates;
    std::size_t line = 0;
};

struct ModuleDecl {
    std::string name;
    std::vector<VariableDecl> variables;
    std::vector<Command> commands;
};

struct PlayerDecl {
    std::string name;
    std::vector<std::string> modules;
    std::vector<std::string> actions;
};

struct RewardItem {
    std::optional<std::string> action;  // set for action rewards
    ExprPtr guard;
    ExprPtr value;
};

struct RewardDecl {
    std::string name;
    std::vector<RewardItem> items;
};

struct LabelDecl {
    std::string name;
    ExprPtr expr;
};

struct ModelAst {
    std::vector<ConstantDecl> constants;
    std::vector<ModuleDecl> modules;
    std::vector<PlayerDecl> players;
    std::vector<RewardDecl> rewards;
    std::vector<LabelDecl> labels;
};

/// Parses a model file. Throws ParseError (with line and column) on syntax
/// errors, duplicate identifiers, unbounded variables, assignments to
/// undeclared variables and player blocks naming unknown modules/actions.
ModelAst parse_model(const std::string& text);

/// Canonical source text; parse_model(print_model(ast)) is equivalent to ast.
std::string print_model(const ModelAst& ast);
bool equivalent(const ModelAst& a, const ModelAst& b);

enum class BuildErrorKind {
    UndefinedConstant,
    BadConstant,
    Ownership,
    TurnViolation,
    Deadlock,
    StateLimitExceeded,
    ProbabilitySum,
    OutOfRange,
    AssignmentConflict,
    Evaluation,
};

class BuildError : public std::runtime_error {
public:
    BuildError(BuildErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    BuildErrorKind kind() const { return kind_; }

private:
    BuildErrorKind kind_;
};

struct BuildOptions {
    std::size_t state_limit = 5'000'000;
    bool fix_deadlocks = false;
};

inline constexpr const char* kDeadlockAction = "__deadlock";

using ConstantOverrides = std::map<std::string, Value>;

/// Parses "a=0.5,c=0,N=3" into typed values (int, double or bool by syntax).
ConstantOverrides parse_constant_overrides(const std::string& spec);

/// Breadth-first state-space construction from the initial valuation.
///
/// States are numbered in discovery order; the choices of a state follow the
/// textual order of the commands that generate them (a synchronized action
/// is placed at its first command). All enabled choices of a state must
/// belong to one player, who becomes the state's owner.
StochasticGame build_game(const ModelAst& ast, const ConstantOverrides& overrides = {},
                          const BuildOptions& options = {});

}  // namespace smg
