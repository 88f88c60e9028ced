#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smg/expr.hpp"
#include "smg/game.hpp"

namespace smg {

enum class ShieldKind { PreSafety, PostSafety, Optimal };

struct Threshold {
    enum class Kind { Absolute, Relative };
    Kind kind = Kind::Absolute;
    double value = 0.0;  // gamma (absolute) or lambda (relative), in [0, 1]

    static Threshold absolute(double gamma) { return {Kind::Absolute, gamma}; }
    static Threshold relative(double lambda) { return {Kind::Relative, lambda}; }

    friend bool operator==(const Threshold&, const Threshold&) = default;
};

struct ShieldAnnotation {
    ShieldKind kind = ShieldKind::PreSafety;
    std::optional<Threshold> threshold;  // absent only for Optimal

    friend bool operator==(const ShieldAnnotation&, const ShieldAnnotation&) = default;
};

enum class Quantifier { Pmax, Pmin, Rmax, Rmin };

inline bool is_probability(Quantifier q) { return q == Quantifier::Pmax || q == Quantifier::Pmin; }
inline Direction direction_of(Quantifier q) {
    return (q == Quantifier::Pmax || q == Quantifier::Rmax) ? Direction::Maximize : Direction::Minimize;
}

enum class PathKind { Next, Finally, FinallyBounded, Until, UntilBounded, Globally, GloballyBounded, SteadyState };

struct PathFormula {
    PathKind kind = PathKind::Finally;
    ExprPtr left;   // Until / UntilBounded only
    ExprPtr right;  // the (second) operand; null for SteadyState
    std::size_t bound = 0;
};

struct Property {
    std::optional<ShieldAnnotation> shield;
    std::vector<std::string> coalition;
    Quantifier quantifier = Quantifier::Pmax;
    std::string reward_name;  // R quantifiers only
    PathFormula path;
};

bool operator==(const Property& a, const Property& b);

/// Parses one property, e.g.
///   <PreSafety, gamma=0.9> <<shield>> Pmax=? [ G<=14 !crash ]
///   <<defender>> R{"infections"}min=? [ S ]
/// Throws ParseError for syntax errors and for annotation/operator mismatches.
Property parse_property(const std::string& text);

/// One property per non-empty line; `#` starts a comment.
std::vector<Property> parse_properties_file(const std::string& text);

std::string print_property(const Property& p);

class BindError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BoundProperty {
    Property property;
    Coalition coalition;
    Direction direction = Direction::Maximize;
    const RewardStructure* reward = nullptr;  // R quantifiers; points into the game
    std::vector<bool> left;                   // Until / UntilBounded
    std::vector<bool> right;                  // path operand
};

/// Evaluates a state formula on every state. Bare names resolve to a
/// variable if one exists, otherwise to a label; "quoted" names are labels.
/// The label "init" marks the initial state unless the model defines it.
std::vector<bool> evaluate_state_formula(const StochasticGame& game, const ExprPtr& formula);

BoundProperty bind(const Property& property, const StochasticGame& game);

}  // namespace smg
