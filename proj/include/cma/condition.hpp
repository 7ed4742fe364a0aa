#pragma once

#include "cma/state_space.hpp"

#include <memory>
#include <string>
#include <vector>

namespace cma {

enum class Cmp { Lt, Le, Eq, Ge, Gt };

/// Boolean expression over attribute comparisons. Symbolic front-end for
/// action conditions and world leaves; compiled extensionally per space.
struct ConditionExpr {
    enum class Kind { True, False, Atom, And, Or, Not };

    Kind kind = Kind::True;
    // Atom payload
    std::string attr;
    Cmp cmp = Cmp::Eq;
    int value = 0;
    // And/Or: all children; Not: exactly one
    std::vector<ConditionExpr> children;

    static ConditionExpr make_true() { return {}; }
    static ConditionExpr make_false() {
        ConditionExpr e;
        e.kind = Kind::False;
        return e;
    }
    static ConditionExpr atom(std::string attribute, Cmp op, int v) {
        ConditionExpr e;
        e.kind = Kind::Atom;
        e.attr = std::move(attribute);
        e.cmp = op;
        e.value = v;
        return e;
    }
    static ConditionExpr conj(std::vector<ConditionExpr> cs) {
        ConditionExpr e;
        e.kind = Kind::And;
        e.children = std::move(cs);
        return e;
    }
    static ConditionExpr disj(std::vector<ConditionExpr> cs) {
        ConditionExpr e;
        e.kind = Kind::Or;
        e.children = std::move(cs);
        return e;
    }
    static ConditionExpr negate(ConditionExpr c) {
        ConditionExpr e;
        e.kind = Kind::Not;
        e.children.push_back(std::move(c));
        return e;
    }
};

bool eval_condition(const ConditionExpr& expr, const StateSpace& space, std::uint32_t state);

/// Extensional compilation: the set of exactly those states satisfying expr.
/// Throws std::invalid_argument on unknown attribute names.
StateSet compile_condition(const ConditionExpr& expr, const StateSpace& space);

std::string cmp_to_string(Cmp c);
std::string condition_to_string(const ConditionExpr& expr);

} // namespace cma
