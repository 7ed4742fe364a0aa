#include "cma/condition.hpp"

#include <sstream>
#include <stdexcept>

namespace cma {

namespace {

void check_attrs(const ConditionExpr& e, const StateSpace& space) {
    switch (e.kind) {
    case ConditionExpr::Kind::Atom:
        if (space.attribute_index(e.attr) < 0)
            throw std::invalid_argument("condition references unknown attribute: " + e.attr);
        break;
    case ConditionExpr::Kind::And:
    case ConditionExpr::Kind::Or:
    case ConditionExpr::Kind::Not:
        for (const auto& c : e.children) check_attrs(c, space);
        break;
    default:
        break;
    }
}

} // namespace

bool eval_condition(const ConditionExpr& e, const StateSpace& space, std::uint32_t state) {
    switch (e.kind) {
    case ConditionExpr::Kind::True:
        return true;
    case ConditionExpr::Kind::False:
        return false;
    case ConditionExpr::Kind::Atom: {
        int idx = space.attribute_index(e.attr);
        if (idx < 0) throw std::invalid_argument("unknown attribute: " + e.attr);
        int v = space.value_at(state, static_cast<std::size_t>(idx));
        switch (e.cmp) {
        case Cmp::Lt: return v < e.value;
        case Cmp::Le: return v <= e.value;
        case Cmp::Eq: return v == e.value;
        case Cmp::Ge: return v >= e.value;
        case Cmp::Gt: return v > e.value;
        }
        return false;
    }
    case ConditionExpr::Kind::And:
        for (const auto& c : e.children)
            if (!eval_condition(c, space, state)) return false;
        return true;
    case ConditionExpr::Kind::Or:
        for (const auto& c : e.children)
            if (eval_condition(c, space, state)) return true;
        return false;
    case ConditionExpr::Kind::Not:
        return !eval_condition(e.children.at(0), space, state);
    }
    return false;
}

StateSet compile_condition(const ConditionExpr& expr, const StateSpace& space) {
    check_attrs(expr, space);
    StateSet out(space.size());
    for (std::uint32_t s = 0; s < space.size(); ++s)
        if (eval_condition(expr, space, s)) out.set(s);
    return out;
}

std::string cmp_to_string(Cmp c) {
    switch (c) {
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Eq: return "=";
    case Cmp::Ge: return ">=";
    case Cmp::Gt: return ">";
    }
    return "?";
}

std::string condition_to_string(const ConditionExpr& e) {
    std::ostringstream os;
    switch (e.kind) {
    case ConditionExpr::Kind::True:
        return "true";
    case ConditionExpr::Kind::False:
        return "false";
    case ConditionExpr::Kind::Atom:
        os << e.attr << cmp_to_string(e.cmp) << e.value;
        return os.str();
    case ConditionExpr::Kind::And:
    case ConditionExpr::Kind::Or: {
        const char* sep = e.kind == ConditionExpr::Kind::And ? " & " : " | ";
        os << "(";
        for (std::size_t i = 0; i < e.children.size(); ++i) {
            if (i) os << sep;
            os << condition_to_string(e.children[i]);
        }
        os << ")";
        return os.str();
    }
    case ConditionExpr::Kind::Not:
        return "!" + condition_to_string(e.children.at(0));
    }
    return "?";
}

} // namespace cma
