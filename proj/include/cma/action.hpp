#pragma once

#include "cma/cma_tree.hpp"
#include "cma/condition.hpp"
#include "cma/effect.hpp"
#include "cma/interval.hpp"
#include "cma/validation.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cma {

/// One action branch: applicability condition, probability interval, effect.
/// The condition may be empty only for inter-abstraction padding branches,
/// whose interval must be [0,0].
struct ActionBranch {
    StateSet condition;
    std::optional<ConditionExpr> condition_expr; // symbolic source when available
    ProbInterval interval;
    Effect effect;

    bool is_padding() const {
        return condition.empty() && interval.lo == 0.0 && interval.hi == 0.0;
    }
};

enum class ActionKind { Concrete, Abstract };

/// Finite set of branch triples. Concrete actions have mutually exclusive and
/// jointly exhaustive distinct conditions with per-condition feasible
/// interval groups; abstract actions only need joint exhaustiveness.
struct Action {
    std::string name;
    ActionKind kind = ActionKind::Concrete;
    std::uint32_t space_size = 0;
    std::vector<ActionBranch> branches;
    /// Set by the abstraction operators; relaxes validation of invariants the
    /// operators preserve by construction.
    bool derived_by_operator = false;

    /// Distinct nonempty condition sets in order of first appearance.
    std::vector<StateSet> distinct_conditions() const;
    /// Branch indices per distinct condition, aligned with
    /// distinct_conditions(). Padding branches belong to no group.
    std::vector<std::vector<int>> condition_groups() const;
    /// For concrete actions: the distinct-condition index covering each
    /// state, -1 where uncovered.
    std::vector<int> cell_of_state() const;
};

using ActionRef = std::shared_ptr<const Action>;

struct Plan {
    std::vector<ActionRef> actions;

    bool all_concrete() const {
        for (const auto& a : actions)
            if (a->kind != ActionKind::Concrete) return false;
        return true;
    }
};

/// Exhaustiveness gaps, partition violations (concrete), infeasible
/// per-condition interval groups, malformed padding. Abstract actions
/// produced by the operators get warnings instead of errors for the
/// invariants the operators preserve.
ValidationReport validate_action(const Action& a, double tol = kDefaultTol);

/// The instantiated IMA at state b: one branch per triple of b's unique
/// condition, with that triple's interval and leaf E({b}).
/// Throws for abstract actions and out-of-range states.
Ima instantiate_ima(const Action& a, std::uint32_t b);

} // namespace cma
