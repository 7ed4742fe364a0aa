#pragma once

#include "cma/action.hpp"
#include "cma/cma_tree.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace cma {

/// Loose conditional probability P_L(c | a, B): 0, 1, or the interval [0,1].
enum class LooseProb { Zero, One, Unit };

inline ProbInterval loose_to_interval(LooseProb p) {
    switch (p) {
    case LooseProb::Zero: return ProbInterval::zero();
    case LooseProb::One: return ProbInterval::one();
    case LooseProb::Unit: return ProbInterval::unit();
    }
    return ProbInterval::zero();
}

/// Zero when B misses c entirely; One when B meets c and no other distinct
/// condition of a; Unit when B meets c and at least one other condition.
/// `c` must equal one of a's distinct conditions (set equality).
LooseProb loose_cond_prob(const Action& a, const StateSet& c, const StateSet& B);

struct ProjectionStepStats {
    std::string action;
    std::int64_t grown_leaves = 0;
    std::int64_t pruned_branches = 0;
    std::int64_t added_condition_nodes = 0;
    std::int64_t added_effect_nodes = 0;
    /// Histogram of t = number of conditions consistent with each grown leaf.
    std::map<int, std::int64_t> t_observations;
};

struct ProjectionStats {
    std::vector<ProjectionStepStats> steps;
    /// Formula-convention count: root plus effect-level (state-bearing)
    /// nodes; condition-routing nodes excluded. Matches
    /// predicted_node_count on uniform synthetic domains.
    std::int64_t node_count = 0;
    /// Every node of the final tree, condition-routing nodes included.
    std::int64_t total_node_count = 0;
    std::int64_t leaf_count = 0;
    std::int64_t tree_depth = 0;
    /// Sibling subtrees that compaction could merge (informational; the
    /// projection itself never compacts).
    std::int64_t potential_merges = 0;
};

/// Grow the tree of M by the action's condition/effect levels at every leaf:
/// per distinct condition c with B & c nonempty, a condition branch with the
/// P_L interval; under it one branch per triple of c with the triple's
/// interval and leaf E(B & c). Zero branches are pruned with their subtrees;
/// a lone surviving condition gets [1,1]. The input tree is preserved above
/// the growth.
std::pair<Cma, ProjectionStats> project_action(const Action& a, const Cma& M);

/// Left fold of project_action over the plan, accumulating per-step stats.
std::pair<Cma, ProjectionStats> project_plan(const Plan& p, const Cma& M);

/// ((tk)^{n+1} - 1) / (tk - 1); n+1 when tk == 1.
std::int64_t predicted_node_count(int t, int k, int n);

} // namespace cma
