#include "cma/projection.hpp"

#include <set>
#include <stdexcept>

namespace cma {

LooseProb loose_cond_prob(const Action& a, const StateSet& c, const StateSet& B) {
    if (B.empty()) throw std::invalid_argument("loose_cond_prob: B must be nonempty");
    auto conds = a.distinct_conditions();
    int which = -1;
    for (std::size_t i = 0; i < conds.size(); ++i)
        if (conds[i] == c) {
            which = static_cast<int>(i);
            break;
        }
    if (which < 0)
        throw std::invalid_argument("loose_cond_prob: c is not a condition of the action");
    if (!B.intersects(c)) return LooseProb::Zero;
    for (std::size_t i = 0; i < conds.size(); ++i)
        if (static_cast<int>(i) != which && B.intersects(conds[i])) return LooseProb::Unit;
    return LooseProb::One;
}

namespace {

struct GrowContext {
    const Action* action;
    std::vector<StateSet> conds;
    std::vector<std::vector<int>> groups;
    ProjectionStepStats* stats;
};

void grow_leaves(CmaNode& node, const GrowContext& ctx) {
    if (!node.is_leaf()) {
        for (auto& b : node.children) grow_leaves(b.child, ctx);
        return;
    }
    const StateSet& B = *node.states;
    // surviving conditions: those consistent with this leaf
    std::vector<int> alive;
    for (std::size_t c = 0; c < ctx.conds.size(); ++c)
        if (B.intersects(ctx.conds[c])) alive.push_back(static_cast<int>(c));
    ctx.stats->grown_leaves += 1;
    ctx.stats->pruned_branches +=
        static_cast<std::int64_t>(ctx.conds.size() - alive.size());
    ctx.stats->t_observations[static_cast<int>(alive.size())] += 1;

    ProbInterval cond_interval =
        alive.size() == 1 ? ProbInterval::one() : ProbInterval::unit();
    for (int c : alive) {
        StateSet met = B & ctx.conds[c];
        CmaNode cond_node;
        cond_node.states = met;
        cond_node.condition_level = true;
        ctx.stats->added_condition_nodes += 1;
        for (int idx : ctx.groups[c]) {
            const ActionBranch& triple = ctx.action->branches[idx];
            CmaNode leaf = CmaNode::leaf(triple.effect.image_of(met));
            cond_node.children.push_back({triple.interval, std::move(leaf)});
            ctx.stats->added_effect_nodes += 1;
        }
        node.children.push_back({cond_interval, std::move(cond_node)});
    }
}

void finish_stats(const Cma& M, ProjectionStats& stats) {
    stats.total_node_count = node_count(M);
    stats.leaf_count = ::cma::leaf_count(M);
    stats.tree_depth = depth(M);
    // formula-convention count and potential sibling merges
    std::int64_t formula_nodes = 0;
    std::int64_t merges = 0;
    auto walk = [&](auto&& self, const CmaNode& n) -> void {
        if (!n.condition_level) formula_nodes += 1;
        // count equal (interval, leaf set) pairs among effect-level siblings
        for (std::size_t i = 0; i < n.children.size(); ++i)
            for (std::size_t j = i + 1; j < n.children.size(); ++j) {
                const auto& a = n.children[i];
                const auto& b = n.children[j];
                if (a.child.is_leaf() && b.child.is_leaf() && a.interval == b.interval &&
                    a.child.states && b.child.states && *a.child.states == *b.child.states)
                    merges += 1;
            }
        for (const auto& b : n.children) self(self, b.child);
    };
    walk(walk, M.root);
    stats.node_count = formula_nodes;
    stats.potential_merges = merges;
}

} // namespace

std::pair<Cma, ProjectionStats> project_action(const Action& a, const Cma& M) {
    if (a.space_size != M.space_size)
        throw std::invalid_argument("project_action: space mismatch");
    auto action_report = validate_action(a);
    if (!action_report.ok())
        throw std::invalid_argument("project_action: invalid action " + a.name);
    auto world_report = validate_cma(M);
    if (!world_report.ok()) throw std::invalid_argument("project_action: invalid CMA");

    Cma out = M;
    ProjectionStats stats;
    ProjectionStepStats step;
    step.action = a.name;
    GrowContext ctx{&a, a.distinct_conditions(), a.condition_groups(), &step};
    grow_leaves(out.root, ctx);
    stats.steps.push_back(std::move(step));
    finish_stats(out, stats);
    return {std::move(out), std::move(stats)};
}

std::pair<Cma, ProjectionStats> project_plan(const Plan& p, const Cma& M) {
    if (p.actions.empty()) throw std::invalid_argument("project_plan: plan is empty");
    Cma current = M;
    ProjectionStats stats;
    for (const auto& a : p.actions) {
        auto [next, step_stats] = project_action(*a, current);
        current = std::move(next);
        stats.steps.push_back(step_stats.steps.front());
    }
    finish_stats(current, stats);
    return {std::move(current), std::move(stats)};
}

std::int64_t predicted_node_count(int t, int k, int n) {
    if (t < 1 || k < 1 || n < 1)
        throw std::invalid_argument("predicted_node_count: t, k, n must be >= 1");
    const std::int64_t tk = static_cast<std::int64_t>(t) * k;
    if (tk == 1) return n + 1;
    std::int64_t total = 0, power = 1;
    for (int i = 0; i <= n; ++i) {
        total += power;
        power *= tk;
    }
    return total; // == ((tk)^{n+1} - 1) / (tk - 1)
}

} // namespace cma
