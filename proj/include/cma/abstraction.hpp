#pragma once

#include "cma/action.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cma {

/// Bundle branches of one action into an abstract branch: condition is the
/// disjunction, effect the pointwise union, interval the hull when the member
/// conditions are disjoint and [min lo, min(1, hi1+hi2)] when they overlap.
/// Remaining branches transfer intact; groups larger than two fold pairwise
/// left-to-right. The merged branch sits at the first member's position.
Action intra_abstract(const Action& a, const std::vector<int>& group);

/// Abstract two alternative actions by pairing branches (index order unless
/// an explicit pairing is given; the shorter action is padded with
/// condition-false, interval-[0,0] branches first). Pair k gets the
/// disjunction of conditions, the interval hull, and the pointwise union of
/// effects (padding contributes nothing).
Action inter_abstract(const Action& a1, const Action& a2,
                      const std::optional<std::vector<int>>& pairing = std::nullopt);

/// Collapse the sequence a1;a2: every branch pair (i, j) yields condition
/// c_1i conjoined with the regression {b : E_1i(b) meets c_2j}, interval
/// [lo1*lo2, hi1*hi2], and the exact effect composition. Pairs whose
/// condition is empty are dropped.
Action seq_abstract(const Action& a1, const Action& a2);

/// Operator results together with branch-index correspondences; the oracle
/// folds concrete execution flows through these maps.
struct IntraResult {
    Action action;
    std::vector<int> remap; // original branch index -> result index
};
struct InterResult {
    Action action;
    std::vector<int> left_map;  // a1 branch index -> result index
    std::vector<int> right_map; // a2 branch index -> result index
};
struct SeqResult {
    Action action;
    std::vector<std::vector<int>> pair_index; // [i][j] -> result index, -1 if dropped
};

IntraResult intra_abstract_mapped(const Action& a, const std::vector<int>& group);
InterResult inter_abstract_mapped(const Action& a1, const Action& a2,
                                  const std::optional<std::vector<int>>& pairing = std::nullopt);
SeqResult seq_abstract_mapped(const Action& a1, const Action& a2);

/// Abstraction hierarchy: a tree of inter/sequential/intra abstractions over
/// concrete actions. Nodes reference already-added nodes, so the structure is
/// acyclic by construction (file loading rejects cyclic name references).
/// Every node caches its derived action and the operator fold metadata.
class Hierarchy {
public:
    enum class NodeKind { Concrete, Inter, Sequential, Intra };

    struct Node {
        std::string name;
        NodeKind kind = NodeKind::Concrete;
        std::vector<int> children;
        std::vector<std::vector<int>> merge_groups; // Intra
        ActionRef derived;
        // fold metadata, one entry per pairwise fold step
        std::vector<std::vector<int>> inter_left_maps;
        std::vector<std::vector<int>> inter_right_maps;
        std::vector<std::vector<std::vector<int>>> seq_pair_index;
        std::vector<int> intra_remap;
    };

    int add_concrete(const std::string& name, ActionRef action);
    int add_inter(const std::string& name, const std::vector<int>& children,
                  const std::vector<std::optional<std::vector<int>>>& pairings = {});
    int add_sequential(const std::string& name, const std::vector<int>& children);
    int add_intra(const std::string& name, int child,
                  const std::vector<std::vector<int>>& merge_groups);

    int size() const { return static_cast<int>(nodes_.size()); }
    const Node& node(int id) const { return nodes_.at(id); }
    int find(const std::string& name) const; // -1 when unknown

private:
    void check_children(const std::vector<int>& children, std::size_t min_count) const;
    std::vector<Node> nodes_;
};

/// One concrete instantiation of a hierarchy node: the concrete plan it
/// stands for plus the map from per-action branch choices to the branch of
/// the node's derived action those choices realize.
struct NodeInstantiation {
    Plan plan;
    std::function<int(const std::vector<int>&)> map_path;
};

/// All concrete instantiations, deterministic order: a concrete leaf yields
/// itself; inter unions children in order; sequential concatenates in
/// lexicographic product order; intra passes its child through.
std::vector<NodeInstantiation> instantiations(const Hierarchy& h, int node_id);

/// Instantiations of an abstract plan (one hierarchy node per step):
/// cartesian product of the per-step instantiations.
struct PlanInstantiation {
    std::vector<NodeInstantiation> parts;
    Plan flat() const;
};
std::vector<PlanInstantiation> enumerate_plan_instantiations(const Hierarchy& h,
                                                             const std::vector<int>& node_plan);

/// Plan of the derived (abstract) actions of the given nodes.
Plan derived_plan(const Hierarchy& h, const std::vector<int>& node_plan);

} // namespace cma
