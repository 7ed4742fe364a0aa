#include "cma/abstraction.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace cma {

namespace {

ActionBranch make_padding(std::uint32_t space_size) {
    ActionBranch br;
    br.condition = StateSet(space_size);
    br.interval = ProbInterval::zero();
    br.effect = Effect::identity(space_size);
    return br;
}

std::optional<ConditionExpr> disj_exprs(const ActionBranch& x, const ActionBranch& y) {
    if (x.is_padding() && y.condition_expr) return y.condition_expr;
    if (y.is_padding() && x.condition_expr) return x.condition_expr;
    if (x.condition_expr && y.condition_expr)
        return ConditionExpr::disj({*x.condition_expr, *y.condition_expr});
    return std::nullopt;
}

Effect union_skip_padding(const ActionBranch& x, const ActionBranch& y) {
    // A padding branch never receives mass; its effect must not widen the
    // merged image.
    if (x.is_padding()) return y.effect;
    if (y.is_padding()) return x.effect;
    return Effect::union_of(x.effect, y.effect);
}

ActionBranch merge_intra(const ActionBranch& x, const ActionBranch& y) {
    ActionBranch out;
    out.condition = x.condition | y.condition;
    out.condition_expr = disj_exprs(x, y);
    bool overlap = x.condition.intersects(y.condition);
    if (overlap)
        out.interval = ProbInterval(std::min(x.interval.lo, y.interval.lo),
                                    std::min(1.0, x.interval.hi + y.interval.hi));
    else
        out.interval = ProbInterval(std::min(x.interval.lo, y.interval.lo),
                                    std::max(x.interval.hi, y.interval.hi));
    out.effect = union_skip_padding(x, y);
    return out;
}

ActionBranch merge_inter(const ActionBranch& x, const ActionBranch& y) {
    ActionBranch out;
    out.condition = x.condition | y.condition;
    out.condition_expr = disj_exprs(x, y);
    out.interval = ProbInterval(std::min(x.interval.lo, y.interval.lo),
                                std::max(x.interval.hi, y.interval.hi));
    out.effect = union_skip_padding(x, y);
    return out;
}

} // namespace

IntraResult intra_abstract_mapped(const Action& a, const std::vector<int>& group) {
    if (group.size() < 2)
        throw std::invalid_argument("intra_abstract: group needs at least two branches");
    std::set<int> seen;
    for (int idx : group) {
        if (idx < 0 || idx >= static_cast<int>(a.branches.size()))
            throw std::invalid_argument("intra_abstract: branch index out of range");
        if (!seen.insert(idx).second)
            throw std::invalid_argument("intra_abstract: duplicate branch index");
    }

    ActionBranch merged = a.branches[group[0]];
    for (std::size_t g = 1; g < group.size(); ++g)
        merged = merge_intra(merged, a.branches[group[g]]);

    IntraResult out;
    out.action.name = "intra(" + a.name + ")";
    out.action.kind = ActionKind::Abstract;
    out.action.space_size = a.space_size;
    out.action.derived_by_operator = true;
    out.remap.assign(a.branches.size(), -1);
    int merged_pos = -1;
    for (int i = 0; i < static_cast<int>(a.branches.size()); ++i) {
        if (seen.count(i)) {
            if (merged_pos < 0) {
                merged_pos = static_cast<int>(out.action.branches.size());
                out.action.branches.push_back(merged);
            }
            out.remap[i] = merged_pos;
        } else {
            out.remap[i] = static_cast<int>(out.action.branches.size());
            out.action.branches.push_back(a.branches[i]);
        }
    }
    return out;
}

Action intra_abstract(const Action& a, const std::vector<int>& group) {
    return intra_abstract_mapped(a, group).action;
}

InterResult inter_abstract_mapped(const Action& a1, const Action& a2,
                                  const std::optional<std::vector<int>>& pairing) {
    if (a1.space_size != a2.space_size)
        throw std::invalid_argument("inter_abstract: space mismatch");
    const std::size_t m = a1.branches.size();
    const std::size_t n = a2.branches.size();
    const std::size_t len = std::max(m, n);

    std::vector<ActionBranch> left(a1.branches.begin(), a1.branches.end());
    std::vector<ActionBranch> right(a2.branches.begin(), a2.branches.end());
    while (left.size() < len) left.push_back(make_padding(a1.space_size));
    while (right.size() < len) right.push_back(make_padding(a1.space_size));

    std::vector<int> pi(len);
    if (pairing) {
        if (pairing->size() != len)
            throw std::invalid_argument("inter_abstract: pairing must cover all " +
                                        std::to_string(len) + " padded branches");
        std::vector<bool> hit(len, false);
        for (int j : *pairing) {
            if (j < 0 || j >= static_cast<int>(len) || hit[j])
                throw std::invalid_argument(
                    "inter_abstract: pairing is not a bijection after padding");
            hit[j] = true;
        }
        pi = *pairing;
    } else {
        for (std::size_t k = 0; k < len; ++k) pi[k] = static_cast<int>(k);
    }

    InterResult out;
    out.action.name = "inter(" + a1.name + "," + a2.name + ")";
    out.action.kind = ActionKind::Abstract;
    out.action.space_size = a1.space_size;
    out.action.derived_by_operator = true;
    out.left_map.resize(m);
    out.right_map.resize(n);
    for (std::size_t k = 0; k < len; ++k)
        out.action.branches.push_back(merge_inter(left[k], right[pi[k]]));
    for (std::size_t i = 0; i < m; ++i) out.left_map[i] = static_cast<int>(i);
    for (std::size_t k = 0; k < len; ++k)
        if (pi[k] < static_cast<int>(n)) out.right_map[pi[k]] = static_cast<int>(k);
    return out;
}

Action inter_abstract(const Action& a1, const Action& a2,
                      const std::optional<std::vector<int>>& pairing) {
    return inter_abstract_mapped(a1, a2, pairing).action;
}

SeqResult seq_abstract_mapped(const Action& a1, const Action& a2) {
    if (a1.space_size != a2.space_size)
        throw std::invalid_argument("seq_abstract: space mismatch");
    SeqResult out;
    out.action.name = "seq(" + a1.name + "," + a2.name + ")";
    out.action.kind = ActionKind::Abstract;
    out.action.space_size = a1.space_size;
    out.action.derived_by_operator = true;
    out.pair_index.assign(a1.branches.size(),
                          std::vector<int>(a2.branches.size(), -1));
    for (std::size_t i = 0; i < a1.branches.size(); ++i) {
        const auto& b1 = a1.branches[i];
        for (std::size_t j = 0; j < a2.branches.size(); ++j) {
            const auto& b2 = a2.branches[j];
            // regression of c_2j through E_1i
            StateSet regressed(a1.space_size);
            b1.condition.for_each([&](std::uint32_t b) {
                for (auto t : b1.effect.image(b))
                    if (b2.condition.test(t)) {
                        regressed.set(b);
                        return;
                    }
            });
            StateSet cond = b1.condition & regressed;
            if (cond.empty()) continue; // provably false conjunction: no branch
            ActionBranch merged;
            merged.condition = std::move(cond);
            merged.interval = ProbInterval(b1.interval.lo * b2.interval.lo,
                                           b1.interval.hi * b2.interval.hi);
            merged.effect = Effect::compose(b1.effect, b2.effect);
            out.pair_index[i][j] = static_cast<int>(out.action.branches.size());
            out.action.branches.push_back(std::move(merged));
        }
    }
    return out;
}

Action seq_abstract(const Action& a1, const Action& a2) {
    return seq_abstract_mapped(a1, a2).action;
}

void Hierarchy::check_children(const std::vector<int>& children, std::size_t min_count) const {
    if (children.size() < min_count)
        throw std::invalid_argument("hierarchy node needs at least " +
                                    std::to_string(min_count) + " children");
    for (int c : children)
        if (c < 0 || c >= size())
            throw std::invalid_argument("hierarchy child id out of range");
}

int Hierarchy::add_concrete(const std::string& name, ActionRef action) {
    if (!action) throw std::invalid_argument("hierarchy: null action");
    Node n;
    n.name = name;
    n.kind = NodeKind::Concrete;
    n.derived = std::move(action);
    nodes_.push_back(std::move(n));
    return size() - 1;
}

int Hierarchy::add_inter(const std::string& name, const std::vector<int>& children,
                         const std::vector<std::optional<std::vector<int>>>& pairings) {
    check_children(children, 2);
    if (!pairings.empty() && pairings.size() != children.size() - 1)
        throw std::invalid_argument("hierarchy: one pairing per inter fold step expected");
    Node n;
    n.name = name;
    n.kind = NodeKind::Inter;
    n.children = children;
    Action acc = *nodes_[children[0]].derived;
    for (std::size_t s = 1; s < children.size(); ++s) {
        auto step = inter_abstract_mapped(acc, *nodes_[children[s]].derived,
                                          pairings.empty() ? std::nullopt : pairings[s - 1]);
        n.inter_left_maps.push_back(std::move(step.left_map));
        n.inter_right_maps.push_back(std::move(step.right_map));
        acc = std::move(step.action);
    }
    acc.name = name;
    n.derived = std::make_shared<Action>(std::move(acc));
    nodes_.push_back(std::move(n));
    return size() - 1;
}

int Hierarchy::add_sequential(const std::string& name, const std::vector<int>& children) {
    check_children(children, 2);
    Node n;
    n.name = name;
    n.kind = NodeKind::Sequential;
    n.children = children;
    Action acc = *nodes_[children[0]].derived;
    for (std::size_t s = 1; s < children.size(); ++s) {
        auto step = seq_abstract_mapped(acc, *nodes_[children[s]].derived);
        n.seq_pair_index.push_back(std::move(step.pair_index));
        acc = std::move(step.action);
    }
    acc.name = name;
    n.derived = std::make_shared<Action>(std::move(acc));
    nodes_.push_back(std::move(n));
    return size() - 1;
}

int Hierarchy::add_intra(const std::string& name, int child,
                         const std::vector<std::vector<int>>& merge_groups) {
    check_children({child}, 1);
    if (merge_groups.empty())
        throw std::invalid_argument("hierarchy: intra node needs at least one merge group");
    Node n;
    n.name = name;
    n.kind = NodeKind::Intra;
    n.children = {child};
    n.merge_groups = merge_groups;
    Action acc = *nodes_[child].derived;
    std::vector<int> remap(acc.branches.size());
    for (std::size_t i = 0; i < remap.size(); ++i) remap[i] = static_cast<int>(i);
    for (const auto& group_orig : merge_groups) {
        // groups refer to the child's original branch indices
        std::vector<int> group;
        for (int idx : group_orig) {
            if (idx < 0 || idx >= static_cast<int>(remap.size()))
                throw std::invalid_argument("hierarchy: intra merge index out of range");
            group.push_back(remap[idx]);
        }
        std::sort(group.begin(), group.end());
        group.erase(std::unique(group.begin(), group.end()), group.end());
        auto step = intra_abstract_mapped(acc, group);
        for (auto& r : remap) r = step.remap[r];
        acc = std::move(step.action);
    }
    acc.name = name;
    n.intra_remap = std::move(remap);
    n.derived = std::make_shared<Action>(std::move(acc));
    nodes_.push_back(std::move(n));
    return size() - 1;
}

int Hierarchy::find(const std::string& name) const {
    for (int i = 0; i < size(); ++i)
        if (nodes_[i].name == name) return i;
    return -1;
}

std::vector<NodeInstantiation> instantiations(const Hierarchy& h, int node_id) {
    const auto& n = h.node(node_id);
    std::vector<NodeInstantiation> out;
    switch (n.kind) {
    case Hierarchy::NodeKind::Concrete: {
        NodeInstantiation inst;
        inst.plan.actions = {n.derived};
        inst.map_path = [](const std::vector<int>& path) { return path.at(0); };
        out.push_back(std::move(inst));
        break;
    }
    case Hierarchy::NodeKind::Intra: {
        auto remap = n.intra_remap;
        for (auto& child_inst : instantiations(h, n.children[0])) {
            NodeInstantiation inst;
            inst.plan = child_inst.plan;
            auto inner = child_inst.map_path;
            inst.map_path = [inner, remap](const std::vector<int>& path) {
                return remap.at(inner(path));
            };
            out.push_back(std::move(inst));
        }
        break;
    }
    case Hierarchy::NodeKind::Inter: {
        for (std::size_t c = 0; c < n.children.size(); ++c) {
            auto rights = n.inter_right_maps;
            auto lefts = n.inter_left_maps;
            for (auto& child_inst : instantiations(h, n.children[c])) {
                NodeInstantiation inst;
                inst.plan = child_inst.plan;
                auto inner = child_inst.map_path;
                std::size_t entry = c;
                inst.map_path = [inner, rights, lefts, entry](const std::vector<int>& path) {
                    int idx = inner(path);
                    // child 0 lives in the running fold from the start;
                    // child c >= 1 enters at fold step c-1 via the right map.
                    std::size_t s = 0;
                    if (entry > 0) {
                        idx = rights.at(entry - 1).at(idx);
                        s = entry;
                    }
                    for (; s < lefts.size(); ++s) idx = lefts[s].at(idx);
                    return idx;
                };
                out.push_back(std::move(inst));
            }
        }
        break;
    }
    case Hierarchy::NodeKind::Sequential: {
        std::vector<std::vector<NodeInstantiation>> per_child;
        for (int c : n.children) per_child.push_back(instantiations(h, c));
        std::vector<std::size_t> cursor(per_child.size(), 0);
        auto pair_index = n.seq_pair_index;
        while (true) {
            NodeInstantiation inst;
            std::vector<std::function<int(const std::vector<int>&)>> maps;
            std::vector<std::size_t> lengths;
            for (std::size_t c = 0; c < per_child.size(); ++c) {
                const auto& part = per_child[c][cursor[c]];
                inst.plan.actions.insert(inst.plan.actions.end(), part.plan.actions.begin(),
                                         part.plan.actions.end());
                maps.push_back(part.map_path);
                lengths.push_back(part.plan.actions.size());
            }
            inst.map_path = [maps, lengths, pair_index](const std::vector<int>& path) {
                std::size_t offset = 0;
                int idx = -1;
                for (std::size_t c = 0; c < maps.size(); ++c) {
                    std::vector<int> sub(path.begin() + offset,
                                         path.begin() + offset + lengths[c]);
                    offset += lengths[c];
                    int b = maps[c](sub);
                    idx = c == 0 ? b : pair_index.at(c - 1).at(idx).at(b);
                    if (idx < 0)
                        throw std::logic_error(
                            "instantiation path maps to a dropped sequential pair");
                }
                return idx;
            };
            out.push_back(std::move(inst));
            // odometer over children, last child fastest (lexicographic order)
            std::size_t c = per_child.size();
            while (c > 0) {
                --c;
                if (++cursor[c] < per_child[c].size()) break;
                cursor[c] = 0;
                if (c == 0) return out;
            }
        }
    }
    }
    return out;
}

Plan PlanInstantiation::flat() const {
    Plan p;
    for (const auto& part : parts)
        p.actions.insert(p.actions.end(), part.plan.actions.begin(),
                         part.plan.actions.end());
    return p;
}

std::vector<PlanInstantiation> enumerate_plan_instantiations(
    const Hierarchy& h, const std::vector<int>& node_plan) {
    if (node_plan.empty())
        throw std::invalid_argument("enumerate_plan_instantiations: empty plan");
    std::vector<std::vector<NodeInstantiation>> per_step;
    for (int id : node_plan) per_step.push_back(instantiations(h, id));
    std::vector<PlanInstantiation> out;
    std::vector<std::size_t> cursor(per_step.size(), 0);
    while (true) {
        PlanInstantiation pi;
        for (std::size_t s = 0; s < per_step.size(); ++s)
            pi.parts.push_back(per_step[s][cursor[s]]);
        out.push_back(std::move(pi));
        std::size_t s = per_step.size();
        bool done = true;
        while (s > 0) {
            --s;
            if (++cursor[s] < per_step[s].size()) {
                done = false;
                break;
            }
            cursor[s] = 0;
        }
        if (done) break;
    }
    return out;
}

Plan derived_plan(const Hierarchy& h, const std::vector<int>& node_plan) {
    Plan p;
    for (int id : node_plan) p.actions.push_back(h.node(id).derived);
    return p;
}

} // namespace cma
