#pragma once

#include "cma/abstraction.hpp"
#include "cma/action.hpp"
#include "cma/cma_tree.hpp"
#include "cma/condition.hpp"
#include "cma/effect.hpp"
#include "cma/projection.hpp"
#include "cma/rng.hpp"

#include <array>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace cma::fixtures {

/// Synthetic uniform-growth domain for the node-count law: every projected
/// leaf intersects exactly t conditions and every condition carries k
/// branches. t=1 uses one condition TRUE; t=2 uses cells x=0/x=1 with
/// effects that set x to the whole {0,1} range so every image straddles both.
struct TkDomain {
    StateSpace space;
    ActionRef action;
    Cma world;
};

inline TkDomain make_tk_domain(int t, int k) {
    std::vector<Attribute> attrs;
    if (t == 2) attrs.push_back({"x", {0, 1}});
    std::vector<int> ydom;
    for (int q = 0; q < k; ++q) ydom.push_back(q);
    attrs.push_back({"y", ydom});
    TkDomain d{StateSpace(attrs), nullptr, {}};

    Action a;
    a.name = "grow";
    a.kind = ActionKind::Concrete;
    a.space_size = d.space.size();
    ProbInterval iv = k == 1 ? ProbInterval::one() : ProbInterval::unit();
    auto add_cell = [&](const StateSet& cell) {
        for (int q = 0; q < k; ++q) {
            std::vector<EffectRule> rules;
            if (t == 2) rules.push_back({"x", false, 0, 1}); // straddle both cells
            rules.push_back({"y", false, q, q});
            a.branches.push_back({cell, std::nullopt, iv, compile_effect(rules, d.space)});
        }
    };
    if (t == 1) {
        add_cell(d.space.full_set());
    } else {
        add_cell(compile_condition(ConditionExpr::atom("x", Cmp::Eq, 0), d.space));
        add_cell(compile_condition(ConditionExpr::atom("x", Cmp::Eq, 1), d.space));
    }
    d.action = std::make_shared<Action>(std::move(a));
    d.world = Cma::single_leaf(d.space.full_set());
    return d;
}

inline Plan repeat_plan(const ActionRef& a, int n) {
    Plan p;
    for (int i = 0; i < n; ++i) p.actions.push_back(a);
    return p;
}

/// Random concrete domain for the empirical soundness suite: a one-attribute
/// space (|Omega| <= 16), 1-3 actions with 1-3 cells and 1-3 branches per
/// cell (always per-cell feasible), random nonempty effect images, a random
/// feasible world of depth 1-2, and a random plan of length 1-3.
struct RandomDomain {
    StateSpace space;
    std::vector<ActionRef> actions;
    Cma world;
    Plan plan;
};

inline std::vector<ProbInterval> feasible_group(std::size_t k, SplitRng& rng) {
    auto point = sample_simplex(k, rng);
    std::vector<ProbInterval> iv(k);
    for (std::size_t i = 0; i < k; ++i) {
        iv[i].lo = point[i] * rng.next_unit();
        iv[i].hi = point[i] + (1.0 - point[i]) * rng.next_unit();
    }
    return iv;
}

inline StateSet random_nonempty_set(std::uint32_t n, SplitRng& rng, double density = 0.4) {
    StateSet s(n);
    while (s.empty())
        for (std::uint32_t i = 0; i < n; ++i)
            if (rng.next_unit() < density) s.set(i);
    return s;
}

inline RandomDomain make_random_domain(std::uint64_t seed) {
    SplitRng rng(seed);
    std::uint32_t n = 4 + static_cast<std::uint32_t>(rng.next_below(13)); // 4..16
    std::vector<int> dom;
    for (std::uint32_t i = 0; i < n; ++i) dom.push_back(static_cast<int>(i));
    RandomDomain d{StateSpace({{"s", dom}}), {}, {}, {}};

    int num_actions = 1 + static_cast<int>(rng.next_below(3));
    for (int ai = 0; ai < num_actions; ++ai) {
        Action a;
        a.name = "a" + std::to_string(ai);
        a.kind = ActionKind::Concrete;
        a.space_size = n;
        int cells = 1 + static_cast<int>(rng.next_below(3));
        std::vector<StateSet> cell_sets(cells, StateSet(n));
        for (std::uint32_t s = 0; s < n; ++s) {
            int c = s < static_cast<std::uint32_t>(cells)
                        ? static_cast<int>(s) // keep every cell nonempty
                        : static_cast<int>(rng.next_below(cells));
            cell_sets[c].set(s);
        }
        for (const auto& cell : cell_sets) {
            std::size_t k = 1 + rng.next_below(3);
            auto ivs = feasible_group(k, rng);
            for (std::size_t q = 0; q < k; ++q) {
                std::vector<std::vector<std::uint32_t>> table(n);
                for (std::uint32_t s = 0; s < n; ++s) {
                    std::size_t img = 1 + rng.next_below(3);
                    for (std::size_t z = 0; z < img; ++z)
                        table[s].push_back(
                            static_cast<std::uint32_t>(rng.next_below(n)));
                    if (table[s].empty()) table[s].push_back(s);
                }
                a.branches.push_back(
                    {cell, std::nullopt, ivs[q], Effect::from_table(n, std::move(table))});
            }
        }
        d.actions.push_back(std::make_shared<Action>(std::move(a)));
    }

    // world: root group; each child is a leaf or (depth 2) another group
    auto make_leaf = [&] { return CmaNode::leaf(random_nonempty_set(n, rng)); };
    std::size_t width = 1 + rng.next_below(3);
    auto root_iv = feasible_group(width, rng);
    d.world.space_size = n;
    for (std::size_t i = 0; i < width; ++i) {
        if (rng.next_unit() < 0.4) {
            std::size_t inner_width = 1 + rng.next_below(3);
            auto inner_iv = feasible_group(inner_width, rng);
            CmaNode inner;
            for (std::size_t j = 0; j < inner_width; ++j)
                inner.children.push_back({inner_iv[j], make_leaf()});
            d.world.root.children.push_back({root_iv[i], std::move(inner)});
        } else {
            d.world.root.children.push_back({root_iv[i], make_leaf()});
        }
    }

    std::size_t len = 1 + rng.next_below(3);
    for (std::size_t i = 0; i < len; ++i)
        d.plan.actions.push_back(d.actions[rng.next_below(d.actions.size())]);
    return d;
}

/// Random SPD fixture: one-attribute space (|Omega| <= 64), partition cells,
/// point intervals summing to one per cell, deterministic singleton images,
/// and an initial world encoding a single distribution.
struct SpdFixture {
    StateSpace space;
    Plan plan;
    Cma world;
    Pd p0;
};

inline SpdFixture make_spd_fixture(std::uint64_t seed, std::uint32_t max_states = 64,
                                   int max_len = 4) {
    SplitRng rng(seed);
    std::uint32_t n = 2 + static_cast<std::uint32_t>(rng.next_below(max_states - 1));
    std::vector<int> dom;
    for (std::uint32_t i = 0; i < n; ++i) dom.push_back(static_cast<int>(i));
    SpdFixture f{StateSpace({{"s", dom}}), {}, {}, Pd(n)};

    int len = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_len)));
    for (int t = 0; t < len; ++t) {
        Action a;
        a.name = "spd" + std::to_string(t);
        a.kind = ActionKind::Concrete;
        a.space_size = n;
        int cells = 1 + static_cast<int>(rng.next_below(3));
        std::vector<StateSet> cell_sets(cells, StateSet(n));
        for (std::uint32_t s = 0; s < n; ++s) {
            int c = s < static_cast<std::uint32_t>(cells)
                        ? static_cast<int>(s)
                        : static_cast<int>(rng.next_below(cells));
            cell_sets[c].set(s);
        }
        for (const auto& cell : cell_sets) {
            std::size_t k = 1 + rng.next_below(3);
            auto probs = sample_simplex(k, rng);
            for (std::size_t q = 0; q < k; ++q) {
                std::vector<std::vector<std::uint32_t>> table(n);
                for (std::uint32_t s = 0; s < n; ++s)
                    table[s] = {static_cast<std::uint32_t>(rng.next_below(n))};
                a.branches.push_back({cell, std::nullopt, ProbInterval::point(probs[q]),
                                      Effect::from_table(n, std::move(table))});
            }
        }
        f.plan.actions.push_back(std::make_shared<Action>(std::move(a)));
    }

    auto w = sample_simplex(n, rng);
    std::vector<std::pair<ProbInterval, StateSet>> branches;
    for (std::uint32_t s = 0; s < n; ++s) {
        f.p0.p[s] = w[s];
        branches.emplace_back(ProbInterval::point(w[s]), StateSet::singleton(n, s));
    }
    f.world = Cma::ima(n, std::move(branches));
    return f;
}

/// Three-stage hierarchy over eight concrete alternatives:
/// P = seq(N, L, K), N = inter(A, M), M = inter(B, C), L = inter(D, E),
/// K = inter(F, G, H), so P has 3 x 2 x 3 = 18 concrete instantiations.
/// All eight concrete actions share the cells x=0 / x=1 with index-aligned
/// branches whose effects pin x per branch index, so inter unions stay inside
/// one cell and sequential regressions stay exact.
struct StageHierarchyFixture {
    StateSpace space;
    std::vector<ActionRef> concrete; // A..H
    std::shared_ptr<Hierarchy> hierarchy;
    int root = -1;
    int node_K = -1;
    Cma world;
};

inline StageHierarchyFixture make_stage_hierarchy() {
    StageHierarchyFixture f{StateSpace({{"x", {0, 1}}, {"y", {0, 1, 2}}}), {}, nullptr, -1, -1, {}};
    const StateSpace& sp = f.space;
    StateSet c0 = compile_condition(ConditionExpr::atom("x", Cmp::Eq, 0), sp);
    StateSet c1 = compile_condition(ConditionExpr::atom("x", Cmp::Eq, 1), sp);
    // branch index -> forced x value; identical across all concrete actions
    const int x_target[4] = {0, 1, 0, 1};

    auto make_action = [&](const std::string& name, std::array<ProbInterval, 4> ivs,
                           std::array<EffectRule, 4> yrules) {
        Action a;
        a.name = name;
        a.kind = ActionKind::Concrete;
        a.space_size = sp.size();
        for (int q = 0; q < 4; ++q) {
            std::vector<EffectRule> rules = {{"x", false, x_target[q], x_target[q]},
                                             yrules[static_cast<std::size_t>(q)]};
            a.branches.push_back({q < 2 ? c0 : c1, std::nullopt,
                                  ivs[static_cast<std::size_t>(q)],
                                  compile_effect(rules, sp)});
        }
        return std::make_shared<Action>(std::move(a));
    };

    EffectRule y_set0{"y", false, 0, 0}, y_set1{"y", false, 1, 1}, y_set2{"y", false, 2, 2};
    EffectRule y_span{"y", false, 0, 1}, y_up{"y", true, 1, 1}, y_down{"y", true, -1, -1};

    f.concrete = {
        make_action("A", {{{0.2, 0.4}, {0.6, 0.8}, {0.5, 0.5}, {0.5, 0.5}}},
                    {{y_set0, y_set1, y_up, y_set2}}),
        make_action("B", {{{0.3, 0.3}, {0.7, 0.7}, {0.4, 0.6}, {0.4, 0.6}}},
                    {{y_span, y_set2, y_set0, y_down}}),
        make_action("C", {{{0.1, 0.5}, {0.5, 0.9}, {0.6, 0.6}, {0.4, 0.4}}},
                    {{y_up, y_down, y_set1, y_span}}),
        make_action("D", {{{0.25, 0.45}, {0.55, 0.75}, {0.3, 0.5}, {0.5, 0.7}}},
                    {{y_set1, y_span, y_set2, y_set0}}),
        make_action("E", {{{0.4, 0.4}, {0.6, 0.6}, {0.2, 0.8}, {0.2, 0.8}}},
                    {{y_down, y_set0, y_span, y_up}}),
        make_action("F", {{{0.15, 0.35}, {0.65, 0.85}, {0.45, 0.55}, {0.45, 0.55}}},
                    {{y_set2, y_up, y_set0, y_set1}}),
        make_action("G", {{{0.5, 0.5}, {0.5, 0.5}, {0.1, 0.9}, {0.1, 0.9}}},
                    {{y_set0, y_set2, y_down, y_span}}),
        make_action("H", {{{0.35, 0.45}, {0.55, 0.65}, {0.5, 0.6}, {0.4, 0.5}}},
                    {{y_up, y_set1, y_span, y_set2}}),
    };

    f.hierarchy = std::make_shared<Hierarchy>();
    Hierarchy& h = *f.hierarchy;
    int A = h.add_concrete("A", f.concrete[0]);
    int B = h.add_concrete("B", f.concrete[1]);
    int C = h.add_concrete("C", f.concrete[2]);
    int D = h.add_concrete("D", f.concrete[3]);
    int E = h.add_concrete("E", f.concrete[4]);
    int F = h.add_concrete("F", f.concrete[5]);
    int G = h.add_concrete("G", f.concrete[6]);
    int H = h.add_concrete("H", f.concrete[7]);
    int M = h.add_inter("M", {B, C});
    int N = h.add_inter("N", {A, M});
    int L = h.add_inter("L", {D, E});
    f.node_K = h.add_inter("K", {F, G, H});
    f.root = h.add_sequential("P", {N, L, f.node_K});

    // world: one single-cell leaf, one straddling subtree
    const std::uint32_t n = sp.size();
    CmaNode inner;
    inner.children.push_back({{0.5, 0.5}, CmaNode::leaf(StateSet::full(n))});
    inner.children.push_back(
        {{0.5, 0.5},
         CmaNode::leaf(StateSet::of(n, {sp.index_of({1, 0}), sp.index_of({1, 2})}))});
    f.world.space_size = n;
    f.world.root.children.push_back(
        {{0.3, 0.5},
         CmaNode::leaf(StateSet::of(n, {sp.index_of({0, 0}), sp.index_of({0, 1})}))});
    f.world.root.children.push_back({{0.5, 0.7}, std::move(inner)});
    return f;
}

/// Random hierarchy in the operators' sound-usage regime: every concrete
/// action shares the same cells with index-aligned branches, each branch pins
/// the cell attribute to a fixed per-index target (so unions never straddle
/// the next stage's cells), and intra merges only bundle same-cell,
/// same-target branch pairs.
struct RandomStageFixture {
    StateSpace space;
    std::shared_ptr<Hierarchy> hierarchy;
    std::vector<int> stage_nodes; // the per-stage abstract nodes
    int root = -1;                // sequential root when stages >= 2, else the stage node
    Cma world;
};

inline RandomStageFixture make_random_stage_fixture(std::uint64_t seed) {
    SplitRng rng(seed);
    const int cells = 2 + static_cast<int>(rng.next_below(2));   // 2..3
    const int yvals = 2 + static_cast<int>(rng.next_below(2));   // 2..3
    std::vector<int> xdom, ydom;
    for (int c = 0; c < cells; ++c) xdom.push_back(c);
    for (int y = 0; y < yvals; ++y) ydom.push_back(y);
    RandomStageFixture f{StateSpace({{"x", xdom}, {"y", ydom}}), nullptr, {}, -1, {}};
    const StateSpace& sp = f.space;
    const std::uint32_t n = sp.size();

    // shared branch layout: per cell 1-2 branches, fixed x target per index;
    // cell 0 keeps two same-target branches so intra stays in regime
    std::vector<int> cell_branches(cells);
    std::vector<std::vector<int>> x_target(cells);
    for (int c = 0; c < cells; ++c) {
        cell_branches[c] = 1 + static_cast<int>(rng.next_below(2));
        for (int q = 0; q < cell_branches[c]; ++q)
            x_target[c].push_back(static_cast<int>(rng.next_below(cells)));
    }
    cell_branches[0] = 2;
    x_target[0] = {static_cast<int>(rng.next_below(cells))};
    x_target[0].push_back(x_target[0][0]);

    std::vector<StateSet> cell_sets;
    for (int c = 0; c < cells; ++c)
        cell_sets.push_back(compile_condition(ConditionExpr::atom("x", Cmp::Eq, c), sp));

    auto make_aligned_action = [&](const std::string& name) {
        Action a;
        a.name = name;
        a.kind = ActionKind::Concrete;
        a.space_size = n;
        for (int c = 0; c < cells; ++c) {
            auto ivs = feasible_group(static_cast<std::size_t>(cell_branches[c]), rng);
            for (int q = 0; q < cell_branches[c]; ++q) {
                int ylo = static_cast<int>(rng.next_below(yvals));
                int yhi = ylo + static_cast<int>(rng.next_below(
                                    static_cast<std::uint64_t>(yvals - ylo)));
                std::vector<EffectRule> rules = {{"x", false, x_target[c][q], x_target[c][q]},
                                                 {"y", false, ylo, yhi}};
                a.branches.push_back({cell_sets[c], std::nullopt,
                                      ivs[static_cast<std::size_t>(q)],
                                      compile_effect(rules, sp)});
            }
        }
        return std::make_shared<Action>(std::move(a));
    };

    f.hierarchy = std::make_shared<Hierarchy>();
    Hierarchy& h = *f.hierarchy;
    int next_name = 0;
    const int stages = 2 + static_cast<int>(rng.next_below(2)); // 2..3
    for (int s = 0; s < stages; ++s) {
        int alternatives = 1 + static_cast<int>(rng.next_below(3));
        std::vector<int> leaves;
        for (int alt = 0; alt < alternatives; ++alt) {
            std::string name = "a" + std::to_string(next_name++);
            leaves.push_back(h.add_concrete(name, make_aligned_action(name)));
        }
        int node = alternatives == 1
                       ? leaves[0]
                       : h.add_inter("s" + std::to_string(s), leaves);
        if (rng.next_unit() < 0.35) {
            // bundle cell 0's two aligned branches
            node = h.add_intra("x" + std::to_string(s), node, {{0, 1}});
        }
        f.stage_nodes.push_back(node);
    }
    f.root = stages == 1 ? f.stage_nodes[0]
                         : h.add_sequential("root", f.stage_nodes);

    std::size_t width = 1 + rng.next_below(3);
    auto ivs = feasible_group(width, rng);
    f.world.space_size = n;
    for (std::size_t i = 0; i < width; ++i)
        f.world.root.children.push_back({ivs[i], CmaNode::leaf(random_nonempty_set(n, rng))});
    return f;
}

/// Negative control: pretend the projector never assigned the loose [0,1]
/// interval on condition branches, leaving [1,1] instead.
inline void drop_unit_intervals(CmaNode& n) {
    for (auto& b : n.children) {
        if (b.child.condition_level && b.interval == ProbInterval::unit())
            b.interval = ProbInterval::one();
        drop_unit_intervals(b.child);
    }
}

inline Cma drop_unit_intervals(Cma m) {
    drop_unit_intervals(m.root);
    return m;
}

/// Negative control: narrow every effect-level branch interval to its lower
/// endpoint, as if the projector copied a bound instead of the interval.
inline void narrow_effect_intervals(CmaNode& n) {
    for (auto& b : n.children) {
        if (!n.condition_level) {
            // effect-level branches hang off condition-routing nodes
        } else if (b.interval.hi > b.interval.lo) {
            b.interval.hi = b.interval.lo;
        }
        narrow_effect_intervals(b.child);
    }
}

inline Cma narrow_effect_intervals(Cma m) {
    narrow_effect_intervals(m.root);
    return m;
}

} // namespace cma::fixtures
