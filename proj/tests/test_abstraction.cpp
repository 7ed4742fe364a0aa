#include "cma/abstraction.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>

using namespace cma;

namespace {

StateSpace abc_space() { return StateSpace({{"x", {0, 1, 2}}}); }

Action simple_action(const StateSpace& sp) {
    // cell x=0: branches [0.3,0.3] y.. and [0.7,0.7]; cell x in {1,2}: [1,1]
    Action a;
    a.name = "base";
    a.kind = ActionKind::Concrete;
    a.space_size = sp.size();
    StateSet c0 = StateSet::of(3, {0});
    StateSet c12 = StateSet::of(3, {1, 2});
    a.branches.push_back({c0, std::nullopt, {0.3, 0.3}, Effect::from_table(3, {{1}, {1}, {1}})});
    a.branches.push_back({c0, std::nullopt, {0.7, 0.7}, Effect::from_table(3, {{2}, {2}, {2}})});
    a.branches.push_back({c12, std::nullopt, {1.0, 1.0}, Effect::identity(3)});
    return a;
}

} // namespace

TEST_CASE("intra_abstract: overlap rule on a shared condition") {
    StateSpace sp = abc_space();
    Action a = simple_action(sp);
    Action out = intra_abstract(a, {0, 1});
    CHECK(out.kind == ActionKind::Abstract);
    REQUIRE(out.branches.size() == 2);
    // merged branch: same condition, interval [0.3, min(1, 0.3+0.7)] = [0.3, 1.0]
    CHECK(out.branches[0].condition == StateSet::of(3, {0}));
    CHECK(out.branches[0].interval.lo == doctest::Approx(0.3));
    CHECK(out.branches[0].interval.hi == doctest::Approx(1.0));
    // effect is the pointwise union
    CHECK(out.branches[0].effect.image(0) == std::vector<std::uint32_t>{1, 2});
    // remaining branch transferred intact
    CHECK(out.branches[1].condition == StateSet::of(3, {1, 2}));
    CHECK(validate_action(out).ok());
}

TEST_CASE("intra_abstract: hull rule on disjoint conditions") {
    StateSpace sp = abc_space();
    Action a;
    a.name = "disjoint";
    a.kind = ActionKind::Concrete;
    a.space_size = 3;
    a.branches.push_back(
        {StateSet::of(3, {0}), std::nullopt, {0.2, 0.4}, Effect::identity(3)});
    a.branches.push_back(
        {StateSet::of(3, {1, 2}), std::nullopt, {0.5, 0.6}, Effect::identity(3)});
    // merging across cells is legal; the action must add a covering branch
    // first to stay exhaustive, but the operator works on any two branches
    Action out = intra_abstract(a, {0, 1});
    REQUIRE(out.branches.size() == 1);
    CHECK(out.branches[0].condition == StateSet::full(3));
    CHECK(out.branches[0].interval.lo == doctest::Approx(0.2));
    CHECK(out.branches[0].interval.hi == doctest::Approx(0.6)); // hull
}

TEST_CASE("intra_abstract: self-shaped duplicate gives [p, min(1,2p)]") {
    Action a;
    a.name = "dup";
    a.kind = ActionKind::Concrete;
    a.space_size = 2;
    Effect e = Effect::from_table(2, {{0, 1}, {1}});
    a.branches.push_back({StateSet::full(2), std::nullopt, {0.5, 0.5}, e});
    a.branches.push_back({StateSet::full(2), std::nullopt, {0.5, 0.5}, e});
    Action out = intra_abstract(a, {0, 1});
    REQUIRE(out.branches.size() == 1);
    CHECK(out.branches[0].effect == e); // union idempotent
    CHECK(out.branches[0].interval.lo == doctest::Approx(0.5));
    CHECK(out.branches[0].interval.hi == doctest::Approx(1.0));

    CHECK_THROWS_AS(intra_abstract(a, {0}), std::invalid_argument);
    CHECK_THROWS_AS(intra_abstract(a, {0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(intra_abstract(a, {0, 7}), std::invalid_argument);
}

TEST_CASE("intra_abstract folds groups larger than two pairwise left-to-right") {
    Action a;
    a.name = "tri";
    a.kind = ActionKind::Concrete;
    a.space_size = 3;
    StateSet all = StateSet::full(3);
    a.branches.push_back({all, std::nullopt, {0.2, 0.2}, Effect::from_table(3, {{0}, {0}, {0}})});
    a.branches.push_back({all, std::nullopt, {0.3, 0.3}, Effect::from_table(3, {{1}, {1}, {1}})});
    a.branches.push_back({all, std::nullopt, {0.5, 0.5}, Effect::from_table(3, {{2}, {2}, {2}})});
    Action out = intra_abstract(a, {0, 1, 2});
    REQUIRE(out.branches.size() == 1);
    // ((0.2+0.3) then +0.5): lo = min over members, hi = min(1, sum of his)
    CHECK(out.branches[0].interval.lo == doctest::Approx(0.2));
    CHECK(out.branches[0].interval.hi == doctest::Approx(1.0));
    CHECK(out.branches[0].effect.image(0) == std::vector<std::uint32_t>{0, 1, 2});
    CHECK(validate_action(out).ok());
}

TEST_CASE("inter_abstract: self-abstraction is the identity on point actions") {
    StateSpace sp = abc_space();
    Action a = simple_action(sp);
    Action out = inter_abstract(a, a);
    REQUIRE(out.branches.size() == a.branches.size());
    for (std::size_t i = 0; i < out.branches.size(); ++i) {
        CHECK(out.branches[i].condition == a.branches[i].condition);
        CHECK(out.branches[i].interval == a.branches[i].interval);
        CHECK(out.branches[i].effect == a.branches[i].effect);
    }
    CHECK(out.kind == ActionKind::Abstract);
}

TEST_CASE("inter_abstract: padding algebra for m=3, n=2") {
    Action a1;
    a1.name = "m3";
    a1.kind = ActionKind::Concrete;
    a1.space_size = 3;
    a1.branches.push_back(
        {StateSet::of(3, {0}), std::nullopt, {0.2, 0.5}, Effect::identity(3)});
    a1.branches.push_back(
        {StateSet::of(3, {1}), std::nullopt, {0.4, 0.7}, Effect::identity(3)});
    a1.branches.push_back(
        {StateSet::of(3, {2}), std::nullopt, {0.3, 0.6}, Effect::from_table(3, {{0}, {0}, {0}})});
    Action a2;
    a2.name = "n2";
    a2.kind = ActionKind::Concrete;
    a2.space_size = 3;
    a2.branches.push_back(
        {StateSet::of(3, {0, 1}), std::nullopt, {0.5, 0.5}, Effect::identity(3)});
    a2.branches.push_back(
        {StateSet::of(3, {2}), std::nullopt, {0.5, 0.5}, Effect::identity(3)});

    Action out = inter_abstract(a1, a2);
    REQUIRE(out.branches.size() == 3);
    // pair 3 partners a padding branch: c* = c_13, I* = [0, hi_13], E* = E_13
    CHECK(out.branches[2].condition == a1.branches[2].condition);
    CHECK(out.branches[2].interval.lo == doctest::Approx(0.0));
    CHECK(out.branches[2].interval.hi == doctest::Approx(0.6));
    CHECK(out.branches[2].effect == a1.branches[2].effect);
    // paired branches take hulls and unions
    CHECK(out.branches[0].condition == StateSet::of(3, {0, 1}));
    CHECK(out.branches[0].interval.lo == doctest::Approx(0.2));
    CHECK(out.branches[0].interval.hi == doctest::Approx(0.5));

    // explicit pairing must be a bijection
    CHECK_THROWS_AS(inter_abstract(a1, a2, std::vector<int>{0, 0, 1}),
                    std::invalid_argument);
    Action swapped = inter_abstract(a1, a2, std::vector<int>{1, 0, 2});
    CHECK(swapped.branches[0].condition == (a1.branches[0].condition | a2.branches[1].condition));
}

TEST_CASE("seq_abstract: right identity and endpoint products") {
    StateSpace sp = abc_space();
    Action a = simple_action(sp);
    Action id;
    id.name = "id";
    id.kind = ActionKind::Concrete;
    id.space_size = 3;
    id.branches.push_back({StateSet::full(3), std::nullopt, {1.0, 1.0}, Effect::identity(3)});

    Action out = seq_abstract(a, id);
    REQUIRE(out.branches.size() == a.branches.size());
    for (std::size_t i = 0; i < out.branches.size(); ++i) {
        CHECK(out.branches[i].condition == a.branches[i].condition);
        CHECK(out.branches[i].interval.lo == doctest::Approx(a.branches[i].interval.lo));
        CHECK(out.branches[i].interval.hi == doctest::Approx(a.branches[i].interval.hi));
        CHECK(out.branches[i].effect == a.branches[i].effect);
    }

    // interval products: [0.5,0.6] x [0.4,0.5] -> [0.20,0.30]
    Action b1;
    b1.name = "b1";
    b1.kind = ActionKind::Concrete;
    b1.space_size = 3;
    b1.branches.push_back({StateSet::full(3), std::nullopt, {0.5, 0.6}, Effect::identity(3)});
    b1.branches.push_back({StateSet::full(3), std::nullopt, {0.4, 0.5},
                           Effect::from_table(3, {{1}, {2}, {0}})});
    Action b2;
    b2.name = "b2";
    b2.kind = ActionKind::Concrete;
    b2.space_size = 3;
    b2.branches.push_back({StateSet::full(3), std::nullopt, {0.4, 0.5}, Effect::identity(3)});
    b2.branches.push_back({StateSet::full(3), std::nullopt, {0.5, 0.6},
                           Effect::from_table(3, {{2}, {0}, {1}})});
    auto res = seq_abstract_mapped(b1, b2);
    int idx = res.pair_index[0][0];
    REQUIRE(idx >= 0);
    CHECK(res.action.branches[static_cast<std::size_t>(idx)].interval.lo ==
          doctest::Approx(0.20));
    CHECK(res.action.branches[static_cast<std::size_t>(idx)].interval.hi ==
          doctest::Approx(0.30));
}

TEST_CASE("seq_abstract drops provably-false regressions") {
    // E_1 maps everything into {0}; c_2 = {1,2} is unreachable for pair (0, j)
    Action a1;
    a1.name = "to0";
    a1.kind = ActionKind::Concrete;
    a1.space_size = 3;
    a1.branches.push_back(
        {StateSet::full(3), std::nullopt, {1.0, 1.0}, Effect::from_table(3, {{0}, {0}, {0}})});
    Action a2;
    a2.name = "cells";
    a2.kind = ActionKind::Concrete;
    a2.space_size = 3;
    a2.branches.push_back(
        {StateSet::of(3, {0}), std::nullopt, {1.0, 1.0}, Effect::identity(3)});
    a2.branches.push_back(
        {StateSet::of(3, {1, 2}), std::nullopt, {1.0, 1.0}, Effect::identity(3)});

    auto res = seq_abstract_mapped(a1, a2);
    CHECK(res.pair_index[0][0] >= 0);
    CHECK(res.pair_index[0][1] == -1); // dropped
    CHECK(res.action.branches.size() == 1);
    CHECK(validate_action(res.action).ok()); // still exhaustive
}

TEST_CASE("operators preserve exhaustiveness and dominate member effects") {
    auto f = fixtures::make_stage_hierarchy();
    const Hierarchy& h = *f.hierarchy;
    for (int i = 0; i < h.size(); ++i) {
        const Action& derived = *h.node(i).derived;
        CHECK(validate_action(derived).ok());
    }
    // inter: E*(B) contains every member's E(B)
    int nodeM = h.find("M");
    REQUIRE(nodeM >= 0);
    const Action& M = *h.node(nodeM).derived;
    const Action& B = *f.concrete[1];
    const Action& C = *f.concrete[2];
    SplitRng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        StateSet set = fixtures::random_nonempty_set(f.space.size(), rng);
        for (std::size_t k = 0; k < M.branches.size(); ++k) {
            CHECK(M.branches[k].effect.image_of(set).contains(
                B.branches[k].effect.image_of(set)));
            CHECK(M.branches[k].effect.image_of(set).contains(
                C.branches[k].effect.image_of(set)));
        }
    }
}

TEST_CASE("interval dominance of inter on small enumerations") {
    // every feasible realization of a member branch lies inside the
    // abstract interval
    auto f = fixtures::make_stage_hierarchy();
    const Hierarchy& h = *f.hierarchy;
    const Action& M = *h.node(h.find("M")).derived;
    const Action& B = *f.concrete[1];
    const Action& C = *f.concrete[2];
    for (std::size_t k = 0; k < M.branches.size(); ++k) {
        for (double frac : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            double pb = B.branches[k].interval.lo +
                        frac * (B.branches[k].interval.hi - B.branches[k].interval.lo);
            double pc = C.branches[k].interval.lo +
                        frac * (C.branches[k].interval.hi - C.branches[k].interval.lo);
            CHECK(M.branches[k].interval.contains(pb));
            CHECK(M.branches[k].interval.contains(pc));
        }
    }
}

TEST_CASE("instantiations: concrete leaf, K, and the eighteen plans of P") {
    auto f = fixtures::make_stage_hierarchy();
    const Hierarchy& h = *f.hierarchy;

    auto leafA = instantiations(h, h.find("A"));
    REQUIRE(leafA.size() == 1);
    CHECK(leafA[0].plan.actions.size() == 1);
    CHECK(leafA[0].plan.actions[0]->name == "A");

    auto instK = instantiations(h, f.node_K);
    REQUIRE(instK.size() == 3);
    CHECK(instK[0].plan.actions[0]->name == "F");
    CHECK(instK[1].plan.actions[0]->name == "G");
    CHECK(instK[2].plan.actions[0]->name == "H");

    auto instP = instantiations(h, f.root);
    REQUIRE(instP.size() == 18);
    auto plan_name = [](const NodeInstantiation& inst) {
        std::string s;
        for (const auto& a : inst.plan.actions) s += a->name;
        return s;
    };
    CHECK(plan_name(instP[0]) == "ADF");
    CHECK(plan_name(instP[1]) == "ADG");
    CHECK(plan_name(instP[2]) == "ADH");
    CHECK(plan_name(instP[3]) == "AEF");
    CHECK(plan_name(instP[6]) == "BDF");
    CHECK(plan_name(instP[17]) == "CEH");
}

TEST_CASE("instantiation mappers land on branches consistent with the fold metadata") {
    auto f = fixtures::make_stage_hierarchy();
    const Hierarchy& h = *f.hierarchy;
    // For N = inter(A, M): action A's branch q maps straight to branch q.
    int nodeN = h.find("N");
    auto instN = instantiations(h, nodeN);
    REQUIRE(instN.size() == 3);
    for (int q = 0; q < 4; ++q) CHECK(instN[0].map_path({q}) == q);
    // instantiation via M (inter(B, C)) also maps index-aligned
    for (int q = 0; q < 4; ++q) CHECK(instN[1].map_path({q}) == q);

    // For P = seq(N, L, K): a full 3-step path maps to a kept pair index.
    auto instP = instantiations(h, f.root);
    const Action& P = *h.node(f.root).derived;
    int r = instP[0].map_path({0, 0, 0});
    CHECK(r >= 0);
    CHECK(r < static_cast<int>(P.branches.size()));
}

TEST_CASE("intra hierarchy node remaps branch indices") {
    auto f = fixtures::make_stage_hierarchy();
    Hierarchy& h = *f.hierarchy;
    int A = h.find("A");
    int X = h.add_intra("X", A, {{0, 1}});
    const auto& node = h.node(X);
    CHECK(node.intra_remap == std::vector<int>{0, 0, 1, 2});
    auto inst = instantiations(h, X);
    REQUIRE(inst.size() == 1);
    CHECK(inst[0].map_path({0}) == 0);
    CHECK(inst[0].map_path({1}) == 0); // merged
    CHECK(inst[0].map_path({3}) == 2);
    CHECK(validate_action(*node.derived).ok());
}
