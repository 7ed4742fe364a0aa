#pragma once

#include "cma/interval.hpp"
#include "cma/mass.hpp"
#include "cma/rng.hpp"
#include "cma/state_space.hpp"
#include "cma/validation.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cma {

/// Interval-weighted tree over state-set leaves. Encodes a set of mass
/// assignments: pick a number inside every branch interval so that each
/// sibling group sums to one; a leaf's focal mass is the product of the
/// numbers on its path. An IMA is a Cma of depth exactly one.
struct CmaBranch;

struct CmaNode {
    /// Leaves always carry a set; internal nodes carry one when meaningful
    /// (former leaves after projection, condition intersections).
    std::optional<StateSet> states;
    /// Marks the condition-routing level that projection inserts between a
    /// grown leaf and its effect children. Excluded from the projection
    /// statistics' node count.
    bool condition_level = false;
    std::string label;
    std::vector<CmaBranch> children;

    bool is_leaf() const;
    static CmaNode leaf(StateSet set, std::string label = "");
};

struct CmaBranch {
    ProbInterval interval;
    CmaNode child;
};

struct Cma {
    std::uint32_t space_size = 0;
    CmaNode root;

    static Cma single_leaf(StateSet set);
    /// Depth-one tree from explicit branches.
    static Cma ima(std::uint32_t space_size,
                   std::vector<std::pair<ProbInterval, StateSet>> branches);
};

using Ima = Cma;

/// One number per branch, aligned with depth-first preorder branch indexing
/// (a node's child edges in order, then recursion into each child).
struct NumberAssignment {
    std::vector<double> numbers;
};

int node_count(const Cma& M);
int depth(const Cma& M);
int branch_count(const Cma& M);
int leaf_count(const Cma& M);
bool is_ima(const Cma& M);

/// Every invariant violation with its tree path; empty report means valid.
ValidationReport validate_cma(const Cma& M, double tol = kDefaultTol);

/// Generate one member MA: per sibling group, numbers drawn inside the
/// intervals summing to one; leaf masses are path products; equal leaf sets
/// merge; zero-product leaves are dropped. The NumberAssignment records every
/// branch's number.
std::pair<MassAssignment, NumberAssignment> sample_ma(const Cma& M, SplitRng& rng);

/// Membership with a constructive witness: every witness number inside its
/// interval, every sibling group summing to one, and the path products
/// reproducing m's focal masses after merging equal leaf sets. Throws on
/// witness/tree shape mismatch. When `why` is given, the first violated
/// constraint is described there.
bool contains_ma(const Cma& M, const MassAssignment& m, const NumberAssignment& witness,
                 double tol = kDefaultTol, std::string* why = nullptr);

/// Collapse to a depth-one tree: one branch per root-to-leaf path with
/// interval [prod lo, min(1, prod hi)]; equal leaf sets are not merged.
Ima flatten(const Cma& M);

/// Witness for m in flatten(M) given m's witness in M: per-path products of
/// the tree numbers, in flatten's branch order.
NumberAssignment flatten_witness(const Cma& M, const NumberAssignment& witness);

/// The mass assignment a number witness induces on M (path products, equal
/// leaf sets merged, products <= drop_tol dropped).
MassAssignment ma_from_witness(const Cma& M, const NumberAssignment& witness,
                               double drop_tol = kDefaultTol);

struct EuBounds {
    double lo = 0.0;
    double hi = 0.0;
};

/// Tight expected-utility bounds over every distribution the tree encodes.
/// Leaf: [min u over the set, max u]. Internal node: extremes of
/// sum(p_c * child bound) over the box-constrained simplex, solved exactly by
/// the greedy saturation procedure.
EuBounds eu_interval(const Cma& M, const Eigen::VectorXd& utility);

/// Extremes of sum(p_i * value_i) with p inside the intervals and summing to
/// one. Exposed for the brute-force cross-checks.
double box_simplex_extreme(const std::vector<double>& values,
                           const std::vector<ProbInterval>& intervals, bool maximize);

/// DOT export; edges labeled "[lo,hi]", leaves labeled with attribute-set
/// descriptions when a space is supplied.
std::string to_dot(const Cma& M, const StateSpace* space = nullptr);

/// All leaf sets with interval products, preorder. For point-interval trees
/// the products are the encoded masses.
std::vector<std::pair<StateSet, ProbInterval>> leaf_products(const Cma& M);

} // namespace cma
