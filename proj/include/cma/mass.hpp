#pragma once

#include "cma/interval.hpp"
#include "cma/rng.hpp"
#include "cma/state_space.hpp"
#include "cma/validation.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

namespace cma {

/// A single probability distribution over the state space.
struct Pd {
    Eigen::VectorXd p;

    Pd() = default;
    explicit Pd(std::uint32_t space_size) : p(Eigen::VectorXd::Zero(space_size)) {}

    std::uint32_t space_size() const { return static_cast<std::uint32_t>(p.size()); }
    double prob_of(const StateSet& B) const;
    bool valid(double tol = kDefaultTol) const;
};

/// Mass assignment: focal elements with positive masses summing to one.
/// Focal elements may overlap and need not be disjoint.
struct MassBranch {
    StateSet focal;
    double mass = 0.0;
};

struct MassAssignment {
    std::uint32_t space_size = 0;
    std::vector<MassBranch> branches;

    ValidationReport validate(double tol = kDefaultTol) const;
};

/// Sum of masses of focal elements contained in B (the lower envelope of the
/// consistent set at B). Throws on universe-size mismatch.
double lower_prob(const MassAssignment& m, const StateSet& B);

/// Exact consistency decision: P(B) >= lower_prob(m, B) for all B. Only
/// unions of focal elements are enumerated; for any B, the union B' of the
/// focals inside B has the same lower bound and P(B') <= P(B), so the
/// restriction is exact. The union closure is capped: exceeding
/// `max_closure` distinct sets throws std::runtime_error.
bool is_consistent(const Pd& P, const MassAssignment& m, double tol = kDefaultTol,
                   std::size_t max_closure = std::size_t(1) << 20);

/// Per-focal split of its mass over its member states.
/// split[i] lists (state, mass) pairs for branch i; pairs sum to branch mass.
struct AllocationRecord {
    std::vector<std::vector<std::pair<std::uint32_t, double>>> split;
};

/// True iff `alloc` is a valid allocation of m reproducing P: every entry
/// nonnegative and supported inside its focal, per-focal sums equal the
/// branch masses, per-state sums equal P. A valid allocation proves
/// is_consistent(P, m) without enumerating subsets.
bool allocation_supports(const Pd& P, const MassAssignment& m, const AllocationRecord& alloc,
                         double tol = kDefaultTol, std::string* why = nullptr);

/// Draw a consistent distribution by splitting each focal mass over its
/// member states with symmetric Dirichlet(1) weights (uniform on the
/// simplex). Deterministic given the rng state.
std::pair<Pd, AllocationRecord> sample_consistent_pd(const MassAssignment& m, SplitRng& rng);

/// Numbers inside the given intervals, summing to exactly one. Siblings are
/// processed in random order; each draw is uniform inside its conditional
/// feasibility window and the final number is forced. Requires the group
/// invariant sum(lo) <= 1 <= sum(hi).
std::vector<double> sample_simplex_box(const std::vector<ProbInterval>& intervals,
                                       SplitRng& rng);

/// Deterministic feasible point of the same polytope (window lower ends,
/// last forced). Used for zero-mass subtrees in witness construction.
std::vector<double> feasible_simplex_box(const std::vector<ProbInterval>& intervals);

/// Dirichlet(1) weights over n categories (n >= 1), summing to one.
std::vector<double> sample_simplex(std::size_t n, SplitRng& rng);

} // namespace cma
