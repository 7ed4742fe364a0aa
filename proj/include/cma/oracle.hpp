#pragma once

#include "cma/abstraction.hpp"
#include "cma/action.hpp"
#include "cma/cma_tree.hpp"
#include "cma/mass.hpp"
#include "cma/projection.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cma {

/// Per source state and step: the condition it fell under, the sampled
/// effect-branch probabilities (inside their intervals, summing to one over
/// the condition's branches), and the per-branch allocation of mass over the
/// effect image.
struct StateStepRecord {
    int cell = -1; // distinct-condition index of the acting action
    std::vector<double> branch_probs;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> branch_alloc;
};

struct ExecStep {
    std::map<std::uint32_t, StateStepRecord> records; // keyed by positive-mass source states
    Pd post;
};

/// One sampled execution: the pre-world MA with its number/allocation
/// witnesses, the sampled initial distribution, and the per-step bookkeeping.
struct ExecTrace {
    MassAssignment m_pre;
    NumberAssignment pre_numbers;
    AllocationRecord pre_alloc;
    Pd p_pre;
    std::vector<ExecStep> steps;
    Pd p_post;

    /// Inflow equals outflow at every step and the final mass is one.
    bool conserves_mass(double tol = kDefaultTol) const;
};

/// Execute a concrete plan by sampling: draw m_pre and a consistent P_pre,
/// then per action and positive-mass state sample effect-branch probabilities
/// inside their intervals and split each branch's share over the effect image
/// with Dirichlet(1) weights. Deterministic per seed.
ExecTrace sample_exec_plan(const Plan& p, const Cma& M_pre, std::uint64_t seed);

std::string exec_trace_to_json(const ExecTrace& t);

struct CheckOptions {
    double tol = kDefaultTol;
    /// 0 = respect the CMA_PLAN_THREADS environment variable (default 1).
    int threads = 0;
    /// Precompute the focal union closure and run the full consistency
    /// definition per sample when it fits these caps; otherwise rely on the
    /// allocation witness alone.
    std::size_t closure_element_cap = 4096;
    std::size_t closure_focal_cap = 64;
};

struct FailureRecord {
    std::int64_t sample_index = -1;
    std::uint64_t master_seed = 0;
    std::string constraint; // violated constraint, human-readable
    std::string trace_json; // full trace for replay
};

struct SoundnessReport {
    std::int64_t samples = 0;
    std::int64_t passes = 0;
    std::optional<FailureRecord> first_failure;
    /// "closure+witness" when the full definition also ran per sample.
    std::string consistency_mode;
    /// Smallest margin between a realized witness number and its interval
    /// bound across passing samples (empirical slack; nothing is asserted).
    double min_interval_slack = 0.0;

    bool all_passed() const { return samples > 0 && passes == samples; }
};

/// Soundness check for a concrete plan: project once, then per sample
/// execute the plan, fold the trace's mass flows onto the projected tree
/// (condition numbers are flow fractions, effect numbers mass-weighted
/// averages, zero-mass subtrees get synthesized feasible numbers) and verify
/// membership via contains_ma plus consistency of P_post with the induced MA.
SoundnessReport check_soundness(const Plan& p, const Cma& M_pre, std::int64_t samples,
                                std::uint64_t seed, const CheckOptions& opts = {});

/// Soundness check for abstract plans: the plan's actions may be
/// hierarchy-derived; `inst` supplies the concrete instantiation executed per
/// layer together with the branch-path maps used to fold multi-step flows
/// onto the abstract projected tree.
SoundnessReport check_soundness_instantiation(const Plan& abstract_plan,
                                              const PlanInstantiation& inst, const Cma& M_pre,
                                              std::int64_t samples, std::uint64_t seed,
                                              const CheckOptions& opts = {});

/// Same, but certifying against a caller-supplied projected tree (used by the
/// negative-control tests, which corrupt the tree's intervals).
SoundnessReport check_soundness_projected(const Cma& projected, const Plan& layer_plan,
                                          const PlanInstantiation& inst, const Cma& M_pre,
                                          std::int64_t samples, std::uint64_t seed,
                                          const CheckOptions& opts = {});

/// Classical stochastic-matrix forward projection. Requires SPD-restricted
/// actions: point intervals, partition conditions, singleton effect images.
/// Shares no code with the projection module.
Pd spd_project(const Plan& p, const Pd& P0);

bool is_spd_action(const Action& a, double tol = kDefaultTol);

/// State marginals read off a point-interval, singleton-leaf projected tree:
/// per state, the sum of leaf path products. Throws when the tree is not
/// SPD-shaped.
Eigen::VectorXd spd_marginals(const Cma& projected, double tol = kDefaultTol);

} // namespace cma
