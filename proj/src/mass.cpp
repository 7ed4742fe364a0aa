#include "cma/mass.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace cma {

double Pd::prob_of(const StateSet& B) const {
    if (B.universe_size() != space_size())
        throw std::invalid_argument("Pd::prob_of: space mismatch");
    double s = 0.0;
    B.for_each([&](std::uint32_t i) { s += p[i]; });
    return s;
}

bool Pd::valid(double tol) const {
    if (p.size() == 0) return false;
    if ((p.array() < -tol).any()) return false;
    return std::abs(p.sum() - 1.0) <= tol;
}

ValidationReport MassAssignment::validate(double tol) const {
    ValidationReport rep;
    double sum = 0.0;
    for (std::size_t i = 0; i < branches.size(); ++i) {
        const auto& br = branches[i];
        std::string path = "branch[" + std::to_string(i) + "]";
        if (br.focal.universe_size() != space_size)
            rep.error("focal-space-mismatch", path, "focal element over a different space");
        if (br.focal.empty())
            rep.error("focal-empty", path, "focal element is empty (m(empty)=0 required)");
        if (!(br.mass > 0.0))
            rep.error("mass-nonpositive", path, "mass must be > 0");
        sum += br.mass;
    }
    if (branches.empty())
        rep.error("no-branches", "", "mass assignment has no focal elements");
    else if (std::abs(sum - 1.0) > tol)
        rep.error("mass-sum", "", "masses sum to " + std::to_string(sum) + ", expected 1");
    return rep;
}

double lower_prob(const MassAssignment& m, const StateSet& B) {
    if (B.universe_size() != m.space_size)
        throw std::invalid_argument("lower_prob: space mismatch");
    double s = 0.0;
    for (const auto& br : m.branches)
        if (B.contains(br.focal)) s += br.mass;
    return s;
}

bool is_consistent(const Pd& P, const MassAssignment& m, double tol, std::size_t max_closure) {
    if (P.space_size() != m.space_size)
        throw std::invalid_argument("is_consistent: space mismatch");
    // Enumerate the closure of focal elements under union (worklist, deduped),
    // checking the envelope inequality at every member.
    std::map<StateSet, bool> seen; // set -> checked
    std::vector<StateSet> work;
    StateSet empty(m.space_size);
    seen.emplace(empty, true);
    work.push_back(empty);
    while (!work.empty()) {
        StateSet cur = work.back();
        work.pop_back();
        for (const auto& br : m.branches) {
            StateSet next = cur | br.focal;
            auto [it, inserted] = seen.emplace(next, true);
            if (!inserted) continue;
            if (seen.size() > max_closure)
                throw std::runtime_error("is_consistent: focal union closure exceeds cap");
            if (P.prob_of(next) < lower_prob(m, next) - tol) return false;
            work.push_back(std::move(next));
        }
    }
    return true;
}

bool allocation_supports(const Pd& P, const MassAssignment& m, const AllocationRecord& alloc,
                         double tol, std::string* why) {
    auto fail = [&](const std::string& what) {
        if (why) *why = "consistency allocation invalid: " + what;
        return false;
    };
    if (alloc.split.size() != m.branches.size()) return fail("branch count mismatch");
    Eigen::VectorXd marginal = Eigen::VectorXd::Zero(m.space_size);
    for (std::size_t i = 0; i < m.branches.size(); ++i) {
        double sum = 0.0;
        for (const auto& [state, mass] : alloc.split[i]) {
            if (mass < -tol) return fail("negative mass");
            if (!m.branches[i].focal.test(state))
                return fail("mass allocated outside focal " + std::to_string(i));
            marginal[state] += mass;
            sum += mass;
        }
        if (std::abs(sum - m.branches[i].mass) > tol)
            return fail("focal " + std::to_string(i) + " sum drifts from its mass");
    }
    if ((marginal - P.p).cwiseAbs().maxCoeff() > tol)
        return fail("allocation marginal differs from P");
    return true;
}

std::pair<Pd, AllocationRecord> sample_consistent_pd(const MassAssignment& m, SplitRng& rng) {
    Pd P(m.space_size);
    AllocationRecord rec;
    rec.split.resize(m.branches.size());
    for (std::size_t i = 0; i < m.branches.size(); ++i) {
        const auto& br = m.branches[i];
        auto members = br.focal.to_indices();
        auto weights = sample_simplex(members.size(), rng);
        rec.split[i].reserve(members.size());
        for (std::size_t j = 0; j < members.size(); ++j) {
            double mass = br.mass * weights[j];
            P.p[members[j]] += mass;
            rec.split[i].emplace_back(members[j], mass);
        }
    }
    return {std::move(P), std::move(rec)};
}

std::vector<double> sample_simplex(std::size_t n, SplitRng& rng) {
    if (n == 0) throw std::invalid_argument("sample_simplex: empty support");
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& x : w) {
        x = rng.next_exp();
        total += x;
    }
    if (total <= 0.0) {
        std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(n));
        return w;
    }
    for (auto& x : w) x /= total;
    return w;
}

namespace {

std::vector<double> simplex_box_impl(const std::vector<ProbInterval>& iv,
                                     const std::vector<std::size_t>& order, SplitRng* rng) {
    const std::size_t n = iv.size();
    double sum_lo = 0.0, sum_hi = 0.0;
    for (const auto& i : iv) {
        sum_lo += i.lo;
        sum_hi += i.hi;
    }
    if (sum_lo > 1.0 + 1e-9 || sum_hi < 1.0 - 1e-9)
        throw std::invalid_argument("simplex-box group infeasible: lo/hi sums do not straddle 1");

    std::vector<double> out(n, 0.0);
    double remaining = 1.0;
    double later_lo = sum_lo, later_hi = sum_hi;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t idx = order[k];
        later_lo -= iv[idx].lo;
        later_hi -= iv[idx].hi;
        double w_lo = std::max(iv[idx].lo, remaining - later_hi);
        double w_hi = std::min(iv[idx].hi, remaining - later_lo);
        if (w_lo > w_hi) { // fp slack only; the window is nonempty by induction
            double mid = 0.5 * (w_lo + w_hi);
            w_lo = w_hi = mid;
        }
        double x;
        if (k + 1 == n)
            x = remaining;
        else if (rng)
            x = rng->next_in(w_lo, w_hi);
        else
            x = w_lo;
        out[idx] = x;
        remaining -= x;
    }
    return out;
}

} // namespace

std::vector<double> sample_simplex_box(const std::vector<ProbInterval>& intervals,
                                       SplitRng& rng) {
    std::vector<std::size_t> order(intervals.size());
    std::iota(order.begin(), order.end(), 0);
    // Fisher-Yates with the shared rng keeps the draw order unbiased.
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.next_below(i)]);
    return simplex_box_impl(intervals, order, &rng);
}

std::vector<double> feasible_simplex_box(const std::vector<ProbInterval>& intervals) {
    std::vector<std::size_t> order(intervals.size());
    std::iota(order.begin(), order.end(), 0);
    return simplex_box_impl(intervals, order, nullptr);
}

} // namespace cma
