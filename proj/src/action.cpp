#include "cma/action.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace cma {

std::vector<StateSet> Action::distinct_conditions() const {
    std::vector<StateSet> out;
    for (const auto& br : branches) {
        if (br.condition.empty()) continue;
        bool known = false;
        for (const auto& c : out)
            if (c == br.condition) {
                known = true;
                break;
            }
        if (!known) out.push_back(br.condition);
    }
    return out;
}

std::vector<std::vector<int>> Action::condition_groups() const {
    auto conds = distinct_conditions();
    std::vector<std::vector<int>> groups(conds.size());
    for (int i = 0; i < static_cast<int>(branches.size()); ++i) {
        if (branches[i].condition.empty()) continue;
        for (std::size_t c = 0; c < conds.size(); ++c)
            if (conds[c] == branches[i].condition) {
                groups[c].push_back(i);
                break;
            }
    }
    return groups;
}

std::vector<int> Action::cell_of_state() const {
    auto conds = distinct_conditions();
    std::vector<int> cell(space_size, -1);
    for (std::size_t c = 0; c < conds.size(); ++c)
        conds[c].for_each([&](std::uint32_t s) {
            if (cell[s] < 0) cell[s] = static_cast<int>(c);
        });
    return cell;
}

ValidationReport validate_action(const Action& a, double tol) {
    ValidationReport rep;
    if (a.branches.empty()) {
        rep.error("no-branches", "", "action has no branches");
        return rep;
    }
    StateSet covered(a.space_size);
    for (std::size_t i = 0; i < a.branches.size(); ++i) {
        const auto& br = a.branches[i];
        std::string path = "branch[" + std::to_string(i) + "]";
        if (br.condition.universe_size() != a.space_size ||
            br.effect.space_size() != a.space_size) {
            rep.error("space-mismatch", path, "branch over a different space");
            continue;
        }
        if (!br.interval.valid(tol))
            rep.error("interval-invalid", path, "probability interval outside [0,1]");
        if (br.condition.empty() && !br.is_padding())
            rep.error("empty-condition", path,
                      "empty condition is only allowed for [0,0] padding branches");
        if (!br.effect.total())
            rep.error("effect-partial", path, "effect image is empty for some state");
        covered |= br.condition;
    }

    if (covered.count() != a.space_size) {
        StateSet gap = covered.complement();
        std::ostringstream os;
        os << "conditions are not jointly exhaustive; " << gap.count()
           << " uncovered state(s), first: " << gap.to_indices().front();
        // Operators preserve exhaustiveness; user-authored actions get errors.
        if (a.kind == ActionKind::Abstract && a.derived_by_operator)
            rep.warn("not-exhaustive", "", os.str());
        else
            rep.error("not-exhaustive", "", os.str());
    }

    auto conds = a.distinct_conditions();
    auto groups = a.condition_groups();

    if (a.kind == ActionKind::Concrete) {
        for (std::size_t i = 0; i < conds.size(); ++i)
            for (std::size_t j = i + 1; j < conds.size(); ++j)
                if (conds[i].intersects(conds[j])) {
                    StateSet overlap = conds[i] & conds[j];
                    rep.error("conditions-overlap", "",
                              "concrete action conditions overlap on state " +
                                  std::to_string(overlap.to_indices().front()));
                }
        for (const auto& br : a.branches)
            if (br.is_padding())
                rep.error("padding-in-concrete", "",
                          "padding branches are only meaningful in abstract actions");
    }

    for (std::size_t c = 0; c < groups.size(); ++c) {
        double sum_lo = 0.0, sum_hi = 0.0;
        for (int idx : groups[c]) {
            sum_lo += a.branches[idx].interval.lo;
            sum_hi += a.branches[idx].interval.hi;
        }
        if (sum_lo > 1.0 + tol || sum_hi < 1.0 - tol) {
            std::ostringstream os;
            os << "interval group of condition " << c << " cannot sum to 1 (lo sum=" << sum_lo
               << ", hi sum=" << sum_hi << ")";
            // Abstract actions carry no per-condition feasibility
            // requirement; surface it as a warning only.
            if (a.kind == ActionKind::Abstract)
                rep.warn("condition-infeasible", "", os.str());
            else
                rep.error("condition-infeasible", "", os.str());
        }
    }
    return rep;
}

Ima instantiate_ima(const Action& a, std::uint32_t b) {
    if (a.kind != ActionKind::Concrete)
        throw std::invalid_argument("instantiate_ima: action must be concrete");
    if (b >= a.space_size) throw std::out_of_range("instantiate_ima: state out of range");
    auto conds = a.distinct_conditions();
    auto groups = a.condition_groups();
    int cell = -1;
    for (std::size_t c = 0; c < conds.size(); ++c)
        if (conds[c].test(b)) {
            cell = static_cast<int>(c);
            break;
        }
    if (cell < 0)
        throw std::invalid_argument("instantiate_ima: state covered by no condition");
    std::vector<std::pair<ProbInterval, StateSet>> branches;
    for (int idx : groups[cell]) {
        const auto& br = a.branches[idx];
        branches.emplace_back(br.interval, br.effect.image_of(b));
    }
    return Cma::ima(a.space_size, std::move(branches));
}

} // namespace cma
