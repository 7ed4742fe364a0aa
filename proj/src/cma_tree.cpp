#include "cma/cma_tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cma {

bool CmaNode::is_leaf() const { return children.empty(); }

CmaNode CmaNode::leaf(StateSet set, std::string label) {
    CmaNode n;
    n.states = std::move(set);
    n.label = std::move(label);
    return n;
}

Cma Cma::single_leaf(StateSet set) {
    Cma m;
    m.space_size = set.universe_size();
    m.root = CmaNode::leaf(std::move(set));
    return m;
}

Cma Cma::ima(std::uint32_t space_size,
             std::vector<std::pair<ProbInterval, StateSet>> branches) {
    Cma m;
    m.space_size = space_size;
    for (auto& [iv, set] : branches)
        m.root.children.push_back({iv, CmaNode::leaf(std::move(set))});
    return m;
}

namespace {

void count_nodes(const CmaNode& n, int& total) {
    ++total;
    for (const auto& b : n.children) count_nodes(b.child, total);
}

int node_depth(const CmaNode& n) {
    int d = 0;
    for (const auto& b : n.children) d = std::max(d, 1 + node_depth(b.child));
    return d;
}

void count_branches(const CmaNode& n, int& total) {
    total += static_cast<int>(n.children.size());
    for (const auto& b : n.children) count_branches(b.child, total);
}

void count_leaves(const CmaNode& n, int& total) {
    if (n.is_leaf()) {
        ++total;
        return;
    }
    for (const auto& b : n.children) count_leaves(b.child, total);
}

} // namespace

int node_count(const Cma& M) {
    int total = 0;
    count_nodes(M.root, total);
    return total;
}

int depth(const Cma& M) { return node_depth(M.root); }

int branch_count(const Cma& M) {
    int total = 0;
    count_branches(M.root, total);
    return total;
}

int leaf_count(const Cma& M) {
    int total = 0;
    count_leaves(M.root, total);
    return total;
}

bool is_ima(const Cma& M) { return depth(M) == 1; }

namespace {

void validate_node(const CmaNode& n, std::uint32_t space_size, const std::string& path,
                   double tol, ValidationReport& rep) {
    if (n.is_leaf()) {
        if (!n.states) {
            rep.error("leaf-without-set", path, "leaf node carries no state set");
            return;
        }
        if (n.states->universe_size() != space_size)
            rep.error("leaf-space-mismatch", path, "leaf set over a different space");
        else if (n.states->empty())
            rep.error("leaf-empty", path, "leaf state set is empty");
        return;
    }
    double sum_lo = 0.0, sum_hi = 0.0;
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        const auto& br = n.children[i];
        std::string child_path = path + "/" + std::to_string(i);
        if (!br.interval.valid(tol))
            rep.error("interval-invalid", child_path,
                      "branch interval outside [0,1] or inverted");
        sum_lo += br.interval.lo;
        sum_hi += br.interval.hi;
        validate_node(br.child, space_size, child_path, tol, rep);
    }
    if (sum_lo > 1.0 + tol || sum_hi < 1.0 - tol) {
        std::ostringstream os;
        os << "sibling group cannot sum to 1 (sum lo=" << sum_lo << ", sum hi=" << sum_hi
           << ")";
        rep.error("sibling-infeasible", path, os.str());
    }
}

} // namespace

ValidationReport validate_cma(const Cma& M, double tol) {
    ValidationReport rep;
    validate_node(M.root, M.space_size, "root", tol, rep);
    return rep;
}

namespace {

void sample_node(const CmaNode& n, double product, SplitRng& rng,
                 std::vector<double>& numbers, std::map<StateSet, double>& focal_mass) {
    if (n.is_leaf()) {
        if (product > 0.0) focal_mass[*n.states] += product;
        return;
    }
    std::vector<ProbInterval> iv;
    iv.reserve(n.children.size());
    for (const auto& b : n.children) iv.push_back(b.interval);
    auto xs = sample_simplex_box(iv, rng);
    std::size_t base = numbers.size();
    numbers.insert(numbers.end(), xs.begin(), xs.end());
    for (std::size_t i = 0; i < n.children.size(); ++i)
        sample_node(n.children[i].child, product * numbers[base + i], rng, numbers,
                    focal_mass);
}

} // namespace

std::pair<MassAssignment, NumberAssignment> sample_ma(const Cma& M, SplitRng& rng) {
    auto rep = validate_cma(M);
    if (!rep.ok()) throw std::invalid_argument("sample_ma: invalid CMA");
    NumberAssignment na;
    std::map<StateSet, double> focal_mass;
    sample_node(M.root, 1.0, rng, na.numbers, focal_mass);
    MassAssignment m;
    m.space_size = M.space_size;
    for (auto& [set, mass] : focal_mass) m.branches.push_back({set, mass});
    return {std::move(m), std::move(na)};
}

namespace {

bool check_numbers(const CmaNode& n, double product, const std::vector<double>& numbers,
                   std::size_t& cursor, double tol, const std::string& path,
                   std::map<StateSet, double>& focal_mass, std::string* why) {
    if (n.is_leaf()) {
        if (product > 0.0) focal_mass[*n.states] += product;
        return true;
    }
    if (cursor + n.children.size() > numbers.size())
        throw std::invalid_argument("contains_ma: witness shorter than the tree");
    std::size_t base = cursor;
    cursor += n.children.size();
    double sum = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        double x = numbers[base + i];
        if (!n.children[i].interval.contains(x, tol)) {
            if (ok && why) {
                std::ostringstream os;
                os << "interval bound violated at " << path << "/" << i << ": " << x
                   << " outside [" << n.children[i].interval.lo << ","
                   << n.children[i].interval.hi << "]";
                *why = os.str();
            }
            ok = false;
        }
        sum += x;
    }
    if (std::abs(sum - 1.0) > tol * std::max<double>(1, n.children.size())) {
        if (ok && why) {
            std::ostringstream os;
            os << "sibling sum violated at " << path << ": numbers sum to " << sum;
            *why = os.str();
        }
        ok = false;
    }
    for (std::size_t i = 0; i < n.children.size(); ++i)
        ok = check_numbers(n.children[i].child, product * numbers[base + i], numbers, cursor,
                           tol, path + "/" + std::to_string(i), focal_mass,
                           ok ? why : nullptr) &&
             ok;
    return ok;
}

} // namespace

bool contains_ma(const Cma& M, const MassAssignment& m, const NumberAssignment& witness,
                 double tol, std::string* why) {
    std::map<StateSet, double> induced;
    std::size_t cursor = 0;
    bool ok = check_numbers(M.root, 1.0, witness.numbers, cursor, tol, "root", induced, why);
    if (cursor != witness.numbers.size())
        throw std::invalid_argument("contains_ma: witness longer than the tree");
    if (!ok) return false;
    // Path products must reproduce m's focal masses (merge equal leaf sets
    // first, then drop negligible totals on both sides alike).
    for (auto it = induced.begin(); it != induced.end();) {
        if (it->second <= tol)
            it = induced.erase(it);
        else
            ++it;
    }
    std::map<StateSet, double> given;
    for (const auto& br : m.branches) given[br.focal] += br.mass;
    for (auto it = given.begin(); it != given.end();) {
        if (it->second <= tol)
            it = given.erase(it);
        else
            ++it;
    }
    auto mismatch = [&](const char* what) {
        if (why) *why = std::string("path products do not reproduce the MA: ") + what;
        return false;
    };
    if (induced.size() != given.size()) return mismatch("focal count differs");
    auto a = induced.begin();
    auto b = given.begin();
    for (; a != induced.end(); ++a, ++b) {
        if (!(a->first == b->first)) return mismatch("focal sets differ");
        if (std::abs(a->second - b->second) > tol * 10) return mismatch("focal mass differs");
    }
    return true;
}

namespace {

void flatten_node(const CmaNode& n, double lo, double hi, std::vector<CmaBranch>& out) {
    if (n.is_leaf()) {
        out.push_back({ProbInterval(lo, std::min(1.0, hi)), CmaNode::leaf(*n.states, n.label)});
        return;
    }
    for (const auto& b : n.children)
        flatten_node(b.child, lo * b.interval.lo, hi * b.interval.hi, out);
}

void flatten_products(const CmaNode& n, double prod, const std::vector<double>& numbers,
                      std::size_t& cursor, std::vector<double>& out) {
    if (n.is_leaf()) {
        out.push_back(prod);
        return;
    }
    std::size_t base = cursor;
    cursor += n.children.size();
    for (std::size_t i = 0; i < n.children.size(); ++i)
        flatten_products(n.children[i].child, prod * numbers[base + i], numbers, cursor, out);
}

} // namespace

Ima flatten(const Cma& M) {
    auto rep = validate_cma(M);
    if (!rep.ok()) throw std::invalid_argument("flatten: invalid CMA");
    Cma out;
    out.space_size = M.space_size;
    flatten_node(M.root, 1.0, 1.0, out.root.children);
    return out;
}

NumberAssignment flatten_witness(const Cma& M, const NumberAssignment& witness) {
    NumberAssignment out;
    std::size_t cursor = 0;
    flatten_products(M.root, 1.0, witness.numbers, cursor, out.numbers);
    if (cursor != witness.numbers.size())
        throw std::invalid_argument("flatten_witness: witness/tree shape mismatch");
    return out;
}

namespace {

void witness_masses(const CmaNode& n, double prod, const std::vector<double>& numbers,
                    std::size_t& cursor, std::map<StateSet, double>& focal_mass) {
    if (n.is_leaf()) {
        if (prod > 0.0) focal_mass[*n.states] += prod;
        return;
    }
    std::size_t base = cursor;
    cursor += n.children.size();
    for (std::size_t i = 0; i < n.children.size(); ++i)
        witness_masses(n.children[i].child, prod * numbers[base + i], numbers, cursor,
                       focal_mass);
}

} // namespace

MassAssignment ma_from_witness(const Cma& M, const NumberAssignment& witness,
                               double drop_tol) {
    std::map<StateSet, double> focal_mass;
    std::size_t cursor = 0;
    witness_masses(M.root, 1.0, witness.numbers, cursor, focal_mass);
    if (cursor != witness.numbers.size())
        throw std::invalid_argument("ma_from_witness: witness/tree shape mismatch");
    MassAssignment m;
    m.space_size = M.space_size;
    for (auto& [set, mass] : focal_mass)
        if (mass > drop_tol) m.branches.push_back({set, mass});
    return m;
}

double box_simplex_extreme(const std::vector<double>& values,
                           const std::vector<ProbInterval>& intervals, bool maximize) {
    if (values.size() != intervals.size() || values.empty())
        throw std::invalid_argument("box_simplex_extreme: arity mismatch");
    double budget = 1.0;
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        budget -= intervals[i].lo;
        total += intervals[i].lo * values[i];
    }
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return maximize ? values[a] > values[b] : values[a] < values[b];
    });
    for (auto i : order) {
        if (budget <= 0.0) break;
        double room = std::min(budget, intervals[i].hi - intervals[i].lo);
        total += room * values[i];
        budget -= room;
    }
    return total;
}

namespace {

EuBounds eu_node(const CmaNode& n, const Eigen::VectorXd& u) {
    if (n.is_leaf()) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        n.states->for_each([&](std::uint32_t s) {
            lo = std::min(lo, u[s]);
            hi = std::max(hi, u[s]);
        });
        return {lo, hi};
    }
    std::vector<double> lows, highs;
    std::vector<ProbInterval> iv;
    for (const auto& b : n.children) {
        EuBounds cb = eu_node(b.child, u);
        lows.push_back(cb.lo);
        highs.push_back(cb.hi);
        iv.push_back(b.interval);
    }
    return {box_simplex_extreme(lows, iv, false), box_simplex_extreme(highs, iv, true)};
}

} // namespace

EuBounds eu_interval(const Cma& M, const Eigen::VectorXd& utility) {
    auto rep = validate_cma(M);
    if (!rep.ok()) throw std::invalid_argument("eu_interval: invalid CMA");
    if (static_cast<std::uint32_t>(utility.size()) != M.space_size)
        throw std::invalid_argument("eu_interval: utility/space size mismatch");
    if (!utility.allFinite())
        throw std::invalid_argument("eu_interval: utility must be finite");
    return eu_node(M.root, utility);
}

namespace {

void dot_node(const CmaNode& n, const StateSpace* space, int& counter, int my_id,
              std::ostringstream& os) {
    std::string label = n.label;
    if (n.states) {
        if (!label.empty()) label += "\\n";
        label += space ? space->describe_set(*n.states)
                       : "|B|=" + std::to_string(n.states->count());
    }
    os << "  n" << my_id << " [label=\"" << label << "\""
       << (n.condition_level ? ", shape=diamond" : n.is_leaf() ? ", shape=box" : "")
       << "];\n";
    for (const auto& b : n.children) {
        int child_id = ++counter;
        char buf[64];
        std::snprintf(buf, sizeof buf, "[%g,%g]", b.interval.lo, b.interval.hi);
        os << "  n" << my_id << " -> n" << child_id << " [label=\"" << buf << "\"];\n";
        dot_node(b.child, space, counter, child_id, os);
    }
}

void collect_leaf_products(const CmaNode& n, double lo, double hi,
                           std::vector<std::pair<StateSet, ProbInterval>>& out) {
    if (n.is_leaf()) {
        out.emplace_back(*n.states, ProbInterval(lo, std::min(1.0, hi)));
        return;
    }
    for (const auto& b : n.children)
        collect_leaf_products(b.child, lo * b.interval.lo, hi * b.interval.hi, out);
}

} // namespace

std::string to_dot(const Cma& M, const StateSpace* space) {
    std::ostringstream os;
    os << "digraph cma {\n  rankdir=TB;\n";
    int counter = 0;
    dot_node(M.root, space, counter, 0, os);
    os << "}\n";
    return os.str();
}

std::vector<std::pair<StateSet, ProbInterval>> leaf_products(const Cma& M) {
    std::vector<std::pair<StateSet, ProbInterval>> out;
    collect_leaf_products(M.root, 1.0, 1.0, out);
    return out;
}

} // namespace cma
