#include "cma/oracle.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace cma {

bool ExecTrace::conserves_mass(double tol) const {
    if (!p_pre.valid(tol)) return false;
    for (const auto& step : steps)
        if (std::abs(step.post.p.sum() - 1.0) > tol) return false;
    return true;
}

ExecTrace sample_exec_plan(const Plan& p, const Cma& M_pre, std::uint64_t seed) {
    if (p.actions.empty()) throw std::invalid_argument("sample_exec_plan: empty plan");
    if (!p.all_concrete())
        throw std::invalid_argument("sample_exec_plan: abstract action in plan");

    SplitRng rng(seed);
    ExecTrace trace;
    {
        SplitRng r = rng.split(1);
        auto [m, numbers] = sample_ma(M_pre, r);
        trace.m_pre = std::move(m);
        trace.pre_numbers = std::move(numbers);
    }
    {
        SplitRng r = rng.split(2);
        auto [P, alloc] = sample_consistent_pd(trace.m_pre, r);
        trace.p_pre = std::move(P);
        trace.pre_alloc = std::move(alloc);
    }

    Pd cur = trace.p_pre;
    const std::uint32_t n = cur.space_size();
    for (std::size_t t = 0; t < p.actions.size(); ++t) {
        const Action& a = *p.actions[t];
        SplitRng step_rng = rng.split(100 + t);
        auto cell_of = a.cell_of_state();
        auto groups = a.condition_groups();
        ExecStep step;
        step.post = Pd(n);
        for (std::uint32_t b = 0; b < n; ++b) {
            if (!(cur.p[b] > 0.0)) continue;
            if (cell_of[b] < 0)
                throw std::invalid_argument("sample_exec_plan: state " + std::to_string(b) +
                                            " is covered by no condition of " + a.name);
            StateStepRecord rec;
            rec.cell = cell_of[b];
            const auto& group = groups[rec.cell];
            std::vector<ProbInterval> iv;
            iv.reserve(group.size());
            for (int idx : group) iv.push_back(a.branches[idx].interval);
            rec.branch_probs = sample_simplex_box(iv, step_rng);
            rec.branch_alloc.resize(group.size());
            for (std::size_t q = 0; q < group.size(); ++q) {
                const auto& members = a.branches[group[q]].effect.image(b);
                auto weights = sample_simplex(members.size(), step_rng);
                rec.branch_alloc[q].reserve(members.size());
                for (std::size_t j = 0; j < members.size(); ++j) {
                    rec.branch_alloc[q].emplace_back(members[j], weights[j]);
                    step.post.p[members[j]] += cur.p[b] * rec.branch_probs[q] * weights[j];
                }
            }
            step.records.emplace(b, std::move(rec));
        }
        cur = step.post;
        trace.steps.push_back(std::move(step));
    }
    trace.p_post = cur;
    return trace;
}

std::string exec_trace_to_json(const ExecTrace& t) {
    nlohmann::json j;
    j["schemaVersion"] = 1;
    auto& pre = j["mPre"];
    for (const auto& br : t.m_pre.branches)
        pre.push_back({{"focal", br.focal.to_indices()}, {"mass", br.mass}});
    j["preNumbers"] = t.pre_numbers.numbers;
    j["pPre"] = std::vector<double>(t.p_pre.p.data(), t.p_pre.p.data() + t.p_pre.p.size());
    auto& steps = j["steps"];
    for (const auto& step : t.steps) {
        nlohmann::json js;
        for (const auto& [state, rec] : step.records) {
            nlohmann::json jr;
            jr["state"] = state;
            jr["cell"] = rec.cell;
            jr["branchProbs"] = rec.branch_probs;
            nlohmann::json allocs;
            for (const auto& branch : rec.branch_alloc) {
                nlohmann::json ja;
                for (const auto& [dest, w] : branch) ja.push_back({{"to", dest}, {"w", w}});
                allocs.push_back(std::move(ja));
            }
            jr["branchAlloc"] = std::move(allocs);
            js["records"].push_back(std::move(jr));
        }
        js["post"] =
            std::vector<double>(step.post.p.data(), step.post.p.data() + step.post.p.size());
        steps.push_back(std::move(js));
    }
    j["pPost"] =
        std::vector<double>(t.p_post.p.data(), t.p_post.p.data() + t.p_post.p.size());
    return j.dump();
}

namespace {

struct WitnessFailure {
    std::string what;
};

using SparseDist = std::map<std::uint32_t, double>;

double dist_mass(const SparseDist& d) {
    double s = 0.0;
    for (const auto& [k, v] : d) s += v;
    return s;
}

struct Layer {
    const Action* action = nullptr;
    const NodeInstantiation* part = nullptr;
    std::size_t step_base = 0;
};

/// Folds one execution trace onto the projected tree: reconstructs a number
/// per branch (flow fractions for condition branches, renormalized flow for
/// effect branches, feasible fillers for zero-mass subtrees) and the final
/// per-leaf allocations.
struct FoldEngine {
    const ExecTrace* trace;
    const std::vector<Layer>* layers;
    double tol;

    std::vector<double> witness;
    std::map<StateSet, SparseDist> final_alloc;
    std::map<StateSet, std::pair<int, double>> pre_focal; // set -> (branch, mass)

    void prepare() {
        for (std::size_t i = 0; i < trace->m_pre.branches.size(); ++i)
            pre_focal.emplace(trace->m_pre.branches[i].focal,
                              std::make_pair(static_cast<int>(i),
                                             trace->m_pre.branches[i].mass));
    }

    void run_prefix(const CmaNode& proj, const CmaNode& pre, double product,
                    std::size_t& pre_cursor) {
        if (pre.is_leaf()) {
            SparseDist alpha;
            if (product > 0.0) {
                auto it = pre_focal.find(*pre.states);
                if (it == pre_focal.end())
                    throw WitnessFailure{"positive-mass world leaf missing from sampled MA"};
                double scale = product / it->second.second;
                for (const auto& [state, mass] : trace->pre_alloc.split[it->second.first])
                    if (mass > 0.0) alpha[state] += mass * scale;
            }
            grow(proj, 0, alpha);
            return;
        }
        if (proj.children.size() != pre.children.size())
            throw WitnessFailure{"projected tree does not extend the pre-world tree"};
        std::size_t base = pre_cursor;
        pre_cursor += pre.children.size();
        for (std::size_t i = 0; i < pre.children.size(); ++i)
            witness.push_back(trace->pre_numbers.numbers.at(base + i));
        std::size_t wbase = witness.size() - pre.children.size();
        for (std::size_t i = 0; i < pre.children.size(); ++i)
            run_prefix(proj.children[i].child, pre.children[i].child,
                       product * witness[wbase + i], pre_cursor);
    }

    void grow(const CmaNode& node, std::size_t layer_idx, const SparseDist& alpha) {
        if (layer_idx == layers->size()) {
            if (!node.is_leaf())
                throw WitnessFailure{"tree deeper than the plan at a final leaf"};
            if (!alpha.empty()) {
                auto& acc = final_alloc[*node.states];
                for (const auto& [state, mass] : alpha) acc[state] += mass;
            }
            return;
        }
        if (!node.states)
            throw WitnessFailure{"grown node without a state set"};
        const Layer& layer = (*layers)[layer_idx];
        const Action& act = *layer.action;
        const StateSet& B = *node.states;

        auto conds = act.distinct_conditions();
        auto groups = act.condition_groups();
        std::vector<int> alive;
        for (std::size_t c = 0; c < conds.size(); ++c)
            if (B.intersects(conds[c])) alive.push_back(static_cast<int>(c));
        if (node.children.size() != alive.size())
            throw WitnessFailure{"condition fanout differs from the projected tree"};

        // Push the incoming allocation through the concrete sub-steps,
        // tracking the branch path taken.
        std::map<std::vector<int>, SparseDist> flows;
        if (!alpha.empty()) flows.emplace(std::vector<int>{}, alpha);
        const auto& sub = layer.part->plan.actions;
        for (std::size_t si = 0; si < sub.size(); ++si) {
            const ExecStep& step = trace->steps.at(layer.step_base + si);
            auto sub_groups = sub[si]->condition_groups();
            std::map<std::vector<int>, SparseDist> next;
            for (const auto& [path, dist] : flows) {
                for (const auto& [b, mass] : dist) {
                    if (!(mass > 0.0)) continue;
                    auto rit = step.records.find(b);
                    if (rit == step.records.end())
                        throw WitnessFailure{"trace record missing for a flowing state"};
                    const StateStepRecord& rec = rit->second;
                    const auto& group = sub_groups.at(rec.cell);
                    std::vector<int> key = path;
                    key.push_back(0);
                    for (std::size_t q = 0; q < group.size(); ++q) {
                        double y = rec.branch_probs[q];
                        if (!(y > 0.0)) continue;
                        key.back() = group[q];
                        SparseDist& target = next[key];
                        for (const auto& [dest, w] : rec.branch_alloc[q])
                            if (w > 0.0) target[dest] += mass * y * w;
                    }
                }
            }
            flows = std::move(next);
        }

        // Collapse concrete branch paths to abstract branches.
        std::map<int, SparseDist> branch_flow;
        for (auto& [path, dist] : flows) {
            int r = layer.part->map_path(path);
            if (r < 0 || r >= static_cast<int>(act.branches.size()))
                throw WitnessFailure{"branch path maps outside the abstract action"};
            auto& acc = branch_flow[r];
            for (const auto& [state, mass] : dist) acc[state] += mass;
        }

        const double mu = dist_mass(alpha);
        std::vector<double> cond_flow(alive.size(), 0.0);
        double mapped = 0.0;
        for (std::size_t ci = 0; ci < alive.size(); ++ci)
            for (int r : groups[alive[ci]]) {
                auto it = branch_flow.find(r);
                if (it != branch_flow.end()) {
                    double f = dist_mass(it->second);
                    cond_flow[ci] += f;
                    mapped += f;
                }
            }
        double total_flow = 0.0;
        for (const auto& [r, dist] : branch_flow) total_flow += dist_mass(dist);
        if (std::abs(total_flow - mapped) > tol * 10)
            throw WitnessFailure{"flow escaped to a condition pruned from the tree"};
        if (std::abs(total_flow - mu) > tol * 10)
            throw WitnessFailure{"mass not conserved while folding a layer"};

        // Condition-level numbers.
        std::vector<double> xs(alive.size());
        if (mu > 0.0) {
            for (std::size_t ci = 0; ci < alive.size(); ++ci) xs[ci] = cond_flow[ci] / mu;
        } else {
            std::vector<ProbInterval> iv(alive.size(), alive.size() == 1
                                                           ? ProbInterval::one()
                                                           : ProbInterval::unit());
            xs = feasible_simplex_box(iv);
        }
        witness.insert(witness.end(), xs.begin(), xs.end());

        for (std::size_t ci = 0; ci < alive.size(); ++ci) {
            const CmaNode& cond_node = node.children[ci].child;
            const auto& group = groups[alive[ci]];
            if (cond_node.children.size() != group.size())
                throw WitnessFailure{"effect fanout differs from the projected tree"};
            std::vector<double> ys(group.size(), 0.0);
            if (cond_flow[ci] > 0.0) {
                for (std::size_t g = 0; g < group.size(); ++g) {
                    auto it = branch_flow.find(group[g]);
                    ys[g] = it == branch_flow.end() ? 0.0
                                                    : dist_mass(it->second) / cond_flow[ci];
                }
            } else {
                std::vector<ProbInterval> iv;
                iv.reserve(group.size());
                for (int r : group) iv.push_back(act.branches[r].interval);
                try {
                    ys = feasible_simplex_box(iv);
                } catch (const std::invalid_argument& e) {
                    throw WitnessFailure{
                        std::string("no feasible numbers for a zero-flow group: ") + e.what()};
                }
            }
            witness.insert(witness.end(), ys.begin(), ys.end());
            for (std::size_t g = 0; g < group.size(); ++g) {
                auto it = branch_flow.find(group[g]);
                static const SparseDist kEmpty;
                grow(cond_node.children[g].child, layer_idx + 1,
                     it == branch_flow.end() ? kEmpty : it->second);
            }
        }
    }
};

/// Min distance of any witness number to its interval bounds (slack stat).
double witness_slack(const CmaNode& n, const std::vector<double>& numbers,
                     std::size_t& cursor) {
    double slack = std::numeric_limits<double>::infinity();
    if (n.is_leaf()) return slack;
    std::size_t base = cursor;
    cursor += n.children.size();
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        double x = numbers[base + i];
        slack = std::min(slack, std::min(x - n.children[i].interval.lo,
                                         n.children[i].interval.hi - x));
    }
    for (const auto& b : n.children)
        slack = std::min(slack, witness_slack(b.child, numbers, cursor));
    return slack;
}

class ClosureChecker {
public:
    ClosureChecker(const std::vector<StateSet>& focals, std::size_t element_cap,
                   std::size_t focal_cap) {
        if (focals.empty() || focals.size() > focal_cap) return;
        for (const auto& f : focals) focal_index_.emplace(f, 0);
        int next = 0;
        for (auto& [set, idx] : focal_index_) idx = next++;
        focals_.resize(focal_index_.size());
        for (const auto& [set, idx] : focal_index_) focals_[idx] = set;

        std::map<StateSet, int> seen;
        std::vector<StateSet> work;
        for (const auto& f : focals_)
            if (seen.emplace(f, 0).second) work.push_back(f);
        while (!work.empty()) {
            StateSet cur = work.back();
            work.pop_back();
            for (const auto& f : focals_) {
                StateSet next_set = cur | f;
                if (!seen.emplace(next_set, 0).second) continue;
                if (seen.size() > element_cap) return; // stays not-ready
                work.push_back(std::move(next_set));
            }
        }
        for (const auto& [set, unused] : seen) {
            std::vector<int> contained;
            for (std::size_t i = 0; i < focals_.size(); ++i)
                if (set.contains(focals_[i])) contained.push_back(static_cast<int>(i));
            contained_.push_back(std::move(contained));
            element_states_.push_back(set.to_indices());
        }
        ready_ = true;
    }

    bool ready() const { return ready_; }

    bool consistent(const Pd& P, const MassAssignment& m, double tol,
                    std::string* why) const {
        std::vector<double> mass(focals_.size(), 0.0);
        for (const auto& br : m.branches) {
            auto it = focal_index_.find(br.focal);
            if (it == focal_index_.end()) {
                if (why) *why = "induced focal not among the projected leaf sets";
                return false;
            }
            mass[it->second] += br.mass;
        }
        for (std::size_t e = 0; e < contained_.size(); ++e) {
            double lower = 0.0;
            for (int f : contained_[e]) lower += mass[f];
            double prob = 0.0;
            for (auto s : element_states_[e]) prob += P.p[s];
            if (prob < lower - tol) {
                if (why)
                    *why = "consistency inequality violated: P(B)=" + std::to_string(prob) +
                           " < " + std::to_string(lower) + " on a focal union";
                return false;
            }
        }
        return true;
    }

private:
    std::map<StateSet, int> focal_index_;
    std::vector<StateSet> focals_;
    std::vector<std::vector<int>> contained_;
    std::vector<std::vector<std::uint32_t>> element_states_;
    bool ready_ = false;
};

void collect_leaf_sets(const CmaNode& n, std::map<StateSet, int>& out) {
    if (n.is_leaf()) {
        if (n.states) out.emplace(*n.states, 0);
        return;
    }
    for (const auto& b : n.children) collect_leaf_sets(b.child, out);
}

struct SampleOutcome {
    bool pass = false;
    double slack = std::numeric_limits<double>::infinity();
    std::string why;
};

SampleOutcome verify_sample(const Cma& projected, const Cma& M_pre,
                            const std::vector<Layer>& layers, const ExecTrace& trace,
                            const CheckOptions& opts, const ClosureChecker* closure) {
    SampleOutcome out;
    try {
        FoldEngine fold{&trace, &layers, opts.tol, {}, {}, {}};
        fold.prepare();
        std::size_t pre_cursor = 0;
        fold.run_prefix(projected.root, M_pre.root, 1.0, pre_cursor);
        if (pre_cursor != trace.pre_numbers.numbers.size())
            throw WitnessFailure{"pre-world witness not fully consumed"};

        NumberAssignment witness{std::move(fold.witness)};
        MassAssignment induced = ma_from_witness(projected, witness, 0.0);

        AllocationRecord rec;
        rec.split.resize(induced.branches.size());
        for (std::size_t i = 0; i < induced.branches.size(); ++i) {
            auto it = fold.final_alloc.find(induced.branches[i].focal);
            if (it != fold.final_alloc.end())
                rec.split[i].assign(it->second.begin(), it->second.end());
        }

        std::string why;
        if (!contains_ma(projected, induced, witness, opts.tol, &why)) {
            out.why = why;
            return out;
        }
        if (!allocation_supports(trace.p_post, induced, rec, opts.tol, &why)) {
            out.why = why;
            return out;
        }
        if (closure && closure->ready() &&
            !closure->consistent(trace.p_post, induced, opts.tol, &why)) {
            out.why = why;
            return out;
        }
        std::size_t cursor = 0;
        out.slack = witness_slack(projected.root, witness.numbers, cursor);
        out.pass = true;
        return out;
    } catch (const WitnessFailure& wf) {
        out.why = "witness mapping failure (implementation bug): " + wf.what;
        return out;
    } catch (const std::exception& e) {
        out.why = std::string("witness mapping failure (implementation bug): ") + e.what();
        return out;
    }
}

int resolve_threads(const CheckOptions& opts) {
    if (opts.threads > 0) return opts.threads;
    if (const char* env = std::getenv("CMA_PLAN_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return 1;
}

std::uint64_t sample_seed(std::uint64_t master, std::int64_t index) {
    SplitRng rng(master);
    return rng.split(0x5eed0000ull + static_cast<std::uint64_t>(index)).next_u64();
}

SoundnessReport run_check(const Cma& projected, const Cma& M_pre,
                          const std::vector<Layer>& layers, const Plan& flat,
                          std::int64_t samples, std::uint64_t seed,
                          const CheckOptions& opts) {
    std::map<StateSet, int> leaf_sets;
    collect_leaf_sets(projected.root, leaf_sets);
    std::vector<StateSet> focals;
    focals.reserve(leaf_sets.size());
    for (const auto& [set, unused] : leaf_sets) focals.push_back(set);
    ClosureChecker closure(focals, opts.closure_element_cap, opts.closure_focal_cap);

    std::vector<SampleOutcome> outcomes(static_cast<std::size_t>(samples));
    auto worker = [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t i = begin; i < end; ++i) {
            ExecTrace trace = sample_exec_plan(flat, M_pre, sample_seed(seed, i));
            outcomes[static_cast<std::size_t>(i)] =
                verify_sample(projected, M_pre, layers, trace, opts, &closure);
        }
    };
    int threads = std::min<std::int64_t>(resolve_threads(opts), std::max<std::int64_t>(samples, 1));
    if (threads <= 1) {
        worker(0, samples);
    } else {
        std::vector<std::thread> pool;
        std::int64_t chunk = (samples + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            std::int64_t begin = t * chunk;
            std::int64_t end = std::min<std::int64_t>(samples, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    SoundnessReport report;
    report.samples = samples;
    report.consistency_mode = closure.ready() ? "closure+witness" : "witness";
    double slack = std::numeric_limits<double>::infinity();
    for (std::int64_t i = 0; i < samples; ++i) {
        const auto& o = outcomes[static_cast<std::size_t>(i)];
        if (o.pass) {
            ++report.passes;
            slack = std::min(slack, o.slack);
        } else if (!report.first_failure) {
            FailureRecord fr;
            fr.sample_index = i;
            fr.master_seed = seed;
            fr.constraint = o.why;
            fr.trace_json =
                exec_trace_to_json(sample_exec_plan(flat, M_pre, sample_seed(seed, i)));
            report.first_failure = std::move(fr);
        }
    }
    report.min_interval_slack = report.passes > 0 ? slack : 0.0;
    return report;
}

std::vector<Layer> make_layers(const Plan& layer_plan, const PlanInstantiation& inst) {
    if (layer_plan.actions.size() != inst.parts.size())
        throw std::invalid_argument("instantiation does not match the plan's layers");
    std::vector<Layer> layers(layer_plan.actions.size());
    std::size_t base = 0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i].action = layer_plan.actions[i].get();
        layers[i].part = &inst.parts[i];
        layers[i].step_base = base;
        base += inst.parts[i].plan.actions.size();
    }
    return layers;
}

PlanInstantiation identity_instantiation(const Plan& p) {
    PlanInstantiation inst;
    for (const auto& a : p.actions) {
        NodeInstantiation part;
        part.plan.actions = {a};
        part.map_path = [](const std::vector<int>& path) { return path.at(0); };
        inst.parts.push_back(std::move(part));
    }
    return inst;
}

void validate_check_inputs(const Plan& layer_plan, const Plan& flat, const Cma& M_pre) {
    auto world_rep = validate_cma(M_pre);
    if (!world_rep.ok()) throw std::invalid_argument("check_soundness: invalid pre-world");
    for (const auto& a : layer_plan.actions)
        if (!validate_action(*a).ok())
            throw std::invalid_argument("check_soundness: invalid action " + a->name);
    for (const auto& a : flat.actions) {
        if (a->kind != ActionKind::Concrete)
            throw std::invalid_argument("check_soundness: instantiation must be concrete");
        if (!validate_action(*a).ok())
            throw std::invalid_argument("check_soundness: invalid action " + a->name);
    }
}

} // namespace

SoundnessReport check_soundness(const Plan& p, const Cma& M_pre, std::int64_t samples,
                                std::uint64_t seed, const CheckOptions& opts) {
    PlanInstantiation inst = identity_instantiation(p);
    validate_check_inputs(p, p, M_pre);
    auto [projected, stats] = project_plan(p, M_pre);
    auto layers = make_layers(p, inst);
    return run_check(projected, M_pre, layers, p, samples, seed, opts);
}

SoundnessReport check_soundness_instantiation(const Plan& abstract_plan,
                                              const PlanInstantiation& inst, const Cma& M_pre,
                                              std::int64_t samples, std::uint64_t seed,
                                              const CheckOptions& opts) {
    Plan flat = inst.flat();
    validate_check_inputs(abstract_plan, flat, M_pre);
    auto [projected, stats] = project_plan(abstract_plan, M_pre);
    auto layers = make_layers(abstract_plan, inst);
    return run_check(projected, M_pre, layers, flat, samples, seed, opts);
}

SoundnessReport check_soundness_projected(const Cma& projected, const Plan& layer_plan,
                                          const PlanInstantiation& inst, const Cma& M_pre,
                                          std::int64_t samples, std::uint64_t seed,
                                          const CheckOptions& opts) {
    Plan flat = inst.flat();
    validate_check_inputs(layer_plan, flat, M_pre);
    auto layers = make_layers(layer_plan, inst);
    return run_check(projected, M_pre, layers, flat, samples, seed, opts);
}

bool is_spd_action(const Action& a, double tol) {
    if (a.kind != ActionKind::Concrete) return false;
    if (!validate_action(a, tol).ok()) return false;
    for (const auto& br : a.branches) {
        if (!br.interval.is_point(tol)) return false;
        bool singleton = true;
        br.condition.for_each([&](std::uint32_t b) {
            if (br.effect.image(b).size() != 1) singleton = false;
        });
        if (!singleton) return false;
    }
    return true;
}

Pd spd_project(const Plan& p, const Pd& P0) {
    if (p.actions.empty()) throw std::invalid_argument("spd_project: empty plan");
    const auto n = P0.p.size();
    Eigen::VectorXd cur = P0.p;
    for (const auto& aref : p.actions) {
        const Action& a = *aref;
        if (!is_spd_action(a))
            throw std::invalid_argument("spd_project: action " + a.name +
                                        " is not SPD-restricted");
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
        auto cell_of = a.cell_of_state();
        auto groups = a.condition_groups();
        for (Eigen::Index b = 0; b < n; ++b) {
            const auto& group = groups[cell_of[static_cast<std::uint32_t>(b)]];
            for (int idx : group) {
                const auto& br = a.branches[idx];
                double prob = 0.5 * (br.interval.lo + br.interval.hi);
                T(br.effect.image(static_cast<std::uint32_t>(b))[0], b) += prob;
            }
        }
        cur = T * cur;
    }
    Pd out(static_cast<std::uint32_t>(n));
    out.p = cur;
    return out;
}

namespace {

void spd_walk(const CmaNode& node, double product, double tol, Eigen::VectorXd& marg) {
    if (node.is_leaf()) {
        auto idx = node.states->to_indices();
        if (idx.size() != 1)
            throw std::invalid_argument("spd_marginals: non-singleton leaf");
        marg[idx[0]] += product;
        return;
    }
    for (const auto& b : node.children) {
        if (!b.interval.is_point(tol))
            throw std::invalid_argument("spd_marginals: non-point interval");
        spd_walk(b.child, product * b.interval.lo, tol, marg);
    }
}

} // namespace

Eigen::VectorXd spd_marginals(const Cma& projected, double tol) {
    Eigen::VectorXd marg = Eigen::VectorXd::Zero(projected.space_size);
    spd_walk(projected.root, 1.0, tol, marg);
    return marg;
}

} // namespace cma
