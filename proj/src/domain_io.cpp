#include "cma/domain_io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cma {

double parse_number(const json& j) {
    if (j.is_number()) {
        double v = j.get<double>();
        if (!std::isfinite(v)) throw ParseError("number out of range: " + j.dump());
        return v;
    }
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        auto slash = s.find('/');
        if (slash == std::string::npos)
            throw ParseError("expected a number or \"p/q\" rational, got \"" + s + "\"");
        try {
            long long p = std::stoll(s.substr(0, slash));
            long long q = std::stoll(s.substr(slash + 1));
            if (q == 0) throw ParseError("rational with zero denominator: " + s);
            return static_cast<double>(p) / static_cast<double>(q);
        } catch (const std::invalid_argument&) {
            throw ParseError("malformed rational: " + s);
        } catch (const std::out_of_range&) {
            throw ParseError("rational out of range: " + s);
        }
    }
    throw ParseError("expected a number, got " + j.dump());
}

namespace {

ProbInterval parse_interval(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2)
        throw ParseError(where + ": interval must be [lo, hi]");
    ProbInterval iv(parse_number(j[0]), parse_number(j[1]));
    if (!iv.valid())
        throw ParseError(where + ": interval outside [0,1] or inverted");
    return iv;
}

Cmp parse_cmp(const std::string& s, const std::string& where) {
    if (s == "<") return Cmp::Lt;
    if (s == "<=") return Cmp::Le;
    if (s == "=" || s == "==") return Cmp::Eq;
    if (s == ">=") return Cmp::Ge;
    if (s == ">") return Cmp::Gt;
    throw ParseError(where + ": unknown comparison operator \"" + s + "\"");
}

ConditionExpr parse_expr(const json& j, const std::string& where) {
    if (j.is_boolean())
        return j.get<bool>() ? ConditionExpr::make_true() : ConditionExpr::make_false();
    if (!j.is_object()) throw ParseError(where + ": condition expression must be an object");
    if (j.contains("attr")) {
        if (!j.contains("op") || !j.contains("value"))
            throw ParseError(where + ": atom needs attr/op/value");
        return ConditionExpr::atom(j["attr"].get<std::string>(),
                                   parse_cmp(j["op"].get<std::string>(), where),
                                   j["value"].get<int>());
    }
    if (j.contains("and") || j.contains("or")) {
        const bool is_and = j.contains("and");
        const json& arr = is_and ? j["and"] : j["or"];
        if (!arr.is_array() || arr.empty())
            throw ParseError(where + ": and/or needs a nonempty array");
        std::vector<ConditionExpr> kids;
        for (const auto& k : arr) kids.push_back(parse_expr(k, where));
        return is_and ? ConditionExpr::conj(std::move(kids))
                      : ConditionExpr::disj(std::move(kids));
    }
    if (j.contains("not")) return ConditionExpr::negate(parse_expr(j["not"], where));
    throw ParseError(where + ": unrecognized condition expression " + j.dump());
}

/// Leaf / condition specs: named condition, inline expression, or explicit
/// state index array.
StateSet parse_state_set(const json& j, const Domain& d, const std::string& where) {
    if (j.is_string()) {
        auto it = d.conditions.find(j.get<std::string>());
        if (it == d.conditions.end())
            throw ParseError(where + ": unknown condition \"" + j.get<std::string>() + "\"");
        return it->second;
    }
    if (j.is_array()) {
        std::vector<std::uint32_t> idx;
        for (const auto& v : j) idx.push_back(v.get<std::uint32_t>());
        try {
            return StateSet::of(d.space.size(), idx);
        } catch (const std::out_of_range& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
    try {
        return compile_condition(parse_expr(j, where), d.space);
    } catch (const std::invalid_argument& e) {
        throw ParseError(where + ": " + e.what());
    }
}

Effect parse_effect_spec(const json& j, Domain& d, const std::string& where) {
    if (j.is_string()) {
        auto it = d.effects.find(j.get<std::string>());
        if (it == d.effects.end())
            throw ParseError(where + ": unknown effect \"" + j.get<std::string>() + "\"");
        return it->second;
    }
    if (!j.is_object()) throw ParseError(where + ": effect must be a name or an object");
    if (j.contains("table")) {
        const json& t = j["table"];
        if (!t.is_array() || t.size() != d.space.size())
            throw ParseError(where + ": effect table must list every state's image");
        std::vector<std::vector<std::uint32_t>> table;
        for (const auto& row : t) table.push_back(row.get<std::vector<std::uint32_t>>());
        try {
            return Effect::from_table(d.space.size(), std::move(table));
        } catch (const std::invalid_argument& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
    if (j.contains("rules")) {
        std::vector<EffectRule> rules;
        for (const auto& r : j["rules"]) {
            EffectRule rule;
            rule.attr = r.at("attr").get<std::string>();
            if (r.contains("add")) {
                rule.additive = true;
                rule.lo = r["add"][0].get<int>();
                rule.hi = r["add"][1].get<int>();
            } else if (r.contains("set")) {
                rule.additive = false;
                rule.lo = r["set"][0].get<int>();
                rule.hi = r["set"][1].get<int>();
            } else {
                throw ParseError(where + ": effect rule needs \"add\" or \"set\"");
            }
            rules.push_back(std::move(rule));
        }
        try {
            return compile_effect(rules, d.space, &d.parse_warnings);
        } catch (const std::invalid_argument& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
    throw ParseError(where + ": effect needs \"rules\" or \"table\"");
}

CmaNode parse_tree_node(const json& j, const Domain& d, const std::string& where) {
    if (!j.is_object()) throw ParseError(where + ": world node must be an object");
    if (j.contains("leaf")) {
        StateSet set = parse_state_set(j["leaf"], d, where);
        return CmaNode::leaf(std::move(set));
    }
    if (!j.contains("children"))
        throw ParseError(where + ": world node needs \"leaf\" or \"children\"");
    CmaNode node;
    if (j.contains("states")) node.states = parse_state_set(j["states"], d, where);
    int i = 0;
    for (const auto& c : j["children"]) {
        CmaBranch br;
        br.interval = parse_interval(c.at("interval"), where + "/children");
        br.child = parse_tree_node(c.at("node"), d, where + "/" + std::to_string(i));
        node.children.push_back(std::move(br));
        ++i;
    }
    return node;
}

void parse_hierarchy(const std::string& name, const json& spec, Domain& d) {
    const std::string where = "hierarchies/" + name;
    if (!spec.is_object() || !spec.contains("nodes") || !spec.contains("root"))
        throw ParseError(where + ": hierarchy needs \"nodes\" and \"root\"");
    const json& nodes = spec["nodes"];
    Hierarchy h;
    std::map<std::string, int> built;
    std::set<std::string> visiting;

    std::function<int(const std::string&)> build = [&](const std::string& node_name) -> int {
        auto done = built.find(node_name);
        if (done != built.end()) return done->second;
        if (!visiting.insert(node_name).second)
            throw ParseError(where + ": cycle detected at node \"" + node_name + "\"");
        if (!nodes.contains(node_name))
            throw ParseError(where + ": unknown node \"" + node_name + "\"");
        const json& n = nodes[node_name];
        const std::string kind = n.at("kind").get<std::string>();
        int id = -1;
        if (kind == "concrete") {
            const std::string action = n.at("action").get<std::string>();
            auto it = d.actions.find(action);
            if (it == d.actions.end())
                throw ParseError(where + ": node \"" + node_name +
                                 "\" references unknown action \"" + action + "\"");
            id = h.add_concrete(node_name, it->second);
        } else if (kind == "inter" || kind == "seq") {
            std::vector<int> kids;
            for (const auto& c : n.at("children"))
                kids.push_back(build(c.get<std::string>()));
            try {
                if (kind == "inter") {
                    std::vector<std::optional<std::vector<int>>> pairings;
                    if (n.contains("pairings"))
                        for (const auto& p : n["pairings"])
                            pairings.emplace_back(p.get<std::vector<int>>());
                    else if (n.contains("pairing"))
                        pairings.emplace_back(n["pairing"].get<std::vector<int>>());
                    id = h.add_inter(node_name, kids, pairings);
                } else {
                    id = h.add_sequential(node_name, kids);
                }
            } catch (const std::invalid_argument& e) {
                throw ParseError(where + "/" + node_name + ": " + e.what());
            }
        } else if (kind == "intra") {
            int kid = build(n.at("child").get<std::string>());
            try {
                id = h.add_intra(node_name, kid,
                                 n.at("merge").get<std::vector<std::vector<int>>>());
            } catch (const std::invalid_argument& e) {
                throw ParseError(where + "/" + node_name + ": " + e.what());
            }
        } else {
            throw ParseError(where + ": node \"" + node_name + "\" has unknown kind \"" +
                             kind + "\"");
        }
        visiting.erase(node_name);
        built.emplace(node_name, id);
        return id;
    };

    // Build from the root; then pick up any nodes unreachable from it so
    // cmd_abstract/--node can address them too.
    const std::string root = spec["root"].get<std::string>();
    int root_id = build(root);
    for (auto it = nodes.begin(); it != nodes.end(); ++it) build(it.key());

    d.hierarchies.emplace(name, std::move(h));
    d.hierarchy_roots.emplace(name, root_id);
    d.hierarchy_specs.emplace(name, spec);
}

} // namespace

namespace {

Domain parse_domain_impl(const json& j) {
    if (!j.is_object()) throw ParseError("domain file must be a JSON object");
    Domain d;

    if (!j.contains("space") || !j["space"].contains("attributes"))
        throw ParseError("domain needs space.attributes");
    std::vector<Attribute> attrs;
    for (const auto& a : j["space"]["attributes"]) {
        Attribute attr;
        attr.name = a.at("name").get<std::string>();
        if (a.contains("domain")) {
            attr.domain = a["domain"].get<std::vector<int>>();
        } else if (a.contains("min") && a.contains("max")) {
            for (int v = a["min"].get<int>(); v <= a["max"].get<int>(); ++v)
                attr.domain.push_back(v);
        } else {
            throw ParseError("attribute " + attr.name + " needs \"domain\" or min/max");
        }
        attrs.push_back(std::move(attr));
    }
    try {
        d.space = StateSpace(std::move(attrs));
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("space: ") + e.what());
    }

    if (j.contains("conditions"))
        for (auto it = j["conditions"].begin(); it != j["conditions"].end(); ++it) {
            const std::string where = "conditions/" + it.key();
            if (it.value().is_array()) {
                d.conditions.emplace(it.key(), parse_state_set(it.value(), d, where));
            } else {
                ConditionExpr e = parse_expr(it.value(), where);
                try {
                    d.conditions.emplace(it.key(), compile_condition(e, d.space));
                } catch (const std::invalid_argument& ex) {
                    throw ParseError(where + ": " + ex.what());
                }
                d.condition_exprs.emplace(it.key(), std::move(e));
            }
        }

    if (j.contains("effects"))
        for (auto it = j["effects"].begin(); it != j["effects"].end(); ++it)
            d.effects.emplace(it.key(),
                              parse_effect_spec(it.value(), d, "effects/" + it.key()));

    if (j.contains("actions"))
        for (auto it = j["actions"].begin(); it != j["actions"].end(); ++it) {
            const std::string where = "actions/" + it.key();
            const json& spec = it.value();
            Action a;
            a.name = it.key();
            a.space_size = d.space.size();
            const std::string kind =
                spec.contains("kind") ? spec["kind"].get<std::string>() : "concrete";
            if (kind == "concrete")
                a.kind = ActionKind::Concrete;
            else if (kind == "abstract")
                a.kind = ActionKind::Abstract;
            else
                throw ParseError(where + ": unknown kind \"" + kind + "\"");
            if (!spec.contains("branches") || !spec["branches"].is_array() ||
                spec["branches"].empty())
                throw ParseError(where + ": action needs a nonempty branches array");
            for (const auto& b : spec["branches"]) {
                ActionBranch br;
                br.condition = parse_state_set(b.at("condition"), d, where);
                if (b["condition"].is_object() || b["condition"].is_boolean())
                    br.condition_expr = parse_expr(b["condition"], where);
                br.interval = parse_interval(b.at("interval"), where);
                br.effect = parse_effect_spec(b.at("effect"), d, where);
                a.branches.push_back(std::move(br));
            }
            d.actions.emplace(it.key(), std::make_shared<Action>(std::move(a)));
        }

    if (j.contains("worlds"))
        for (auto it = j["worlds"].begin(); it != j["worlds"].end(); ++it) {
            Cma world;
            world.space_size = d.space.size();
            world.root = parse_tree_node(it.value(), d, "worlds/" + it.key());
            d.worlds.emplace(it.key(), std::move(world));
        }

    if (j.contains("plans"))
        for (auto it = j["plans"].begin(); it != j["plans"].end(); ++it) {
            const std::string where = "plans/" + it.key();
            if (!it.value().is_array() || it.value().empty())
                throw ParseError(where + ": plan must be a nonempty action name array");
            Plan p;
            std::vector<std::string> names;
            for (const auto& n : it.value()) {
                const std::string name = n.get<std::string>();
                auto a = d.actions.find(name);
                if (a == d.actions.end())
                    throw ParseError(where + ": unknown action \"" + name + "\"");
                p.actions.push_back(a->second);
                names.push_back(name);
            }
            d.plans.emplace(it.key(), std::move(p));
            d.plan_actions.emplace(it.key(), std::move(names));
        }

    if (j.contains("hierarchies"))
        for (auto it = j["hierarchies"].begin(); it != j["hierarchies"].end(); ++it)
            parse_hierarchy(it.key(), it.value(), d);

    if (j.contains("utilities"))
        for (auto it = j["utilities"].begin(); it != j["utilities"].end(); ++it) {
            const std::string where = "utilities/" + it.key();
            const json& spec = it.value();
            Eigen::VectorXd u(d.space.size());
            if (spec.is_object() && spec.contains("table")) {
                const json& t = spec["table"];
                if (!t.is_array() || t.size() != d.space.size())
                    throw ParseError(where + ": utility table must cover every state");
                for (std::size_t i = 0; i < t.size(); ++i)
                    u[static_cast<Eigen::Index>(i)] = parse_number(t[i]);
            } else if (spec.is_object() && spec.contains("linear")) {
                const json& lin = spec["linear"];
                u.setZero();
                for (auto term = lin.begin(); term != lin.end(); ++term) {
                    double coef = parse_number(term.value());
                    if (term.key() == "const") {
                        u.array() += coef;
                        continue;
                    }
                    int idx = d.space.attribute_index(term.key());
                    if (idx < 0)
                        throw ParseError(where + ": unknown attribute \"" + term.key() +
                                         "\"");
                    for (std::uint32_t s = 0; s < d.space.size(); ++s)
                        u[s] += coef * d.space.value_at(s, static_cast<std::size_t>(idx));
                }
            } else {
                throw ParseError(where + ": utility needs \"table\" or \"linear\"");
            }
            d.utilities.emplace(it.key(), std::move(u));
        }

    return d;
}

} // namespace

Domain parse_domain(const json& j) {
    try {
        return parse_domain_impl(j);
    } catch (const json::exception& e) {
        // wrong field types, missing keys
        throw ParseError(std::string("malformed domain file: ") + e.what());
    }
}

Domain load_domain(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open domain file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        return parse_domain(j);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

namespace {

json set_to_json(const StateSet& s) {
    json arr = json::array();
    s.for_each([&](std::uint32_t i) { arr.push_back(i); });
    return arr;
}

json effect_to_json(const Effect& e) {
    json table = json::array();
    for (std::uint32_t s = 0; s < e.space_size(); ++s) table.push_back(e.image(s));
    return json{{"table", table}};
}

json tree_node_to_json(const CmaNode& n) {
    if (n.is_leaf()) return json{{"leaf", set_to_json(*n.states)}};
    json node;
    if (n.states) node["states"] = set_to_json(*n.states);
    if (n.condition_level) node["conditionLevel"] = true;
    if (!n.label.empty()) node["label"] = n.label;
    json kids = json::array();
    for (const auto& b : n.children)
        kids.push_back(json{{"interval", {b.interval.lo, b.interval.hi}},
                            {"node", tree_node_to_json(b.child)}});
    node["children"] = std::move(kids);
    return node;
}

CmaNode tree_node_from_json(const json& j, std::uint32_t space_size) {
    if (j.contains("leaf")) {
        std::vector<std::uint32_t> idx = j["leaf"].get<std::vector<std::uint32_t>>();
        return CmaNode::leaf(StateSet::of(space_size, idx));
    }
    CmaNode n;
    if (j.contains("states"))
        n.states = StateSet::of(space_size, j["states"].get<std::vector<std::uint32_t>>());
    if (j.contains("conditionLevel")) n.condition_level = j["conditionLevel"].get<bool>();
    if (j.contains("label")) n.label = j["label"].get<std::string>();
    for (const auto& c : j.at("children")) {
        CmaBranch br;
        br.interval = ProbInterval(parse_number(c.at("interval")[0]),
                                   parse_number(c.at("interval")[1]));
        br.child = tree_node_from_json(c.at("node"), space_size);
        n.children.push_back(std::move(br));
    }
    return n;
}

} // namespace

json tree_to_json(const Cma& M) {
    json j = tree_node_to_json(M.root);
    j["spaceSize"] = M.space_size;
    return j;
}

Cma tree_from_json(const json& j, std::uint32_t space_size) {
    try {
        Cma m;
        m.space_size =
            j.contains("spaceSize") ? j["spaceSize"].get<std::uint32_t>() : space_size;
        json body = j;
        body.erase("spaceSize");
        m.root = tree_node_from_json(body, m.space_size);
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed tree JSON: ") + e.what());
    } catch (const std::out_of_range& e) {
        throw ParseError(std::string("malformed tree JSON: ") + e.what());
    }
}

json action_to_json(const Action& a) {
    json branches = json::array();
    for (const auto& br : a.branches)
        branches.push_back(json{{"condition", set_to_json(br.condition)},
                                {"interval", {br.interval.lo, br.interval.hi}},
                                {"effect", effect_to_json(br.effect)}});
    return json{{"kind", a.kind == ActionKind::Concrete ? "concrete" : "abstract"},
                {"branches", std::move(branches)}};
}

json serialize_domain(const Domain& d) {
    json j;
    j["schemaVersion"] = 1;
    json attrs = json::array();
    for (const auto& a : d.space.attributes())
        attrs.push_back(json{{"name", a.name}, {"domain", a.domain}});
    j["space"] = json{{"attributes", std::move(attrs)}};

    if (!d.conditions.empty()) {
        json out;
        for (const auto& [name, set] : d.conditions) out[name] = set_to_json(set);
        j["conditions"] = std::move(out);
    }
    if (!d.effects.empty()) {
        json out;
        for (const auto& [name, e] : d.effects) out[name] = effect_to_json(e);
        j["effects"] = std::move(out);
    }
    if (!d.actions.empty()) {
        json out;
        for (const auto& [name, a] : d.actions) out[name] = action_to_json(*a);
        j["actions"] = std::move(out);
    }
    if (!d.worlds.empty()) {
        json out;
        for (const auto& [name, w] : d.worlds) out[name] = tree_node_to_json(w.root);
        j["worlds"] = std::move(out);
    }
    if (!d.plan_actions.empty()) {
        json out;
        for (const auto& [name, names] : d.plan_actions) out[name] = names;
        j["plans"] = std::move(out);
    }
    if (!d.hierarchy_specs.empty()) {
        json out;
        for (const auto& [name, spec] : d.hierarchy_specs) out[name] = spec;
        j["hierarchies"] = std::move(out);
    }
    if (!d.utilities.empty()) {
        json out;
        for (const auto& [name, u] : d.utilities) {
            json table = json::array();
            for (Eigen::Index i = 0; i < u.size(); ++i) table.push_back(u[i]);
            out[name] = json{{"table", std::move(table)}};
        }
        j["utilities"] = std::move(out);
    }
    return j;
}

json stats_to_json(const ProjectionStats& s) {
    json steps = json::array();
    for (const auto& st : s.steps) {
        json t_obs;
        for (const auto& [t, count] : st.t_observations) t_obs[std::to_string(t)] = count;
        steps.push_back(json{{"action", st.action},
                             {"grownLeaves", st.grown_leaves},
                             {"prunedBranches", st.pruned_branches},
                             {"addedConditionNodes", st.added_condition_nodes},
                             {"addedEffectNodes", st.added_effect_nodes},
                             {"tObservations", std::move(t_obs)}});
    }
    return json{{"steps", std::move(steps)},
                {"nodeCount", s.node_count},
                {"totalNodeCount", s.total_node_count},
                {"leafCount", s.leaf_count},
                {"depth", s.tree_depth},
                {"potentialMerges", s.potential_merges}};
}

json report_to_json(const SoundnessReport& r) {
    json j{{"samples", r.samples},
           {"passes", r.passes},
           {"consistencyMode", r.consistency_mode},
           {"minIntervalSlack", r.min_interval_slack},
           {"allPassed", r.all_passed()}};
    if (r.first_failure) {
        j["firstFailure"] = json{{"sampleIndex", r.first_failure->sample_index},
                                 {"masterSeed", r.first_failure->master_seed},
                                 {"constraint", r.first_failure->constraint},
                                 {"trace", json::parse(r.first_failure->trace_json)}};
    }
    return j;
}

json validation_to_json(const ValidationReport& r) {
    json issues = json::array();
    for (const auto& i : r.issues)
        issues.push_back(json{{"severity", i.severity == Severity::Error ? "error" : "warning"},
                              {"code", i.code},
                              {"path", i.path},
                              {"message", i.message}});
    return json{{"ok", r.ok()},
                {"errors", r.error_count()},
                {"warnings", r.warning_count()},
                {"issues", std::move(issues)}};
}

ValidationReport validate_domain(const Domain& d) {
    ValidationReport rep;
    rep.merge(d.parse_warnings, "parse");
    for (const auto& [name, a] : d.actions) rep.merge(validate_action(*a), "actions/" + name);
    for (const auto& [name, w] : d.worlds) rep.merge(validate_cma(w), "worlds/" + name);
    for (const auto& [name, h] : d.hierarchies)
        for (int i = 0; i < h.size(); ++i)
            rep.merge(validate_action(*h.node(i).derived),
                      "hierarchies/" + name + "/" + h.node(i).name);
    return rep;
}

namespace {

void dump_value(const json& j, int indent, int level, std::string& out) {
    const std::string pad(static_cast<std::size_t>(indent) * level, ' ');
    const std::string pad_in(static_cast<std::size_t>(indent) * (level + 1), ' ');
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad_in + json(it.key()).dump() + ": ";
            dump_value(it.value(), indent, level + 1, out);
        }
        out += "\n" + pad + "}";
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        bool first = true;
        for (const auto& v : j) {
            if (!first) out += ",\n";
            first = false;
            out += pad_in;
            dump_value(v, indent, level + 1, out);
        }
        out += "\n" + pad + "]";
        return;
    }
    case json::value_t::number_float: {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", j.get<double>());
        out += buf;
        return;
    }
    default:
        out += j.dump();
        return;
    }
}

} // namespace

std::string dump_canonical(const json& j, int indent) {
    std::string out;
    dump_value(j, indent, 0, out);
    out += "\n";
    return out;
}

} // namespace cma
