// cma — project, abstract, and verify interval-tree worlds from domain files.
//
// Exit codes: 0 ok, 1 validation failure, 2 parse error, 3 soundness failure.

#include "cma/domain_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using cma::json;

struct CommonArgs {
    std::string domain;
    std::string out;
    std::string format = "json";
};

void write_output(const CommonArgs& args, const std::string& text) {
    if (args.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(args.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write output file: " + args.out);
    f << text;
}

const cma::Cma& find_world(const cma::Domain& d, const std::string& name) {
    auto it = d.worlds.find(name);
    if (it == d.worlds.end()) throw cma::ParseError("unknown world \"" + name + "\"");
    return it->second;
}

const cma::Plan& find_plan(const cma::Domain& d, const std::string& name) {
    auto it = d.plans.find(name);
    if (it == d.plans.end()) throw cma::ParseError("unknown plan \"" + name + "\"");
    return it->second;
}

std::pair<const cma::Hierarchy*, int> find_hierarchy_node(const cma::Domain& d,
                                                          const std::string& hierarchy,
                                                          const std::string& node) {
    auto it = d.hierarchies.find(hierarchy);
    if (it == d.hierarchies.end())
        throw cma::ParseError("unknown hierarchy \"" + hierarchy + "\"");
    int id = node.empty() ? d.hierarchy_roots.at(hierarchy) : it->second.find(node);
    if (id < 0) throw cma::ParseError("unknown hierarchy node \"" + node + "\"");
    return {&it->second, id};
}

int cmd_validate(const CommonArgs& args) {
    cma::Domain d = cma::load_domain(args.domain);
    cma::ValidationReport rep = cma::validate_domain(d);
    if (args.format == "text") {
        std::string text;
        for (const auto& i : rep.issues)
            text += (i.severity == cma::Severity::Error ? "error" : "warning") +
                    std::string(" [") + i.code + "] " + i.path + ": " + i.message + "\n";
        text += rep.ok() ? "OK\n" : "INVALID\n";
        write_output(args, text);
    } else {
        json j = cma::validation_to_json(rep);
        j["schemaVersion"] = 1;
        write_output(args, cma::dump_canonical(j));
    }
    return rep.ok() ? 0 : 1;
}

int cmd_project(const CommonArgs& args, const std::string& world, const std::string& plan) {
    cma::Domain d = cma::load_domain(args.domain);
    const cma::Cma& w = find_world(d, world);
    const cma::Plan& p = find_plan(d, plan);
    auto [tree, stats] = cma::project_plan(p, w);
    if (args.format == "dot") {
        write_output(args, cma::to_dot(tree, &d.space));
    } else if (args.format == "text") {
        std::string text = "projected " + plan + " on " + world + "\n";
        text += "nodeCount=" + std::to_string(stats.node_count) +
                " totalNodes=" + std::to_string(stats.total_node_count) +
                " leaves=" + std::to_string(stats.leaf_count) +
                " depth=" + std::to_string(stats.tree_depth) + "\n";
        write_output(args, text);
    } else {
        json j{{"schemaVersion", 1},
               {"world", world},
               {"plan", plan},
               {"tree", cma::tree_to_json(tree)},
               {"stats", cma::stats_to_json(stats)}};
        write_output(args, cma::dump_canonical(j));
    }
    return 0;
}

int cmd_abstract(const CommonArgs& args, const std::string& hierarchy,
                 const std::string& node) {
    cma::Domain d = cma::load_domain(args.domain);
    auto it = d.hierarchies.find(hierarchy);
    if (it == d.hierarchies.end())
        throw cma::ParseError("unknown hierarchy \"" + hierarchy + "\"");
    const cma::Hierarchy& h = it->second;
    json out;
    if (node.empty()) {
        for (int i = 0; i < h.size(); ++i)
            out[h.node(i).name] = cma::action_to_json(*h.node(i).derived);
    } else {
        int id = h.find(node);
        if (id < 0) throw cma::ParseError("unknown hierarchy node \"" + node + "\"");
        out[h.node(id).name] = cma::action_to_json(*h.node(id).derived);
    }
    json j{{"schemaVersion", 1}, {"hierarchy", hierarchy}, {"actions", std::move(out)}};
    write_output(args, cma::dump_canonical(j));
    return 0;
}

int cmd_instantiate(const CommonArgs& args, const std::string& hierarchy,
                    const std::string& node) {
    cma::Domain d = cma::load_domain(args.domain);
    auto [h, id] = find_hierarchy_node(d, hierarchy, node);
    auto insts = cma::instantiations(*h, id);
    json plans = json::array();
    for (const auto& inst : insts) {
        json names = json::array();
        for (const auto& a : inst.plan.actions) names.push_back(a->name);
        plans.push_back(std::move(names));
    }
    json j{{"schemaVersion", 1},
           {"hierarchy", hierarchy},
           {"node", h->node(id).name},
           {"count", insts.size()},
           {"plans", std::move(plans)}};
    write_output(args, cma::dump_canonical(j));
    return 0;
}

int cmd_check(const CommonArgs& args, const std::string& plan, const std::string& hierarchy,
              const std::string& node, const std::string& world, std::int64_t samples,
              std::uint64_t seed) {
    cma::Domain d = cma::load_domain(args.domain);
    const cma::Cma& w = find_world(d, world);
    json runs = json::array();
    bool all_ok = true;
    if (!plan.empty()) {
        const cma::Plan& p = find_plan(d, plan);
        cma::SoundnessReport rep = cma::check_soundness(p, w, samples, seed);
        all_ok = rep.all_passed();
        json r = cma::report_to_json(rep);
        r["plan"] = plan;
        runs.push_back(std::move(r));
    } else {
        auto [h, id] = find_hierarchy_node(d, hierarchy, node);
        cma::Plan abstract_plan = cma::derived_plan(*h, {id});
        auto insts = cma::enumerate_plan_instantiations(*h, {id});
        for (std::size_t i = 0; i < insts.size(); ++i) {
            cma::SoundnessReport rep =
                cma::check_soundness_instantiation(abstract_plan, insts[i], w, samples, seed);
            all_ok = all_ok && rep.all_passed();
            json r = cma::report_to_json(rep);
            json names = json::array();
            for (const auto& a : insts[i].flat().actions) names.push_back(a->name);
            r["instantiation"] = std::move(names);
            runs.push_back(std::move(r));
        }
    }
    json j{{"schemaVersion", 1},
           {"world", world},
           {"samples", samples},
           {"seed", seed},
           {"allPassed", all_ok},
           {"runs", std::move(runs)}};
    if (args.format == "text") {
        std::string text;
        for (const auto& r : j["runs"])
            text += (r["allPassed"].get<bool>() ? "PASS " : "FAIL ") +
                    std::to_string(r["passes"].get<std::int64_t>()) + "/" +
                    std::to_string(r["samples"].get<std::int64_t>()) + "\n";
        write_output(args, text);
    } else {
        write_output(args, cma::dump_canonical(j));
    }
    return all_ok ? 0 : 3;
}

int cmd_eu(const CommonArgs& args, const std::string& world, const std::string& utility) {
    cma::Domain d = cma::load_domain(args.domain);
    auto u = d.utilities.find(utility);
    if (u == d.utilities.end()) throw cma::ParseError("unknown utility \"" + utility + "\"");
    const cma::Cma* tree = nullptr;
    cma::Cma loaded;
    auto w = d.worlds.find(world);
    if (w != d.worlds.end()) {
        tree = &w->second;
    } else if (std::filesystem::exists(world)) {
        // a previously exported tree JSON (e.g. cmd_project output)
        std::ifstream in(world);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw cma::ParseError(world + ": " + e.what());
        }
        loaded = cma::tree_from_json(j.contains("tree") ? j["tree"] : j, d.space.size());
        tree = &loaded;
    } else {
        throw cma::ParseError("unknown world \"" + world + "\" (not a name or a file)");
    }
    cma::EuBounds b = cma::eu_interval(*tree, u->second);
    json j{{"schemaVersion", 1},
           {"utility", utility},
           {"euLo", b.lo},
           {"euHi", b.hi}};
    write_output(args, cma::dump_canonical(j));
    return 0;
}

int cmd_export_dot(const CommonArgs& args, const std::string& world) {
    cma::Domain d = cma::load_domain(args.domain);
    write_output(args, cma::to_dot(find_world(d, world), &d.space));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"constraint mass assignment planning toolkit"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string world, plan, hierarchy, node, utility;
    std::int64_t samples = 1000;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* cmd, bool with_format = true) {
        cmd->add_option("--domain", common.domain, "domain JSON file")->required();
        cmd->add_option("--out", common.out, "output file (default: stdout)");
        if (with_format)
            cmd->add_option("--format", common.format, "json | dot | text")
                ->check(CLI::IsMember({"json", "dot", "text"}));
    };

    auto* validate = app.add_subcommand("validate", "validate every entity in a domain file");
    add_common(validate);

    auto* project = app.add_subcommand("project", "project a plan on a world");
    add_common(project);
    project->add_option("--world", world, "world name")->required();
    project->add_option("--plan", plan, "plan name")->required();

    auto* abstract_cmd = app.add_subcommand("abstract", "derive abstract actions");
    add_common(abstract_cmd);
    abstract_cmd->add_option("--hierarchy", hierarchy, "hierarchy name")->required();
    abstract_cmd->add_option("--node", node, "node name (default: all nodes)");

    auto* instantiate = app.add_subcommand("instantiate", "list concrete instantiations");
    add_common(instantiate);
    instantiate->add_option("--hierarchy", hierarchy, "hierarchy name")->required();
    instantiate->add_option("--node", node, "node name (default: root)");

    auto* check = app.add_subcommand("check", "verify soundness by sampled execution");
    add_common(check);
    check->add_option("--plan", plan, "concrete plan name");
    check->add_option("--hierarchy", hierarchy, "hierarchy name");
    check->add_option("--node", node, "hierarchy node (default: root)");
    check->add_option("--world", world, "world name")->required();
    check->add_option("--samples", samples, "samples per instantiation");
    check->add_option("--seed", seed, "master seed (required: no wall-clock seeding)")
        ->required();

    auto* eu = app.add_subcommand("eu", "expected-utility interval of a world");
    add_common(eu);
    eu->add_option("--world", world, "world name or exported tree JSON file")->required();
    eu->add_option("--utility", utility, "utility name")->required();

    auto* export_dot = app.add_subcommand("export-dot", "DOT graph of a world");
    add_common(export_dot, false);
    export_dot->add_option("--world", world, "world name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e); // prints help/usage; 0 for --help
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed()) return cmd_validate(common);
        if (project->parsed()) return cmd_project(common, world, plan);
        if (abstract_cmd->parsed()) return cmd_abstract(common, hierarchy, node);
        if (instantiate->parsed()) return cmd_instantiate(common, hierarchy, node);
        if (check->parsed()) {
            if (plan.empty() == hierarchy.empty()) {
                std::cerr << "check: give exactly one of --plan or --hierarchy\n";
                return 2;
            }
            return cmd_check(common, plan, hierarchy, node, world, samples, seed);
        }
        if (eu->parsed()) return cmd_eu(common, world, utility);
        if (export_dot->parsed()) return cmd_export_dot(common, world);
    } catch (const cma::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
