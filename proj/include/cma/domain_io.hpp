#pragma once

#include "cma/abstraction.hpp"
#include "cma/action.hpp"
#include "cma/cma_tree.hpp"
#include "cma/oracle.hpp"
#include "cma/projection.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>

namespace cma {

using json = nlohmann::json; // object keys stay sorted

/// A fully resolved domain file: one space plus named conditions, effects,
/// actions, worlds, plans, hierarchies, and utilities.
struct Domain {
    StateSpace space;
    std::map<std::string, ConditionExpr> condition_exprs;
    std::map<std::string, StateSet> conditions;
    std::map<std::string, Effect> effects;
    std::map<std::string, ActionRef> actions;
    std::map<std::string, Cma> worlds;
    std::map<std::string, std::vector<std::string>> plan_actions;
    std::map<std::string, Plan> plans;
    std::map<std::string, Hierarchy> hierarchies;
    std::map<std::string, int> hierarchy_roots; // node id of the root
    std::map<std::string, json> hierarchy_specs; // normalized structural form
    std::map<std::string, Eigen::VectorXd> utilities;
    ValidationReport parse_warnings;
};

/// Accepts JSON numbers or exact rational strings "p/q".
double parse_number(const json& j);

Domain parse_domain(const json& j);
Domain load_domain(const std::string& path);

/// Canonical extensional serialization: conditions and world leaves as state
/// index arrays, effects as tables. serialize(parse(x)) is a fixpoint.
json serialize_domain(const Domain& d);

json tree_to_json(const Cma& M);
Cma tree_from_json(const json& j, std::uint32_t space_size);

json action_to_json(const Action& a);
json stats_to_json(const ProjectionStats& s);
json report_to_json(const SoundnessReport& r);
json validation_to_json(const ValidationReport& r);

/// Aggregated validation of every entity in the domain.
ValidationReport validate_domain(const Domain& d);

/// Deterministic dump: sorted keys are guaranteed by the parser's object
/// representation; doubles print with 17 significant digits so reruns are
/// byte-identical and values round-trip exactly.
std::string dump_canonical(const json& j, int indent = 2);

} // namespace cma
