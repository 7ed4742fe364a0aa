#include "cma/domain_io.hpp"

#include <doctest.h>

using namespace cma;

namespace {

const char* kDeliveryDomain = R"JSON({
  "schemaVersion": 1,
  "space": {"attributes": [
    {"name": "fuel", "min": 0, "max": 8},
    {"name": "ton", "min": 0, "max": 10}
  ]},
  "conditions": {
    "highFuel": {"attr": "fuel", "op": ">", "value": 3},
    "lowFuel": {"attr": "fuel", "op": "<=", "value": 3}
  },
  "effects": {
    "bigHaul": {"rules": [{"attr": "ton", "add": [2, 3]}, {"attr": "fuel", "add": [-3, -2]}]},
    "smallHaul": {"rules": [{"attr": "ton", "add": [1, 1]}, {"attr": "fuel", "add": [-2, -1]}]},
    "trickle": {"rules": [{"attr": "ton", "add": [0, 1]}, {"attr": "fuel", "add": [-1, 0]}]}
  },
  "actions": {
    "deliver": {"kind": "concrete", "branches": [
      {"condition": "highFuel", "interval": [0.6, 0.8], "effect": "bigHaul"},
      {"condition": "highFuel", "interval": ["1/5", "2/5"], "effect": "smallHaul"},
      {"condition": "lowFuel", "interval": [1, 1], "effect": "trickle"}
    ]}
  },
  "worlds": {
    "start": {"children": [
      {"interval": [0.5, 0.7], "node": {"leaf": {"and": [
        {"attr": "fuel", "op": ">=", "value": 4},
        {"attr": "fuel", "op": "<=", "value": 8},
        {"attr": "ton", "op": "=", "value": 0}
      ]}}},
      {"interval": [0.3, 0.5], "node": {"leaf": {"and": [
        {"attr": "fuel", "op": ">=", "value": 2},
        {"attr": "fuel", "op": "<=", "value": 6},
        {"attr": "ton", "op": "=", "value": 0}
      ]}}}
    ]}
  },
  "plans": {"haul1": ["deliver"], "haul2": ["deliver", "deliver"]},
  "utilities": {"profit": {"linear": {"ton": 1.0, "fuel": 0.25}}}
})JSON";

} // namespace

TEST_CASE("parse_number accepts decimals and rationals") {
    CHECK(parse_number(json::parse("0.25")) == doctest::Approx(0.25));
    CHECK(parse_number(json::parse("\"1/4\"")) == doctest::Approx(0.25));
    CHECK(parse_number(json::parse("\"7/8\"")) == doctest::Approx(0.875));
    CHECK_THROWS_AS(parse_number(json::parse("\"x\"")), ParseError);
    CHECK_THROWS_AS(parse_number(json::parse("\"1/0\"")), ParseError);
    CHECK_THROWS_AS(parse_number(json::parse("[1]")), ParseError);
}

TEST_CASE("delivery domain parses, validates, and round-trips") {
    Domain d = parse_domain(json::parse(kDeliveryDomain));
    CHECK(d.space.size() == 99);
    CHECK(d.conditions.at("highFuel").count() == 5 * 11);
    CHECK(d.actions.at("deliver")->branches.size() == 3);
    CHECK(d.actions.at("deliver")->branches[1].interval.lo == doctest::Approx(0.2));
    CHECK(d.plans.at("haul2").actions.size() == 2);
    CHECK(d.utilities.at("profit")[d.space.index_of({4, 2})] == doctest::Approx(3.0));

    CHECK(validate_domain(d).ok());

    // canonical serialization is a fixpoint of parse/serialize
    json s1 = serialize_domain(d);
    Domain d2 = parse_domain(s1);
    json s2 = serialize_domain(d2);
    CHECK(dump_canonical(s1) == dump_canonical(s2));
    CHECK(d2.space == d.space);
    CHECK(d2.conditions.at("highFuel") == d.conditions.at("highFuel"));
    CHECK(d2.actions.at("deliver")->branches[2].effect ==
          d.actions.at("deliver")->branches[2].effect);
}

TEST_CASE("instantiate_ima on the delivery action follows the state's condition") {
    Domain d = parse_domain(json::parse(kDeliveryDomain));
    const Action& deliver = *d.actions.at("deliver");
    std::uint32_t b = d.space.index_of({5, 0}); // fuel=5 > 3
    Ima ima = instantiate_ima(deliver, b);
    REQUIRE(ima.root.children.size() == 2); // the two highFuel branches
    CHECK(ima.root.children[0].interval == ProbInterval(0.6, 0.8));
    CHECK(ima.root.children[1].interval == ProbInterval(0.2, 0.4));
    // bigHaul at fuel=5,ton=0: ton in {2,3}, fuel in {2,3}
    StateSet expect(d.space.size());
    for (int ton : {2, 3})
        for (int fuel : {2, 3}) expect.set(d.space.index_of({fuel, ton}));
    CHECK(*ima.root.children[0].child.states == expect);
    CHECK(validate_cma(ima).ok());

    std::uint32_t low = d.space.index_of({2, 0}); // fuel=2 <= 3
    Ima ima_low = instantiate_ima(deliver, low);
    REQUIRE(ima_low.root.children.size() == 1);
    CHECK(ima_low.root.children[0].interval == ProbInterval(1.0, 1.0));
}

TEST_CASE("single-action plans project identically to project_action") {
    Domain d = parse_domain(json::parse(kDeliveryDomain));
    auto [t1, s1] = project_action(*d.actions.at("deliver"), d.worlds.at("start"));
    auto [t2, s2] = project_plan(d.plans.at("haul1") /* = [deliver] */, d.worlds.at("start"));
    CHECK(dump_canonical(tree_to_json(t1)) == dump_canonical(tree_to_json(t2)));
    CHECK(s1.node_count == s2.node_count);
}

TEST_CASE("constant utilities give degenerate EU intervals") {
    Domain d = parse_domain(json::parse(kDeliveryDomain));
    Eigen::VectorXd u = Eigen::VectorXd::Constant(d.space.size(), 2.5);
    auto b = eu_interval(d.worlds.at("start"), u);
    CHECK(b.lo == doctest::Approx(2.5));
    CHECK(b.hi == doctest::Approx(2.5));
}

TEST_CASE("parse errors carry context") {
    CHECK_THROWS_AS(parse_domain(json::parse("{}")), ParseError);
    // dangling effect reference
    json j = json::parse(kDeliveryDomain);
    j["actions"]["deliver"]["branches"][0]["effect"] = "nope";
    CHECK_THROWS_AS(parse_domain(j), ParseError);
    // dangling condition reference
    j = json::parse(kDeliveryDomain);
    j["actions"]["deliver"]["branches"][0]["condition"] = "nope";
    CHECK_THROWS_AS(parse_domain(j), ParseError);
    // malformed interval
    j = json::parse(kDeliveryDomain);
    j["actions"]["deliver"]["branches"][0]["interval"] = {0.9, 0.1};
    CHECK_THROWS_AS(parse_domain(j), ParseError);
}

TEST_CASE("validation failures surface through validate_domain") {
    json j = json::parse(kDeliveryDomain);
    // overlap the concrete conditions
    j["actions"]["deliver"]["branches"][2]["condition"] = true;
    Domain d = parse_domain(j);
    auto rep = validate_domain(d);
    CHECK_FALSE(rep.ok());
}

TEST_CASE("world trees parse extensional and expression leaves alike") {
    json j = json::parse(kDeliveryDomain);
    j["worlds"]["ext"] = json{{"leaf", {0, 1, 2}}};
    Domain d = parse_domain(j);
    CHECK(d.worlds.at("ext").root.states->count() == 3);
    CHECK(validate_cma(d.worlds.at("ext")).ok());
}

TEST_CASE("tree JSON round-trip") {
    Domain d = parse_domain(json::parse(kDeliveryDomain));
    const Cma& w = d.worlds.at("start");
    json t = tree_to_json(w);
    Cma back = tree_from_json(t, d.space.size());
    CHECK(node_count(back) == node_count(w));
    CHECK(dump_canonical(tree_to_json(back)) == dump_canonical(t));
}

TEST_CASE("hierarchy specs parse, build, and reject cycles") {
    json j = json::parse(kDeliveryDomain);
    j["actions"]["deliver2"] = j["actions"]["deliver"];
    j["hierarchies"]["h"] = json::parse(R"({
      "root": "top",
      "nodes": {
        "d1": {"kind": "concrete", "action": "deliver"},
        "d2": {"kind": "concrete", "action": "deliver2"},
        "both": {"kind": "inter", "children": ["d1", "d2"]},
        "top": {"kind": "seq", "children": ["both", "d1"]}
      }
    })");
    Domain d = parse_domain(j);
    const Hierarchy& h = d.hierarchies.at("h");
    CHECK(h.find("top") == d.hierarchy_roots.at("h"));
    auto insts = instantiations(h, d.hierarchy_roots.at("h"));
    CHECK(insts.size() == 2); // (d1|d2) x d1

    json cyc = j;
    cyc["hierarchies"]["h"]["nodes"]["both"]["children"] = {"d1", "top"};
    CHECK_THROWS_WITH_AS(parse_domain(cyc),
                         doctest::Contains("cycle detected"), ParseError);

    // explicit inter pairing flows through to the operator
    json paired = j;
    paired["hierarchies"]["h"]["nodes"]["both"]["pairing"] = {2, 1, 0};
    Domain dp = parse_domain(paired);
    const Hierarchy& hp = dp.hierarchies.at("h");
    const Action& both = *hp.node(hp.find("both")).derived;
    // branch 0 pairs deliver's branch 0 with deliver2's branch 2
    CHECK(both.branches[0].interval.lo == doctest::Approx(0.6));
    CHECK(both.branches[0].interval.hi == doctest::Approx(1.0));

    json bad_pairing = j;
    bad_pairing["hierarchies"]["h"]["nodes"]["both"]["pairing"] = {0, 0, 1};
    CHECK_THROWS_AS(parse_domain(bad_pairing), ParseError);
}

TEST_CASE("wrong field types surface as parse errors") {
    json j = json::parse(kDeliveryDomain);
    j["actions"]["deliver"]["kind"] = 5;
    CHECK_THROWS_AS(parse_domain(j), ParseError);
    j = json::parse(kDeliveryDomain);
    j["space"]["attributes"][0]["name"] = 1;
    CHECK_THROWS_AS(parse_domain(j), ParseError);
    j = json::parse(kDeliveryDomain);
    j["plans"]["haul2"] = "deliver";
    CHECK_THROWS_AS(parse_domain(j), ParseError);
}

TEST_CASE("canonical dump: sorted keys, stable floats") {
    json j;
    j["b"] = 0.1;
    j["a"] = 1.0;
    j["c"] = json::array({1, 2.5, "x"});
    std::string s = dump_canonical(j);
    CHECK(s.find("\"a\"") < s.find("\"b\""));
    CHECK(s.find("0.10000000000000001") != std::string::npos); // 17 significant digits
    CHECK(s.find("2.5,") != std::string::npos);
    // dump(parse(dump)) is stable
    CHECK(dump_canonical(json::parse(s)) == s);
}
