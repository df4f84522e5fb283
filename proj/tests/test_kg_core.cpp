#include <algorithm>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "kgprobe/errors.hpp"
#include "kgprobe/io.hpp"
#include "kgprobe/kg_core.hpp"

using namespace kgprobe;
using fixtures::default_config;

namespace {

ProblemRecord single_valued_problem() {
    ProblemRecord p;
    p.id = "demo-1";
    p.problem_statement = "Silicon anodes in lithium-ion cells lose capacity quickly.";
    p.material_system = "lithium-ion battery";
    p.component = "silicon anode";
    p.failure_mode = "particle cracking";
    p.intervention = "carbon coating";
    p.mechanism = "volume expansion";
    p.target_property = "cycle life";
    p.claimed_outcome = "higher capacity retention";
    return p;
}

nlohmann::json schema_with_fields(nlohmann::json fields) {
    auto doc = read_file(fixtures::source_path("config/default.json"));
    auto schema = nlohmann::json::parse(doc).at("schema");
    schema["fields"] = std::move(fields);
    return schema;
}

// Two templates per field; the second mechanism and failure templates route
// through an intermediate sub-concept node. Hand count: 7 fields x 2
// templates = 14 edges, plus one extra edge per hub = 16.
GraphSchema hub_schema() {
    auto f = nlohmann::json::parse(R"([
      {"name": "material_system", "templates": [
        {"subject": "@problem", "relation": "problem_system"},
        {"subject": "intervention", "relation": "problem_system"}]},
      {"name": "component", "templates": [
        {"subject": "material_system", "relation": "system_component"},
        {"subject": "@problem", "relation": "problem_component"}]},
      {"name": "failure_mode", "templates": [
        {"subject": "@problem", "relation": "problem_failure"},
        {"subject": "component", "relation": "component_failure",
         "hub": {"node": "failure site", "relation": "component_failure"}}]},
      {"name": "mechanism", "templates": [
        {"subject": "@problem", "relation": "problem_mechanism"},
        {"subject": "failure_mode", "relation": "failure_mechanism",
         "hub": {"node": "degradation pathway", "relation": "failure_mechanism"}}]},
      {"name": "intervention", "templates": [
        {"subject": "@problem", "relation": "problem_intervention"},
        {"subject": "failure_mode", "relation": "intervention_failure"}]},
      {"name": "target_property", "templates": [
        {"subject": "@problem", "relation": "problem_property"},
        {"subject": "intervention", "relation": "intervention_property"}]},
      {"name": "claimed_outcome", "templates": [
        {"subject": "@problem", "relation": "problem_outcome"},
        {"subject": "target_property", "relation": "property_outcome"}]}
    ])");
    return parse_schema(schema_with_fields(f));
}

GraphSchema one_per_field_schema() {
    auto f = nlohmann::json::parse(R"([
      {"name": "material_system", "templates": [{"relation": "problem_system"}]},
      {"name": "component", "templates": [{"relation": "problem_component"}]},
      {"name": "failure_mode", "templates": [{"relation": "problem_failure"}]},
      {"name": "mechanism", "templates": [{"relation": "problem_mechanism"}]},
      {"name": "intervention", "templates": [{"relation": "problem_intervention"}]},
      {"name": "target_property", "templates": [{"relation": "problem_property"}]},
      {"name": "claimed_outcome", "templates": [{"relation": "problem_outcome"}]}
    ])");
    return parse_schema(schema_with_fields(f));
}

}  // namespace

TEST_CASE("hub schema expands seven single-valued fields into 16 triples") {
    const auto schema = hub_schema();
    auto g = build_local_graph(single_valued_problem(), schema);
    CHECK(g.triples.size() == 16);
    int through_hub = 0;
    for (const auto& t : g.triples) through_hub += t.subject == "degradation pathway" || t.subject == "failure site";
    CHECK(through_hub == 2);
    CHECK(validate_graph(g, &schema.labels).valid());
}

TEST_CASE("one triple per field gives seven triples with matching roles") {
    auto g = build_local_graph(single_valued_problem(), one_per_field_schema());
    REQUIRE(g.triples.size() == 7);
    const std::vector<RelationRole> expected{RelationRole::system,       RelationRole::component,
                                             RelationRole::failure,      RelationRole::mechanism,
                                             RelationRole::intervention, RelationRole::property,
                                             RelationRole::outcome};
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(g.triples[i].role == expected[i]);
        CHECK(g.triples[i].subject == problem_node_label("demo-1"));
    }
}

TEST_CASE("chain expansion hangs later values off their predecessor") {
    auto f = nlohmann::json::parse(R"([
      {"name": "mechanism", "expand": "chain", "chain_relation": "failure_mechanism",
       "templates": [{"relation": "problem_mechanism"}]}
    ])");
    auto schema = parse_schema(schema_with_fields(f));
    auto p = single_valued_problem();
    p.mechanism = "volume expansion; sei growth; lithium loss";
    auto g = build_local_graph(p, schema);
    REQUIRE(g.triples.size() == 3);
    CHECK(g.triples[1].subject == "volume expansion");
    CHECK(g.triples[1].object == "sei growth");
    CHECK(g.triples[2].subject == "sei growth");
}

TEST_CASE("multi-valued fields split on the delimiter") {
    CHECK(split_values(" a ; b;;c ", ";") == std::vector<std::string>{"a", "b", "c"});
    auto p = single_valued_problem();
    p.target_property = "cycle life; rate capability";
    auto g = build_local_graph(p, default_config().schema);
    CHECK(g.triples.size() == 17);
}

TEST_CASE("construction is deterministic to the byte") {
    const auto& schema = default_config().schema;
    auto a = nlohmann::json(build_local_graph(single_valued_problem(), schema)).dump();
    auto b = nlohmann::json(build_local_graph(single_valued_problem(), schema)).dump();
    CHECK(a == b);
}

TEST_CASE("empty expansion and missing fields are errors") {
    ProblemRecord empty;
    empty.id = "x";
    empty.problem_statement = "Something.";
    CHECK_THROWS_AS(build_local_graph(empty, default_config().schema), ValidationError);

    const std::string line =
        R"({"id":"a","problem_statement":"s","material_system":"m","component":"c","failure_mode":"f",)"
        R"("intervention":"i","target_property":"t","claimed_outcome":"o"})";
    try {
        parse_problems_jsonl(line);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "mechanism");
    }
}

TEST_CASE("validation report") {
    const auto& cfg = default_config();
    auto g = build_local_graph(single_valued_problem(), cfg.schema);
    REQUIRE(g.triples.size() == 15);
    CHECK(validate_graph(g, &cfg.schema.labels).valid());

    auto hub = build_local_graph(single_valued_problem(), hub_schema());
    CHECK(validate_graph(hub).valid());

    auto dup = hub;
    dup.triples.push_back(dup.triples[3]);
    auto report = validate_graph(dup);
    REQUIRE(report.has_errors());
    bool named = false;
    for (const auto& i : report.issues)
        named = named || (i.code == "duplicate" && i.message.find(dup.triples[3].object) != std::string::npos);
    CHECK(named);

    auto small = hub;
    small.triples.resize(3);
    auto warn = validate_graph(small);
    bool below = false;
    for (const auto& i : warn.issues)
        below = below || (i.code == "size" && i.severity == ValidationIssue::Severity::warning &&
                          i.message.find("below 15") != std::string::npos);
    CHECK(below);
}

TEST_CASE("relation labels map between tiers") {
    const auto& labels = default_config().schema.labels;
    CHECK(labels.relabel("studied_in_material_system", OntologyTier::t1) == "has_system");
    CHECK(labels.relabel("has_system", OntologyTier::t1) == "has_system");
    CHECK_THROWS_AS(labels.relabel("no_such_relation", OntologyTier::t1), ValidationError);
    CHECK_THROWS_AS(RelationLabelMap({{"a", RelationRole::failure, "x", "y"}, {"b", RelationRole::outcome, "x", "z"}}),
                    ConfigError);
}

TEST_CASE("corpus statistics") {
    std::vector<LocalGraph> sixteen(5);
    for (auto& g : sixteen) g.triples.resize(16, fixtures::triple("a", "r", "b"));
    auto s = corpus_stats(sixteen, {8});
    CHECK(s.topk_fraction.at(8) == 0.5);

    std::vector<LocalGraph> one(1);
    one[0].triples.resize(15, fixtures::triple("a", "r", "b"));
    CHECK(corpus_stats(one, {4}).topk_fraction.at(4) == doctest::Approx(4.0 / 15.0));

    CHECK_THROWS_AS(corpus_stats({}, {8}), ValidationError);

    auto shipped = corpus_stats(fixtures::corpus_graphs(), {4, 8});
    CHECK(shipped.n_problems == 100);
    CHECK(shipped.mean_triples == doctest::Approx(16.1).epsilon(0.01));
    CHECK(shipped.min_triples >= 15);
    CHECK(shipped.max_triples <= 18);
    CHECK(shipped.topk_fraction.at(8) == doctest::Approx(0.497).epsilon(0.01));
}

TEST_CASE("quantile interpolates linearly") {
    CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(quantile({4, 1, 3, 2}, 0.0) == 1);
    CHECK(quantile({4, 1, 3, 2}, 1.0) == 4);
    CHECK(quantile({1, 2, 3, 4, 5}, 0.25) == 2);
}

TEST_CASE("every shipped graph validates") {
    const auto& cfg = default_config();
    for (const auto& g : fixtures::corpus_graphs()) {
        auto report = validate_graph(g, &cfg.schema.labels);
        CHECK_MESSAGE(report.valid(), g.problem_id);
    }
}

TEST_CASE("graph json round trip") {
    const auto& g = fixtures::corpus_graphs().front();
    auto back = nlohmann::json(g).get<LocalGraph>();
    CHECK(back == g);
}
