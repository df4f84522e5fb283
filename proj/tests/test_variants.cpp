#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "kgprobe/errors.hpp"
#include "kgprobe/io.hpp"
#include "kgprobe/rng.hpp"
#include "kgprobe/variants.hpp"

using namespace kgprobe;
using fixtures::graph_of;
using fixtures::triple;

namespace {

const std::string kRoot = problem_node_label("p");

using TripleKey = std::tuple<std::string, std::string, std::string>;

std::set<TripleKey> as_set(const std::vector<Triple>& ts) {
    std::set<TripleKey> out;
    for (const auto& t : ts) out.emplace(t.subject, t.relation, t.object);
    return out;
}

// Sixteen triples with distinct objects and a mix of roles.
LocalGraph sixteen() {
    std::vector<Triple> ts;
    const RelationRole roles[] = {RelationRole::mechanism, RelationRole::failure, RelationRole::property,
                                  RelationRole::outcome};
    for (int i = 0; i < 16; ++i)
        ts.push_back(triple(kRoot, "rel" + std::to_string(i % 5), "entity " + std::to_string(i), roles[i % 4]));
    return graph_of(ts);
}

VariantContext plain_context(std::string statement = "entity words for ranking") {
    VariantContext ctx;
    ctx.problem_statement = std::move(statement);
    return ctx;
}

const Config& cfg() { return fixtures::default_config(); }

}  // namespace

TEST_CASE("condition grammar round trips and rejects junk") {
    for (const auto& tag : cfg().experiment.all_conditions()) CHECK(parse_condition(tag).tag() == tag);
    for (auto bad : {"", "density:thick", "topk:semantic:0", "topk:semantic", "no_kg+density:sparse", "knockout:role.x:1",
                     "holdout:input", "ontology:t2"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_condition(bad), ValidationError);
    }
    CHECK(parse_condition("topk:degree:8+holdout:outcome").steps.size() == 2);
    CHECK(parse_condition_list("no_kg,density:dense").size() == 2);
}

TEST_CASE("density keeps a quarter, a half or everything") {
    auto g = sixteen();
    auto ctx = plain_context();
    CHECK(density_variant(g, DensityLevel::sparse, ctx).triples.size() == 4);
    CHECK(density_variant(g, DensityLevel::medium, ctx).triples.size() == 8);
    auto dense = density_variant(g, DensityLevel::dense, ctx);
    CHECK(dense.triples.size() == 16);
    CHECK(dense.expanded);
    auto g15 = g;
    g15.triples.pop_back();
    CHECK(density_variant(g15, DensityLevel::sparse, ctx).triples.size() == 4);  // ceil(15/4)
}

TEST_CASE("ontology relabel") {
    const auto& labels = cfg().schema.labels;
    const auto& g = fixtures::corpus_graphs().front();
    auto t1 = ontology_variant(g, OntologyTier::t1, labels);
    CHECK(t1.triples.size() == g.triples.size());
    std::set<std::string> coarse;
    for (const auto& e : labels.entries()) coarse.insert(e.t1);
    for (std::size_t i = 0; i < g.triples.size(); ++i) {
        CHECK(coarse.count(t1.triples[i].relation) == 1);
        CHECK(t1.triples[i].role == g.triples[i].role);
    }
    auto twice = ontology_variant(LocalGraph{g.problem_id, t1.triples, OntologyTier::t1}, OntologyTier::t1, labels);
    CHECK(twice.triples == t1.triples);

    auto bad = graph_of({triple(kRoot, "unknown_relation", "x")});
    try {
        ontology_variant(bad, OntologyTier::t1, labels);
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("unknown_relation") != std::string::npos);
    }

    auto t3 = ontology_variant(g, OntologyTier::t3, labels);
    CHECK(fixtures::matches_golden("ontology_t3_" + g.problem_id + ".jsonl", to_jsonl_line(t3.triples) + "\n"));
}

TEST_CASE("topology on a star keeps everything") {
    std::vector<Triple> star;
    for (int i = 0; i < 4; ++i) star.push_back(triple(kRoot, "r", "s" + std::to_string(i)));
    auto g = graph_of(star);
    CHECK(topology_variant(g, TopologyMode::two_hop).triples == star);
    CHECK(topology_variant(g, TopologyMode::full_path).triples == star);
}

TEST_CASE("two_hop drops the third hop of a chain") {
    // Hand BFS from the root: P->a hop 1, a->b hop 2, b->c hop 3, P->d hop 1, d->e hop 2.
    auto g = graph_of({triple(kRoot, "r", "a"), triple("a", "r", "b"), triple("b", "r", "c"), triple(kRoot, "r", "d"),
                       triple("d", "r", "e")});
    auto v = topology_variant(g, TopologyMode::two_hop);
    REQUIRE(v.triples.size() == 4);
    CHECK(std::none_of(v.triples.begin(), v.triples.end(), [](const Triple& t) { return t.object == "c"; }));
    CHECK(v.provenance.steps.front().removed == std::vector<std::size_t>{2});
    CHECK(topology_variant(g, TopologyMode::full_path).triples.size() == 5);

    auto detached = g;
    detached.triples.push_back(triple("x", "r", "y"));
    CHECK(topology_variant(detached, TopologyMode::full_path).triples.size() == 5);
}

TEST_CASE("random control draws a whole donor and is seed deterministic") {
    auto target = graph_of({triple(kRoot, "r", "a"), triple(kRoot, "r", "b"), triple(kRoot, "r", "c")}, "p");
    auto donor = graph_of({triple("q", "r", "x"), triple("q", "r", "y"), triple("q", "r", "z")}, "q");
    std::vector<LocalGraph> corpus{target, donor};
    auto v = random_control(target, corpus, 3, 11);
    CHECK(as_set(v.triples) == as_set(donor.triples));
    CHECK(v.provenance.steps.front().donor_id == "q");
    CHECK(random_control(target, corpus, 3, 11) == v);
    CHECK_THROWS_AS(random_control(target, corpus, 4, 11), ValidationError);
    CHECK_THROWS_AS(random_control(target, {target}, 1, 11), ValidationError);
}

TEST_CASE("random control donors are uniform") {
    std::vector<LocalGraph> corpus;
    for (int i = 0; i < 6; ++i) corpus.push_back(graph_of({triple("s", "r", "o" + std::to_string(i))}, std::to_string(i)));
    std::map<std::string, int> hits;
    const int draws = 10000;
    for (int seed = 0; seed < draws; ++seed) ++hits[*random_control(corpus[0], corpus, 1, seed).provenance.steps[0].donor_id];
    REQUIRE(hits.size() == 5);
    double chi2 = 0;
    for (auto& [id, c] : hits) chi2 += (c - draws / 5.0) * (c - draws / 5.0) / (draws / 5.0);
    CHECK(chi2 < 18.47);  // chi-square 4 df, upper 0.1%
}

TEST_CASE("shuffle swaps two distinct labels and preserves the label multiset") {
    const auto& labels = cfg().schema.labels;
    auto two = graph_of({triple(kRoot, "has_system", "a", RelationRole::system),
                         triple(kRoot, "has_outcome", "b", RelationRole::outcome)});
    auto v = shuffled_control(two, 5, labels);
    CHECK(v.triples[0].relation == "has_outcome");
    CHECK(v.triples[1].relation == "has_system");
    CHECK(v.triples[0].role == RelationRole::outcome);

    const auto& g = fixtures::corpus_graphs()[3];
    auto s = shuffled_control(g, 99, labels);
    std::multiset<std::string> before, after;
    for (std::size_t i = 0; i < g.triples.size(); ++i) {
        before.insert(g.triples[i].relation);
        after.insert(s.triples[i].relation);
        CHECK(s.triples[i].subject == g.triples[i].subject);
        CHECK(s.triples[i].object == g.triples[i].object);
    }
    CHECK(before == after);

    auto same = graph_of({triple(kRoot, "has_system", "a"), triple(kRoot, "has_system", "b")});
    CHECK_THROWS_AS(shuffled_control(same, 1, labels), ValidationError);
}

TEST_CASE("entity-only control lists objects without relations") {
    auto v = entity_only_control(sixteen());
    CHECK(v.entities.size() == 16);
    CHECK(v.relations_removed);
    CHECK(v.triples.empty());
    CHECK(v.objects().size() == 16);
}

TEST_CASE("relation skeleton numbers placeholders per role") {
    auto g = graph_of({triple(kRoot, "via", "volume expansion", RelationRole::mechanism),
                       triple(kRoot, "via", "sei growth", RelationRole::mechanism),
                       triple("sei growth", "leads_to", "fade", RelationRole::failure)});
    auto v = relation_skeleton_control(g);
    CHECK(v.entities_masked);
    CHECK(v.triples[0].object == "<MECHANISM_1>");
    CHECK(v.triples[1].object == "<MECHANISM_2>");
    CHECK(v.triples[2].object == "<FAILURE_1>");
    CHECK(v.triples[2].subject == "<MECHANISM_2>");
    CHECK(v.triples[0].relation == "via");
}

TEST_CASE("rank_triples scores overlap times role boost") {
    TermNormalizer norm;
    auto g = graph_of({triple(kRoot, "r", "lithium plating", RelationRole::mechanism),
                       triple(kRoot, "r", "zinc oxide", RelationRole::mechanism),
                       triple(kRoot, "r", "lithium cobalt", RelationRole::property),
                       triple(kRoot, "r", "the of", RelationRole::failure)});
    auto scores = rank_triples(g, "Lithium plating harms cells.", norm);
    REQUIRE(scores.size() == 4);
    std::map<std::size_t, TripleScore> by;
    for (const auto& s : scores) by[s.triple_index] = s;
    CHECK(by[0].score == doctest::Approx(1.3));
    CHECK(by[1].score == 0.0);
    CHECK(by[2].score == doctest::Approx(0.5));
    CHECK(by[3].overlap == 0.0);
    CHECK(scores.front().triple_index == 0);
    for (const auto& s : scores) {
        CHECK(s.score == doctest::Approx(s.overlap * s.boost));
        CHECK((s.boost == 1.0 || s.boost == kCentralRoleBoost));
    }
    for (std::size_t i = 1; i < scores.size(); ++i) CHECK(scores[i - 1].score >= scores[i].score);
}

TEST_CASE("top-k with k equal to the graph size returns the whole graph") {
    const auto& problem = fixtures::corpus_problems()[7];
    const auto& g = fixtures::corpus_graphs()[7];
    auto ctx = fixtures::context_for(problem);
    for (auto sel : kAllSelectors) {
        auto v = top_k_variant(g, g.triples.size(), sel, 3, ctx);
        CHECK(as_set(v.triples) == as_set(g.triples));
        auto over = top_k_variant(g, g.triples.size() + 5, sel, 3, ctx);
        CHECK(over.triples == g.triples);
        CHECK_FALSE(over.provenance.steps.front().notes.empty());
    }
    auto top1 = top_k_variant(g, 1, Selector::semantic, 0, ctx);
    auto ranked = rank_triples(g, problem.problem_statement, ctx.normalizer);
    CHECK(top1.triples.front() == g.triples[ranked.front().triple_index]);
    CHECK_THROWS_AS(top_k_variant(g, 0, Selector::semantic, 0, ctx), ValidationError);
}

TEST_CASE("degree top-k on a star keeps spokes in source order") {
    std::vector<Triple> star;
    for (int i = 0; i < 6; ++i) star.push_back(triple(kRoot, "r", "s" + std::to_string(i)));
    auto v = top_k_variant(graph_of(star), 3, Selector::degree, 0, plain_context());
    CHECK(v.triples == std::vector<Triple>(star.begin(), star.begin() + 3));
}

TEST_CASE("outcome holdout") {
    auto g = sixteen();
    for (auto& t : g.triples) if (t.role == RelationRole::outcome) t.role = RelationRole::property;
    g.triples[2].role = RelationRole::outcome;
    g.triples[9].role = RelationRole::outcome;
    auto v = outcome_holdout(g);
    CHECK(v.triples.size() == 14);

    auto none = g;
    for (auto& t : none.triples) if (t.role == RelationRole::outcome) t.role = RelationRole::property;
    CHECK(outcome_holdout(none).triples == none.triples);

    auto ko = knockout(g, step::Knockout{RemovalKind::role, 0, RelationRole::outcome}, 0, plain_context());
    CHECK(ko.triples == v.triples);
    CHECK_THROWS_AS(knockout(none, step::Knockout{RemovalKind::role, 0, RelationRole::outcome}, 0, plain_context()),
                    ValidationError);

    const auto& problems = fixtures::corpus_problems();
    const auto& graphs = fixtures::corpus_graphs();
    auto composed = parse_condition("topk:semantic:8+holdout:outcome");
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        auto cv = apply_condition(graphs[i], composed, 1, fixtures::context_for(problems[i]));
        CHECK(cv.triples.size() <= 8);
        CHECK(std::none_of(cv.triples.begin(), cv.triples.end(),
                           [](const Triple& t) { return t.role == RelationRole::outcome; }));
    }
}

TEST_CASE("knockout") {
    auto path = graph_of({triple("a", "r", "b"), triple("b", "r", "c"), triple("c", "r", "d")});
    auto bridge = knockout(path, step::Knockout{RemovalKind::bridge, 1}, 0, plain_context());
    CHECK(bridge.provenance.steps.front().removed == std::vector<std::size_t>{1});

    const auto& g = fixtures::corpus_graphs()[11];
    auto ctx = fixtures::context_for(fixtures::corpus_problems()[11]);
    for (auto kind : {RemovalKind::bridge, RemovalKind::peripheral, RemovalKind::random}) {
        for (std::size_t count : {1u, 3u, 6u}) {
            auto v = knockout(g, step::Knockout{kind, count}, 9, ctx);
            CHECK(v.triples.size() == g.triples.size() - count);
        }
    }
    CHECK_THROWS_AS(knockout(g, step::Knockout{RemovalKind::random, g.triples.size()}, 0, ctx), ValidationError);
}

TEST_CASE("top removal is the complement of top keep") {
    const auto& graphs = fixtures::corpus_graphs();
    const auto& problems = fixtures::corpus_problems();
    for (std::size_t i = 0; i < 10; ++i) {
        auto ctx = fixtures::context_for(problems[i], &graphs);
        for (auto sel : kAllSelectors) {
            auto keep = apply_condition(graphs[i], parse_condition("topk:" + std::string(selector_name(sel)) + ":4"), 5, ctx);
            auto drop = apply_condition(graphs[i], parse_condition("knockout:top." + std::string(selector_name(sel)) + ":4"), 5, ctx);
            auto joined = as_set(keep.triples);
            for (const auto& t : drop.triples) CHECK(joined.emplace(t.subject, t.relation, t.object).second);
            CHECK(joined == as_set(graphs[i].triples));
        }
    }
}

TEST_CASE("every configured condition regenerates bit-exactly from provenance") {
    const auto& graphs = fixtures::corpus_graphs();
    const auto& problems = fixtures::corpus_problems();
    for (std::size_t i = 0; i < 5; ++i) {
        auto ctx = fixtures::context_for(problems[i], &graphs);
        for (const auto& tag : cfg().experiment.all_conditions()) {
            CAPTURE(tag);
            auto v = apply_condition(graphs[i], parse_condition(tag), derive_seed(17, problems[i].id), ctx);
            CHECK(v.condition == tag);
            const nlohmann::json encoded = v;
            auto back = encoded.get<KgVariant>();
            CHECK(back == v);
            CHECK(regenerate(graphs[i], back.provenance, ctx) == v);
        }
    }
}

TEST_CASE("no_kg has zero triples") {
    auto v = apply_condition(sixteen(), parse_condition("no_kg"), 0, plain_context());
    CHECK(v.triples.empty());
    CHECK(v.objects().empty());
}
