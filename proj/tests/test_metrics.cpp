#include <cmath>
#include <memory>

#include "doctest.h"
#include "fixtures.hpp"
#include "kgprobe/embedding.hpp"
#include "kgprobe/errors.hpp"
#include "kgprobe/metrics.hpp"
#include "kgprobe/rng.hpp"
#include "oracles.hpp"

using namespace kgprobe;
using fixtures::triple;

namespace {

KgVariant with_roles(std::vector<std::pair<std::string, RelationRole>> objs) {
    KgVariant v;
    for (auto& [o, r] : objs) v.triples.push_back(triple("problem:p", "rel", o, r));
    return v;
}

KgVariant with_objects(std::vector<std::string> objs) {
    std::vector<std::pair<std::string, RelationRole>> pairs;
    for (auto& o : objs) pairs.emplace_back(o, RelationRole::component);
    return with_roles(pairs);
}

const std::vector<std::string> kWords = {"lithium", "anode", "coating", "cathode", "via", "through", "improve",
                                         "the",     "of",    "sei",     "layer",   "cell", "cells", "doping",
                                         "growth",  "a",     "volume",  "battery", "capacity", "fade"};

std::string random_phrase(SplitMixEngine& eng, std::size_t max_words) {
    const auto n = 1 + uniform_index(eng, max_words);
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) s += uniform_index(eng, 4) == 0 ? "-" : " ";
        auto w = kWords[uniform_index(eng, kWords.size())];
        if (uniform_index(eng, 5) == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
        s += w;
    }
    if (uniform_index(eng, 3) == 0) s += ".";
    return s;
}

}  // namespace

TEST_CASE("normalize_terms") {
    TermNormalizer norm;
    CHECK(normalize_terms("The SEI-layer grows.", norm) == std::set<std::string>{"sei", "layer", "grows"});
    CHECK(normalize_terms("", norm).empty());
}

TEST_CASE("trr examples") {
    CHECK(trr("We use a and b here", with_objects({"a", "b"})) == 1.0);
    CHECK(trr("x plus y only", with_objects({"x", "y", "z"})) == doctest::Approx(0.6667).epsilon(1e-4));
    KgVariant none;
    CHECK(trr("anything", none) == 0.0);
    CHECK(trr("metal anodes", with_objects({"metal anode"})) == 0.0);
    CHECK(trr("Metal-Anode!", with_objects({"metal anode"})) == 1.0);
    auto masked = with_objects({"<MECHANISM_1>"});
    masked.entities_masked = true;
    CHECK(trr("mechanism 1", masked) == 0.0);
}

TEST_CASE("rfs examples") {
    auto inv = RoleInventory::defaults();
    CHECK(rfs("works via diffusion", with_roles({{"x", RelationRole::mechanism}}), inv) == 1.0);
    KgVariant ent;
    ent.relations_removed = true;
    ent.entities = {"x"};
    CHECK(rfs("via improve coating", ent, inv) == 0.0);
    auto two = with_roles({{"x", RelationRole::mechanism}, {"y", RelationRole::outcome}});
    CHECK(rfs("this will improve things", two, inv) == 0.5);
}

TEST_CASE("ktc examples") {
    TermNormalizer norm;
    auto v = with_objects({"lithium anode", "coating"});
    CHECK(ktc("lithium anode coating", v, norm) == 1.0);
    CHECK(ktc("a coating", v, norm) == doctest::Approx(0.3333).epsilon(1e-4));
    CHECK(ktc("", v, norm) == 0.0);
}

TEST_CASE("role inventory config rejects empty roles") {
    nlohmann::json doc = nlohmann::json::object();
    for (auto r : kAllRoles) doc[std::string(role_name(r))] = {"cue"};
    CHECK_NOTHROW(parse_role_inventory(doc));
    doc["outcome"] = nlohmann::json::array();
    CHECK_THROWS_AS(parse_role_inventory(doc), ConfigError);
}

TEST_CASE("fixed reference and mechanism coverage") {
    const auto& cfg = fixtures::default_config();
    const auto& g = fixtures::corpus_graphs().front();
    auto full = full_variant(g);
    std::string echo = "The hypothesis draws on " + join(full.objects(), "; ") + ".";
    CHECK(fixed_reference(echo, g, MetricKind::trr, cfg.inventory, cfg.normalizer) == trr(echo, full));
    CHECK(fixed_reference(echo, g, MetricKind::trr, cfg.inventory, cfg.normalizer) == 1.0);

    // Mention exactly four of the distinct objects.
    auto objs = full.objects();
    REQUIRE(objs.size() > 7);
    std::string four = objs[0] + ". " + objs[2] + ". " + objs[5] + ". " + objs[7] + ".";
    // Objects can nest inside each other, so count with the oracle too.
    CHECK(fixed_reference(four, g, MetricKind::trr, cfg.inventory, cfg.normalizer) ==
          oracle::trr(four, objs, false));

    LocalGraph mg = fixtures::graph_of({triple("problem:p", "r", "volume expansion", RelationRole::mechanism),
                                        triple("problem:p", "r", "carbon coating", RelationRole::intervention),
                                        triple("problem:p", "r", "cycle life", RelationRole::property)});
    CHECK(*mech_int_coverage("volume expansion carbon coating", mg, cfg.normalizer) == 1.0);
    CHECK(*mech_int_coverage("cycle life", mg, cfg.normalizer) == 0.0);
    CHECK(*mech_int_coverage("volume and carbon", mg, cfg.normalizer) == 0.5);
    LocalGraph no_mi = fixtures::graph_of({triple("problem:p", "r", "cycle life", RelationRole::property)});
    CHECK_FALSE(mech_int_coverage("anything", no_mi, cfg.normalizer).has_value());
}

TEST_CASE("trr_ref of four named objects out of sixteen") {
    const auto& cfg = fixtures::default_config();
    std::vector<Triple> ts;
    for (int i = 0; i < 16; ++i) ts.push_back(triple("problem:p", "r", "object" + std::string(1, char('a' + i))));
    auto g = fixtures::graph_of(ts);
    CHECK(fixed_reference("objecta objectb objectc objectd", g, MetricKind::trr, cfg.inventory, cfg.normalizer) == 0.25);
}

TEST_CASE("metrics match the brute-force oracle on random fixtures") {
    const auto inv = RoleInventory::defaults();
    TermNormalizer norm;
    SplitMixEngine eng(2024);
    for (int trial = 0; trial < 500; ++trial) {
        KgVariant v;
        const auto n = 1 + uniform_index(eng, 6);
        for (std::size_t i = 0; i < n; ++i)
            v.triples.push_back(triple("s", "r", random_phrase(eng, 3), kAllRoles[uniform_index(eng, kAllRoles.size())]));
        if (uniform_index(eng, 5) == 0) {
            v.relations_removed = true;
            v.entities = v.objects();
            v.triples.clear();
        }
        const auto hyp = random_phrase(eng, 30);
        std::set<RelationRole> roles;
        for (const auto& t : v.triples) roles.insert(t.role);
        CAPTURE(hyp);
        CHECK(trr(hyp, v) == oracle::trr(hyp, v.objects(), v.entities_masked));
        CHECK(rfs(hyp, v, inv) == oracle::rfs(hyp, roles, inv.cues, v.relations_removed));
        CHECK(ktc(hyp, v, norm) == oracle::ktc(hyp, v.objects(), v.entities_masked));
    }
}

TEST_CASE("metrics are monotone in added mentions") {
    TermNormalizer norm;
    auto v = with_objects({"sei layer", "carbon coating", "volume expansion"});
    std::string hyp = "start";
    double last_trr = 0, last_ktc = 0;
    for (const auto& o : v.objects()) {
        hyp += " " + o;
        auto t = trr(hyp, v);
        auto k = ktc(hyp, v, norm);
        CHECK(t >= last_trr);
        CHECK(k >= last_ktc);
        last_trr = t;
        last_ktc = k;
    }
    CHECK(last_trr == 1.0);
}

TEST_CASE("hashing embedder properties") {
    HashingEmbedder emb;
    CHECK(emb.id() == "hashing-4096");
    auto a = emb.embed("Carbon coating suppresses volume expansion.");
    auto b = emb.embed("Carbon coating suppresses volume expansion.");
    CHECK(a.values == b.values);
    CHECK(a.values.norm() == doctest::Approx(1.0));
    auto twice = emb.embed("Carbon coating suppresses volume expansion. Carbon coating suppresses volume expansion.");
    CHECK(cosine_distance(a, twice) == 0.0);
    CHECK_THROWS_AS(emb.embed("the of and"), UnembeddableError);
    CHECK_THROWS_AS(emb.embed(""), UnembeddableError);
    CHECK(emb.bucket("coating") < 4096);
    CHECK(std::abs(emb.sign("coating")) == 1.0);
}

TEST_CASE("disjoint term sets are nearly orthogonal") {
    HashingEmbedder emb;
    const auto& graphs = fixtures::corpus_graphs();
    TermNormalizer norm;
    int pairs = 0;
    for (std::size_t i = 0; i + 1 < graphs.size(); i += 2) {
        const auto& x = graphs[i].triples.front().object;
        for (const auto& t : graphs[i + 1].triples) {
            auto tx = norm.terms(x);
            auto ty = norm.terms(t.object);
            bool disjoint = !tx.empty() && !ty.empty();
            for (const auto& w : tx) disjoint = disjoint && !ty.count(w);
            if (!disjoint) continue;
            const double cos = 1.0 - cosine_distance(emb.embed(x), emb.embed(t.object));
            CHECK(std::abs(cos) < 0.05);
            CHECK(semantic_distance(x, t.object, emb) == doctest::Approx(1.0).epsilon(0.05));
            ++pairs;
        }
    }
    CHECK(pairs > 50);
}

TEST_CASE("semantic distance") {
    HashingEmbedder emb;
    CHECK(semantic_distance("carbon coating", "carbon coating", emb) == 0.0);
    CHECK_THROWS_AS(semantic_distance("of the", "of the", emb), UnembeddableError);
    auto inner = std::make_shared<HashingEmbedder>();
    CachedEmbedder cached(inner);
    CHECK(semantic_distance("alpha beta", "beta gamma", cached) == semantic_distance("alpha beta", "beta gamma", emb));
    cached.embed("alpha beta");
    CHECK(cached.size() == 2);
}

TEST_CASE("score record json round trip keeps optionals") {
    ScoreRecord s;
    s.problem_id = "p";
    s.condition = "no_kg";
    s.model_name = "m";
    s.trr = 0.5;
    s.d_sem_to_full = 0.25;
    auto back = nlohmann::json(s).get<ScoreRecord>();
    CHECK(back.trr == 0.5);
    CHECK(back.d_sem_to_full == 0.25);
    CHECK_FALSE(back.mech_int_coverage.has_value());
}
