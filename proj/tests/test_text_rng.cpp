#include <map>
#include <set>

#include "doctest.h"
#include "kgprobe/errors.hpp"
#include "kgprobe/http.hpp"
#include "kgprobe/io.hpp"
#include "kgprobe/rng.hpp"
#include "kgprobe/text.hpp"

using namespace kgprobe;

TEST_CASE("tokenize lowercases and splits on punctuation") {
    CHECK(tokenize("The SEI-layer grows.") == std::vector<std::string>{"the", "sei", "layer", "grows"});
    CHECK(tokenize("").empty());
    CHECK(normalize_phrase("  Li-ion,  CELL ") == "li ion cell");
}

TEST_CASE("term normalizer drops stopwords and single bytes") {
    TermNormalizer norm;
    CHECK(norm.terms("The SEI-layer grows.") == std::set<std::string>{"sei", "layer", "grows"});
    CHECK(norm.terms("").empty());
    CHECK(norm.terms("a b c of the").empty());
    CHECK(norm.term_sequence("coating the coating") == std::vector<std::string>{"coating", "coating"});
}

TEST_CASE("whole phrase containment respects token boundaries") {
    CHECK(contains_phrase("lithium metal anode", "metal anode"));
    CHECK_FALSE(contains_phrase("lithium metal anodes", "metal anode"));
    CHECK_FALSE(contains_phrase("lithium", ""));
    CHECK(contains_substring("cells degrade", "cell"));
}

TEST_CASE("utf8 length counts code points") {
    CHECK(utf8_length("abc") == 3);
    CHECK(utf8_length("") == 0);
    CHECK(utf8_length("\xE2\x80\x94") == 1);  // one three-byte dash
}

TEST_CASE("derived seeds are stable and label sensitive") {
    CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
    CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
    CHECK(derive_seed(1, std::uint64_t{0}) != derive_seed(1, std::uint64_t{1}));
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("uniform_index stays in range and covers every value") {
    SplitMixEngine eng(42);
    std::map<std::uint64_t, int> counts;
    for (int i = 0; i < 6000; ++i) {
        auto v = uniform_index(eng, 6);
        REQUIRE(v < 6);
        ++counts[v];
    }
    CHECK(counts.size() == 6);
    for (auto& [v, c] : counts) CHECK(std::abs(c - 1000) < 150);
}

TEST_CASE("sample without replacement yields distinct indices") {
    Rng rng(7);
    auto s = sample_without_replacement(10, 10, rng);
    CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 10);
    auto t = sample_without_replacement(10, 3, rng);
    CHECK(t.size() == 3);
    for (auto i : t) CHECK(i < 10);
}

TEST_CASE("jsonl lines are key sorted and parse back") {
    nlohmann::json j{{"b", 1}, {"a", "x"}};
    CHECK(to_jsonl_line(j) == std::string(R"({"a":"x","b":1})") + "\n");
    auto parsed = parse_jsonl("{\"a\":1}\n\n{\"a\":2}\n");
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[1]["a"] == 2);
    CHECK_THROWS_AS(parse_jsonl("{\"a\":1}\n{oops\n"), ValidationError);
}

TEST_CASE("at_path walks objects and arrays") {
    auto doc = nlohmann::json::parse(R"({"choices":[{"text":"hi"}]})");
    CHECK(at_path(doc, "choices/0/text") == "hi");
    CHECK(at_path(doc, "/choices/0/text") == "hi");
}

TEST_CASE("with_retries retries only transport errors with doubling backoff") {
    std::vector<long> waits;
    int calls = 0;
    auto sleeper = [&](std::chrono::milliseconds d) { waits.push_back(static_cast<long>(d.count())); };
    RetryPolicy policy{3, std::chrono::milliseconds(10)};
    try {
        with_retries(policy, [&]() -> int {
            ++calls;
            throw TransportError("down", 1);
        }, sleeper);
        FAIL("expected throw");
    } catch (const TransportError& e) {
        CHECK(e.attempts() == 3);
    }
    CHECK(calls == 3);
    CHECK(waits == std::vector<long>{10, 20});

    calls = 0;
    CHECK_THROWS_AS(with_retries(policy, [&]() -> int {
        ++calls;
        throw ParseError("bad", "{");
    }, sleeper), ParseError);
    CHECK(calls == 1);

    calls = 0;
    int v = with_retries(policy, [&]() -> int {
        if (++calls < 2) throw TransportError("flaky", 1);
        return 5;
    }, sleeper);
    CHECK(v == 5);
}
