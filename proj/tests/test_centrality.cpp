#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "kgprobe/centrality.hpp"
#include "kgprobe/errors.hpp"
#include "kgprobe/rng.hpp"
#include "oracles.hpp"

using namespace kgprobe;
using fixtures::triple;

namespace {

std::vector<Triple> random_graph(std::uint64_t seed, std::size_t max_nodes) {
    SplitMixEngine eng(seed);
    const std::size_t n = 2 + uniform_index(eng, max_nodes - 1);
    const std::size_t m = 1 + uniform_index(eng, 2 * n);
    std::vector<Triple> out;
    for (std::size_t i = 0; i < m; ++i) {
        auto s = uniform_index(eng, n);
        auto o = uniform_index(eng, n);
        out.push_back(triple("n" + std::to_string(s), "r" + std::to_string(i % 3), "n" + std::to_string(o)));
    }
    return out;
}

void check_against_oracles(const std::vector<Triple>& t) {
    auto deg = degree_centrality(t);
    for (const auto& [node, v] : oracle::degree(t)) CHECK(deg.at(node) == v);
    auto bet = betweenness_centrality(t);
    for (const auto& [node, v] : oracle::betweenness(t)) CHECK(bet.at(node) == doctest::Approx(v).epsilon(1e-12));
    auto pr = pagerank(t);
    for (const auto& [node, v] : oracle::pagerank(t)) CHECK(pr.at(node) == doctest::Approx(v).epsilon(1e-8));
    CHECK(std::abs(pr.scores.sum() - 1.0) <= 1e-9);
}

}  // namespace

TEST_CASE("star: center degree equals spoke count") {
    std::vector<Triple> star;
    for (int i = 0; i < 5; ++i) star.push_back(triple("hub", "r", "s" + std::to_string(i)));
    auto d = degree_centrality(star);
    CHECK(d.at("hub") == 5);
    for (int i = 0; i < 5; ++i) CHECK(d.at("s" + std::to_string(i)) == 1);
}

TEST_CASE("betweenness on tiny graphs") {
    auto path = betweenness_centrality({triple("a", "r", "b"), triple("b", "r", "c")});
    CHECK(path.at("a") == 0);
    CHECK(path.at("b") == 1);
    CHECK(path.at("c") == 0);
    auto pair = betweenness_centrality({triple("a", "r", "b"), triple("b", "r", "a")});
    CHECK(pair.scores.isZero());
}

TEST_CASE("pagerank on a two-node cycle is exactly uniform") {
    auto pr = pagerank({triple("a", "r", "b"), triple("b", "r", "a")});
    CHECK(pr.at("a") == 0.5);
    CHECK(pr.at("b") == 0.5);
}

TEST_CASE("pagerank reports non-convergence with the last delta") {
    std::vector<Triple> t{triple("a", "r", "b"), triple("b", "r", "c"), triple("c", "r", "a"), triple("a", "r", "c")};
    PageRankOptions opts;
    opts.max_iter = 1;
    opts.tol = 1e-15;
    try {
        pagerank(t, opts);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.last_delta() > 0);
    }
}

TEST_CASE("edge betweenness peaks on the middle edge of a path") {
    auto eb = edge_betweenness({triple("a", "r", "b"), triple("b", "r", "c"), triple("c", "r", "d")});
    REQUIRE(eb.size() == 3);
    CHECK(eb[1] > eb[0]);
    CHECK(eb[1] > eb[2]);
    CHECK(eb[1] == 4);  // a->c, a->d, b->c, b->d
}

TEST_CASE("self loops and parallel triples") {
    std::vector<Triple> t{triple("a", "r", "a"), triple("a", "r", "b"), triple("a", "s", "b")};
    auto d = degree_centrality(t);
    CHECK(d.at("a") == 4);
    CHECK(d.at("b") == 2);
    check_against_oracles(t);
}

TEST_CASE("randomized small graphs match brute-force oracles") {
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        CAPTURE(seed);
        check_against_oracles(random_graph(seed, 8));
    }
}

TEST_CASE("node index keeps first-appearance order") {
    NodeIndex idx({triple("x", "r", "y"), triple("z", "r", "x"), triple("y", "r", "y")});
    CHECK(idx.labels() == std::vector<std::string>{"x", "y", "z"});
    CHECK(idx.edges().size() == 2);
}
