#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kgprobe/config.hpp"
#include "kgprobe/kg_core.hpp"
#include "kgprobe/rng.hpp"
#include "kgprobe/variants.hpp"

namespace fixtures {

inline std::string source_path(const std::string& rel) { return std::string(KGPROBE_SOURCE_DIR) + "/" + rel; }

inline const kgprobe::Config& default_config() {
    static const kgprobe::Config cfg = kgprobe::load_config(source_path("config/default.json"));
    return cfg;
}

inline const std::vector<kgprobe::ProblemRecord>& corpus_problems() {
    static const auto problems = kgprobe::read_problems_jsonl(source_path("data/problems.jsonl"));
    return problems;
}

inline const std::vector<kgprobe::LocalGraph>& corpus_graphs() {
    static const auto graphs = [] {
        std::vector<kgprobe::LocalGraph> out;
        for (const auto& p : corpus_problems()) out.push_back(kgprobe::build_local_graph(p, default_config().schema));
        return out;
    }();
    return graphs;
}

// Indices of the first n corpus problems whose graph has exactly 16 triples.
// Any such subset has a donor for every random control.
inline std::vector<std::size_t> uniform_subset(std::size_t n) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < corpus_graphs().size() && out.size() < n; ++i)
        if (corpus_graphs()[i].triples.size() == 16) out.push_back(i);
    return out;
}

inline kgprobe::Triple triple(std::string s, std::string r, std::string o,
                              kgprobe::RelationRole role = kgprobe::RelationRole::component) {
    return kgprobe::Triple{std::move(s), std::move(r), role, std::move(o)};
}

inline kgprobe::LocalGraph graph_of(std::vector<kgprobe::Triple> triples, std::string id = "p") {
    kgprobe::LocalGraph g;
    g.problem_id = std::move(id);
    g.triples = std::move(triples);
    return g;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("kgprobe_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace fixtures

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fixtures {

// Compares `content` with tests/golden/<name>. With KGPROBE_UPDATE_GOLDEN=1
// the file is rewritten instead.
inline bool matches_golden(const std::string& name, const std::string& content) {
    const auto path = source_path("tests/golden/" + name);
    if (const char* up = std::getenv("KGPROBE_UPDATE_GOLDEN"); up && std::string(up) == "1") {
        std::ofstream(path, std::ios::binary) << content;
        return true;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str() == content;
}

inline kgprobe::VariantContext context_for(const kgprobe::ProblemRecord& problem,
                                           const std::vector<kgprobe::LocalGraph>* corpus = nullptr) {
    kgprobe::VariantContext ctx;
    ctx.labels = &default_config().schema.labels;
    ctx.corpus = corpus;
    ctx.problem_statement = problem.problem_statement;
    ctx.normalizer = default_config().normalizer;
    ctx.density = default_config().experiment.density;
    return ctx;
}

}  // namespace fixtures
