#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kgprobe/config.hpp"
#include "kgprobe/embedding.hpp"
#include "kgprobe/llm_bridge.hpp"
#include "kgprobe/metrics.hpp"
#include "kgprobe/report.hpp"
#include "kgprobe/stats.hpp"
#include "kgprobe/variants.hpp"

namespace kgprobe {

// File layout under --out-dir.
struct OutputLayout {
    std::filesystem::path root;

    std::filesystem::path graphs_dir() const { return root / "graphs"; }
    std::filesystem::path variants() const { return root / "variants.jsonl"; }
    std::filesystem::path generations() const { return root / "generations.jsonl"; }
    std::filesystem::path scores() const { return root / "scores.jsonl"; }
    std::filesystem::path analysis() const { return root / "analysis.jsonl"; }
    std::filesystem::path report_dir() const { return root / "report"; }
};

// ---- build-graphs ----
std::vector<LocalGraph> build_graphs(const std::vector<ProblemRecord>& problems, const GraphSchema& schema);
// File name for a problem's graph; characters outside [A-Za-z0-9._-] become '_'.
std::string graph_file_name(std::string_view problem_id);
// One <id>.json per graph plus stats.json. Throws if two ids map to one file.
void write_graphs(const std::vector<LocalGraph>& graphs, const std::filesystem::path& dir);
// Graphs for `problems`, in problem order.
std::vector<LocalGraph> read_graphs(const std::filesystem::path& dir, const std::vector<ProblemRecord>& problems);

// ---- gen-variants ----
// One variant per (problem, condition) in problem-major order. The variant
// seed for a problem is derive_seed(seed, problem_id).
std::vector<KgVariant> generate_variants(const std::vector<ProblemRecord>& problems,
                                         const std::vector<LocalGraph>& graphs, const Config& config,
                                         const std::vector<std::string>& conditions, std::uint64_t seed);
std::vector<KgVariant> read_variants(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& lines);

template <typename T>
void write_records(const std::filesystem::path& path, const std::vector<T>& records) {
    std::vector<nlohmann::json> lines;
    lines.reserve(records.size());
    for (const auto& r : records) lines.emplace_back(r);
    write_jsonl(path, lines);
}

// ---- run ----
Prompt build_prompt(const ProblemRecord& problem, const KgVariant& variant, const Config& config);

// (problem, condition, model, sample) order, conditions as they appear in
// `variants`.
std::vector<PlanEntry> build_plan(const std::vector<ProblemRecord>& problems, const std::vector<KgVariant>& variants,
                                  const Config& config, const std::vector<BackendSpec>& backends);

BackendMap make_backends(const std::vector<BackendSpec>& specs);

// ---- score ----
// d_sem_to_full compares each hypothesis with the reference-condition output
// for the same (problem, model, sample); nullopt when either side has no
// content words or no reference output exists.
std::vector<ScoreRecord> score_generations(const std::vector<LocalGraph>& graphs,
                                           const std::vector<KgVariant>& variants,
                                           const std::vector<GenerationRecord>& generations, const Config& config,
                                           const EmbeddingProvider& provider);
std::vector<ScoreRecord> read_scores(const std::filesystem::path& path);

// ---- analyze ----
struct AnalysisOptions {
    std::size_t resamples = 10000;
    double ci_level = 0.95;
    Correction correction = Correction::holm;
    std::uint64_t seed = 0;
};

// JSON lines tagged by "kind": contrast, variance_ratio, sampling_snr,
// variance_components.
std::vector<nlohmann::json> analyze(const std::vector<ScoreRecord>& scores,
                                    const std::vector<GenerationRecord>& generations, const Config& config,
                                    const AnalysisOptions& options, const EmbeddingProvider& provider);

// ---- report ----
// Writes summary, contrasts and curves tables. Returns the paths written.
std::vector<std::string> write_report(const std::vector<ScoreRecord>& scores,
                                      const std::vector<nlohmann::json>& analysis, const Config& config,
                                      const std::optional<nlohmann::json>& paper_constants,
                                      const std::filesystem::path& dir, const std::vector<EmitFormat>& formats);

}  // namespace kgprobe
