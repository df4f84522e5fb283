#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "kgprobe/embedding.hpp"

namespace kgprobe {

// Per-problem values under two conditions, aligned by problem id.
struct PairedSample {
    std::vector<std::string> problem_ids;
    std::vector<double> a;
    std::vector<double> b;
    std::size_t dropped = 0;  // problems present on only one side

    std::size_t size() const noexcept { return a.size(); }
    std::vector<double> differences() const;  // a - b
};

// Inner join on problem id; ids are emitted in sorted order.
PairedSample pair_by_problem(const std::map<std::string, double>& a, const std::map<std::string, double>& b);

enum class PermutationMethod { automatic, exact, monte_carlo };

std::string_view permutation_method_name(PermutationMethod m) noexcept;

struct PermutationResult {
    double delta = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    PermutationMethod method = PermutationMethod::exact;  // the method actually used
    std::size_t resamples = 0;                            // 2^n for exact
};

// Two-sided sign-flip test on the mean paired difference. Exact enumeration
// gives count / 2^n; Monte Carlo gives (1 + count) / (1 + resamples) with
// resample r drawn from derive_seed(seed, r). `automatic` enumerates when
// 2^n <= resamples.
PermutationResult paired_permutation(const std::vector<double>& differences, std::size_t resamples = 10000,
                                     std::uint64_t seed = 0, PermutationMethod method = PermutationMethod::automatic);

PermutationResult paired_permutation(const PairedSample& pairs, std::size_t resamples = 10000, std::uint64_t seed = 0,
                                     PermutationMethod method = PermutationMethod::automatic);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Percentile bootstrap of the mean, resampling problems with replacement.
Interval bootstrap_ci(const std::vector<double>& values, std::size_t resamples = 10000, double level = 0.95,
                      std::uint64_t seed = 0);

enum class Correction { none, holm, bh };

std::string_view correction_name(Correction c) noexcept;
std::optional<Correction> parse_correction(std::string_view name) noexcept;

// Holm step-down or Benjamini-Hochberg step-up adjusted p-values in input order.
std::vector<double> correct_pvalues(const std::vector<double>& pvalues, Correction method);

// Mean within-problem distance across condition pairs divided by the mean
// distance over every pair of outputs from different problems. Outer index is
// the problem, inner index the condition.
double variance_ratio(const std::vector<std::vector<Eigen::VectorXd>>& embeddings);
double variance_ratio(const std::vector<std::vector<EmbeddingVector>>& embeddings);
double variance_ratio(const std::vector<std::vector<std::string>>& texts, const EmbeddingProvider& provider);

struct SampleScore {
    std::string problem_id;
    std::string condition;
    std::size_t sample_index = 0;
    double value = 0.0;
};

struct SnrResult {
    double between_range = 0.0;
    double within_std = 0.0;
    std::optional<double> snr;  // nullopt is the infinite marker (within == 0)
    std::size_t conditions = 0;
};

// between: range of per-condition means. within: per condition, the mean over
// problems of the sample standard deviation across samples; then averaged
// over conditions.
SnrResult sampling_snr(const std::vector<SampleScore>& scores);

struct FactorScore {
    std::string problem_id;
    std::string model;
    std::string condition;
    double value = 0.0;
};

struct VarianceComponents {
    double model_share = 0.0;
    double condition_share = 0.0;
    double residual_share = 0.0;
    double ss_total = 0.0;
    bool zero_total = false;
    std::size_t problems_used = 0;
    std::size_t problems_dropped = 0;
};

// Fixed-effect sum-of-squares split over problem-mean scores: repeated
// samples are averaged per (problem, model, condition) cell and problems
// missing any cell are dropped.
VarianceComponents variance_components(const std::vector<FactorScore>& scores);

struct AnalysisResult {
    std::string contrast;
    std::string metric;
    std::string model;
    std::string condition_a;
    std::string condition_b;
    double delta = 0.0;
    double p_value = 1.0;
    std::optional<double> p_adjusted;
    Interval ci;
    std::size_t n = 0;
    std::size_t dropped = 0;
    std::uint64_t seed = 0;
    std::string method;
    std::size_t resamples = 0;
    double ci_level = 0.95;
    std::string correction = "none";

    // Throws Error when the interval does not contain delta.
    void check() const;
};

// Runs the permutation test and bootstrap for one contrast.
AnalysisResult analyze_contrast(const std::string& contrast, const PairedSample& pairs, std::size_t resamples,
                                double ci_level, std::uint64_t seed);

void to_json(nlohmann::json& j, const AnalysisResult& r);
void from_json(const nlohmann::json& j, AnalysisResult& r);
void to_json(nlohmann::json& j, const SnrResult& r);
void to_json(nlohmann::json& j, const VarianceComponents& v);

}  // namespace kgprobe
