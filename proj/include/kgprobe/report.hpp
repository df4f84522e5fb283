#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kgprobe/config.hpp"
#include "kgprobe/metrics.hpp"
#include "kgprobe/stats.hpp"

namespace kgprobe {

// A rectangular table of preformatted cells with a fixed column order.
struct Table {
    std::string title;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    bool operator==(const Table&) const = default;
};

enum class EmitFormat { markdown, csv };

std::optional<EmitFormat> parse_format(std::string_view name) noexcept;

std::string to_markdown(const Table& table);
// RFC 4180 quoting; the first row is the header.
std::string to_csv(const Table& table);
Table parse_csv(std::string_view text);

// Writes the table; returns the path written.
std::string emit(const Table& table, EmitFormat format, const std::string& path);

// Fixed four-decimal rendering; negative zero prints as 0.0000.
std::string format_number(double value);

// Value of a named score column: trr, rfs, ktc, trr_ref, rfs_ref, ktc_ref,
// mech_int_coverage or d_sem_to_full. nullopt when the record has no value.
std::optional<double> score_column(const ScoreRecord& record, std::string_view column);

// problem_id -> mean over samples of `column` for one (model, condition).
std::map<std::string, double> problem_means(const std::vector<ScoreRecord>& scores, std::string_view model,
                                            std::string_view condition, std::string_view column);

// Sorted distinct model names.
std::vector<std::string> models_in(const std::vector<ScoreRecord>& scores);

struct BestPick {
    std::string group;
    std::string condition;
    double value = 0.0;
    bool tie = false;  // another condition had the same mean; the lexicographically first was taken
};

struct SummaryRow {
    std::string model;
    std::vector<double> deltas;  // one per configured contrast
    std::optional<double> variance_ratio;
    std::vector<BestPick> best;  // one per configured best group
};

struct SummaryTable {
    std::vector<std::string> contrast_names;
    std::vector<std::string> group_names;
    std::vector<SummaryRow> rows;

    Table to_table() const;
};

// Contrast deltas are means over paired problems of (a - b) on the
// provided-graph metric. Throws ValidationError naming any configured
// condition with no scores for a model.
SummaryTable aggregate_summary(const std::vector<ScoreRecord>& scores, const ExperimentConfig& config,
                               const std::map<std::string, double>& variance_ratios = {});

struct CurveSeries {
    std::string model;
    std::string selector;
    std::string series;  // "keep" or "remove"
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> stderr_;
    std::vector<std::size_t> n;
    std::vector<std::size_t> gaps;  // requested k with no scores
};

// Mean over problems of d_sem_to_full for the top-k keep and knockout remove
// conditions of every (model, selector).
std::vector<CurveSeries> sufficiency_curves(const std::vector<ScoreRecord>& scores, const SufficiencySpec& spec);

Table curves_table(const std::vector<CurveSeries>& curves);

// Contrast rows from analysis lines.
Table contrasts_table(const std::vector<AnalysisResult>& results);

// Appends "reference: <model>" rows from a user-supplied constants document.
void add_reference_rows(Table& summary, const SummaryTable& layout, const nlohmann::json& constants);
Table reference_curves_table(const nlohmann::json& constants);

}  // namespace kgprobe
