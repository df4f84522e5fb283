#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kgprobe/kg_core.hpp"
#include "kgprobe/text.hpp"
#include "kgprobe/variants.hpp"

namespace kgprobe {

// Cue words/phrases signalling each relation role in generated text.
struct RoleInventory {
    std::map<RelationRole, std::vector<std::string>> cues;

    static RoleInventory defaults();
};

// Throws ConfigError when any role has no cues.
RoleInventory parse_role_inventory(const nlohmann::json& doc);

inline std::set<std::string> normalize_terms(std::string_view text, const TermNormalizer& normalizer) {
    return normalizer.terms(text);
}

// Fraction of distinct supplied objects whose normalized phrase occurs as a
// whole phrase in the normalized hypothesis. Zero when nothing concrete was
// supplied (no_kg, masked skeleton placeholders).
double trr(std::string_view hypothesis, const KgVariant& variant);

// Fraction of distinct supplied roles with at least one cue present in the
// normalized hypothesis. Zero when relations were removed.
double rfs(std::string_view hypothesis, const KgVariant& variant, const RoleInventory& inventory);

// |terms(objects) & terms(hypothesis)| / |terms(objects)|.
double ktc(std::string_view hypothesis, const KgVariant& variant, const TermNormalizer& normalizer);

enum class MetricKind { trr, rfs, ktc };

std::string_view metric_name(MetricKind m) noexcept;
std::optional<MetricKind> parse_metric(std::string_view name) noexcept;

// The provided-graph metric evaluated against the untouched full graph.
double fixed_reference(std::string_view hypothesis, const LocalGraph& full_graph, MetricKind which,
                       const RoleInventory& inventory, const TermNormalizer& normalizer);

// KTC restricted to object terms of mechanism and intervention triples.
// nullopt when the graph has no such triples.
std::optional<double> mech_int_coverage(std::string_view hypothesis, const LocalGraph& full_graph,
                                        const TermNormalizer& normalizer);

struct ScoreRecord {
    std::string problem_id;
    std::string condition;
    std::string model_name;
    std::size_t sample_index = 0;
    double trr = 0.0;
    double rfs = 0.0;
    double ktc = 0.0;
    double trr_ref = 0.0;
    double rfs_ref = 0.0;
    double ktc_ref = 0.0;
    std::optional<double> mech_int_coverage;
    std::optional<double> d_sem_to_full;

    double metric(MetricKind m) const;
    double metric_ref(MetricKind m) const;
};

void to_json(nlohmann::json& j, const ScoreRecord& s);
void from_json(const nlohmann::json& j, ScoreRecord& s);

}  // namespace kgprobe
