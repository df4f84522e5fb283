#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace kgprobe {

// Scientific function of a triple.
enum class RelationRole { failure, intervention, mechanism, property, component, system, outcome };

inline constexpr std::array<RelationRole, 7> kAllRoles = {
    RelationRole::failure,   RelationRole::intervention, RelationRole::mechanism, RelationRole::property,
    RelationRole::component, RelationRole::system,       RelationRole::outcome,
};

std::string_view role_name(RelationRole role) noexcept;
std::optional<RelationRole> parse_role(std::string_view name) noexcept;

enum class OntologyTier { t1, t3 };

std::string_view tier_name(OntologyTier tier) noexcept;
std::optional<OntologyTier> parse_tier(std::string_view name) noexcept;

struct ProblemRecord {
    std::string id;
    std::string problem_statement;
    std::string material_system;
    std::string component;
    std::string failure_mode;
    std::string intervention;
    std::string mechanism;
    std::string target_property;
    std::string claimed_outcome;

    bool operator==(const ProblemRecord&) const = default;
};

// The seven structured field names in declaration order.
const std::vector<std::string>& structured_field_names();

// Value of a structured field by name; nullopt for unknown names.
std::optional<std::string_view> field_value(const ProblemRecord& problem, std::string_view name);

struct Triple {
    std::string subject;
    std::string relation;
    RelationRole role = RelationRole::component;
    std::string object;

    bool operator==(const Triple&) const = default;
};

struct LocalGraph {
    std::string problem_id;
    std::vector<Triple> triples;
    OntologyTier tier = OntologyTier::t3;

    bool operator==(const LocalGraph&) const = default;
};

// Label of the problem node: "problem:" + normalized id.
std::string problem_node_label(std::string_view problem_id);

// One relation known to the toolkit, with its label in both ontology tiers.
struct RelationEntry {
    std::string id;
    RelationRole role = RelationRole::component;
    std::string t1;
    std::string t3;
};

// Bidirectional map between relation labels, tiers and roles.
class RelationLabelMap {
public:
    RelationLabelMap() = default;
    // Throws ConfigError if a label would map to two different roles or an id repeats.
    explicit RelationLabelMap(std::vector<RelationEntry> entries);

    const std::vector<RelationEntry>& entries() const noexcept { return entries_; }
    const RelationEntry* find_id(std::string_view id) const;

    std::optional<RelationRole> role_of(std::string_view label) const;
    bool knows(std::string_view label) const { return role_of(label).has_value(); }

    // Label of `label` in `tier`. Throws ValidationError naming the label when
    // it is unmapped or when it maps to more than one label in `tier`.
    std::string relabel(std::string_view label, OntologyTier tier) const;

    std::string label_for(const RelationEntry& entry, OntologyTier tier) const {
        return tier == OntologyTier::t1 ? entry.t1 : entry.t3;
    }

private:
    std::vector<RelationEntry> entries_;
    std::map<std::string, RelationRole, std::less<>> roles_;
};

// Optional intermediate node between a template's subject and the field value.
struct HubSpec {
    std::string node;      // node label, shared by every value of the field
    std::string relation;  // relation id for subject -> hub
};

struct EdgeTemplate {
    std::string subject;   // "@problem" or a structured field name (its first value)
    std::string relation;  // relation id for (subject or hub) -> value
    std::optional<HubSpec> hub;
};

enum class Expansion { fan, chain };

struct FieldSpec {
    std::string name;
    std::vector<EdgeTemplate> templates;
    // fan: every value gets every template. chain: only the first value gets
    // the templates; each later value hangs off its predecessor.
    Expansion expand = Expansion::fan;
    std::string chain_relation;
};

struct GraphSchema {
    std::string delimiter = ";";
    OntologyTier tier = OntologyTier::t3;
    std::vector<FieldSpec> fields;
    RelationLabelMap labels;
    std::size_t min_triples = 15;
    std::size_t max_triples = 18;
};

GraphSchema parse_schema(const nlohmann::json& doc);

// Splits a multi-valued field; values are trimmed and empty pieces dropped.
std::vector<std::string> split_values(std::string_view value, std::string_view delimiter);

// Deterministic construction: schema field order, then value order, then
// template order. Duplicate (subject, relation, object) triples are emitted
// once.
LocalGraph build_local_graph(const ProblemRecord& problem, const GraphSchema& schema);

struct ValidationIssue {
    enum class Severity { warning, error };
    Severity severity = Severity::error;
    std::string code;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool valid() const noexcept { return issues.empty(); }
    bool has_errors() const;
};

ValidationReport validate_graph(const LocalGraph& graph, const RelationLabelMap* labels = nullptr,
                                std::size_t min_triples = 15, std::size_t max_triples = 18);

struct KgSizeStats {
    std::size_t n_problems = 0;
    double mean_triples = 0.0;
    double median_triples = 0.0;
    double std_triples = 0.0;  // sample standard deviation
    double p25_triples = 0.0;
    double p75_triples = 0.0;
    std::size_t min_triples = 0;
    std::size_t max_triples = 0;
    std::map<std::size_t, double> topk_fraction;         // mean of min(k, n) / n
    std::map<std::size_t, double> topk_fraction_median;  // median of min(k, n) / n
};

KgSizeStats corpus_stats(const std::vector<LocalGraph>& corpus, const std::vector<std::size_t>& ks);

// Linear-interpolated quantile of unsorted data, q in [0, 1].
double quantile(std::vector<double> values, double q);

void to_json(nlohmann::json& j, const ProblemRecord& p);
void from_json(const nlohmann::json& j, ProblemRecord& p);
void to_json(nlohmann::json& j, const Triple& t);
void from_json(const nlohmann::json& j, Triple& t);
void to_json(nlohmann::json& j, const LocalGraph& g);
void from_json(const nlohmann::json& j, LocalGraph& g);
void to_json(nlohmann::json& j, const KgSizeStats& s);

// Reads JSON-lines problems, rejecting duplicate ids and missing fields.
std::vector<ProblemRecord> parse_problems_jsonl(std::string_view content);
std::vector<ProblemRecord> read_problems_jsonl(const std::string& path);

}  // namespace kgprobe
