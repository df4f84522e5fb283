#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kgprobe/condition.hpp"
#include "kgprobe/kg_core.hpp"
#include "kgprobe/text.hpp"

namespace kgprobe {

// What one transformation step did. Indices refer to the triple list the
// step received (the source graph for the first step).
struct StepProvenance {
    std::string step;
    std::uint64_t seed = 0;
    std::optional<std::size_t> k;
    std::optional<std::string> selector;
    std::vector<std::size_t> selected;
    std::vector<std::size_t> removed;
    std::optional<std::string> donor_id;
    std::vector<std::size_t> permutation;
    std::vector<std::string> notes;

    bool operator==(const StepProvenance&) const = default;
};

struct Provenance {
    std::string condition;
    std::uint64_t seed = 0;
    std::vector<StepProvenance> steps;

    bool operator==(const Provenance&) const = default;
};

// A named KG condition for one problem.
struct KgVariant {
    std::string problem_id;
    std::string condition;
    OntologyTier tier = OntologyTier::t3;
    std::vector<Triple> triples;
    // Entity-only control: relation labels and roles are gone and the
    // variant is just this list of distinct object strings.
    std::vector<std::string> entities;
    bool relations_removed = false;
    // Relation skeleton: objects are typed placeholders, not concrete entities.
    bool entities_masked = false;
    // Dense density: verbalize with the expanded sentence style.
    bool expanded = false;
    Provenance provenance;

    bool operator==(const KgVariant&) const = default;

    // Distinct object strings supplied to the model, in first-appearance order.
    std::vector<std::string> objects() const;
};

// The untouched graph as a variant (used for full-graph scoring).
KgVariant full_variant(const LocalGraph& graph);

struct TripleScore {
    std::size_t triple_index = 0;
    double score = 0.0;
    double overlap = 0.0;
    double boost = 1.0;
};

inline constexpr double kCentralRoleBoost = 1.3;

// Lexical relevance of each object to the problem statement:
// |terms(object) & terms(problem)| / |terms(object)| times 1.3 for mechanism,
// failure and intervention roles. Sorted descending, stable by triple order.
std::vector<TripleScore> rank_triples(const LocalGraph& graph, std::string_view problem_statement,
                                      const TermNormalizer& normalizer);

struct DensityFractions {
    double sparse = 0.25;
    double medium = 0.5;
};

// Everything the variant operations need besides the graph itself.
struct VariantContext {
    const RelationLabelMap* labels = nullptr;
    const std::vector<LocalGraph>* corpus = nullptr;
    std::string problem_statement;
    TermNormalizer normalizer;
    DensityFractions density;
    std::size_t shuffle_derangement_attempts = 100;
};

KgVariant density_variant(const LocalGraph& graph, DensityLevel level, const VariantContext& ctx);
KgVariant ontology_variant(const LocalGraph& graph, OntologyTier tier, const RelationLabelMap& labels);
KgVariant topology_variant(const LocalGraph& graph, TopologyMode mode);
KgVariant random_control(const LocalGraph& graph, const std::vector<LocalGraph>& corpus, std::size_t match_count,
                         std::uint64_t seed);
KgVariant shuffled_control(const LocalGraph& graph, std::uint64_t seed, const RelationLabelMap& labels,
                           std::size_t derangement_attempts = 100);
KgVariant entity_only_control(const LocalGraph& graph);
KgVariant relation_skeleton_control(const LocalGraph& graph);
KgVariant top_k_variant(const LocalGraph& graph, std::size_t k, Selector selector, std::uint64_t seed,
                        const VariantContext& ctx);
KgVariant outcome_holdout(const LocalGraph& graph);
KgVariant outcome_holdout(const KgVariant& variant);
KgVariant knockout(const LocalGraph& graph, const step::Knockout& removal, std::uint64_t seed,
                   const VariantContext& ctx);

// Indices the given selector would keep, in selection order.
std::vector<std::size_t> select_top_k(const LocalGraph& graph, std::size_t k, Selector selector, std::uint64_t seed,
                                      const VariantContext& ctx);

// Applies every step of `condition` in order. Step i receives seed
// derive_seed(seed, i).
KgVariant apply_condition(const LocalGraph& source, const Condition& condition, std::uint64_t seed,
                          const VariantContext& ctx);

// Rebuilds a variant from its source graph and recorded provenance.
KgVariant regenerate(const LocalGraph& source, const Provenance& provenance, const VariantContext& ctx);

void to_json(nlohmann::json& j, const StepProvenance& p);
void from_json(const nlohmann::json& j, StepProvenance& p);
void to_json(nlohmann::json& j, const Provenance& p);
void from_json(const nlohmann::json& j, Provenance& p);
void to_json(nlohmann::json& j, const KgVariant& v);
void from_json(const nlohmann::json& j, KgVariant& v);

}  // namespace kgprobe
