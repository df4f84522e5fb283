#include "kgprobe/metrics.hpp"

#include "kgprobe/errors.hpp"

namespace kgprobe {

RoleInventory RoleInventory::defaults() {
    RoleInventory inv;
    inv.cues = {
        {RelationRole::mechanism, {"because", "via", "through", "mechanism", "mediated"}},
        {RelationRole::failure, {"degradation", "capacity fade", "instability", "dissolution", "plating"}},
        {RelationRole::intervention, {"coating", "doping", "modification", "engineering", "treatment"}},
        {RelationRole::outcome, {"improve", "enhance", "reduce", "suppress", "achieve"}},
        {RelationRole::property, {"improve", "enhance", "reduce", "suppress", "achieve"}},
        {RelationRole::component, {"cathode", "anode", "electrolyte", "separator", "electrode", "interface"}},
        {RelationRole::system, {"battery", "batteries", "cell", "cells", "system"}},
    };
    return inv;
}

RoleInventory parse_role_inventory(const nlohmann::json& doc) {
    RoleInventory inv;
    for (const auto& [key, value] : doc.items()) {
        auto role = parse_role(key);
        if (!role) throw ConfigError("role inventory: unknown role '" + key + "'");
        auto& cues = inv.cues[*role];
        for (const auto& c : value) {
            auto phrase = normalize_phrase(c.get<std::string>());
            if (!phrase.empty()) cues.push_back(std::move(phrase));
        }
    }
    for (auto role : kAllRoles) {
        auto it = inv.cues.find(role);
        if (it == inv.cues.end() || it->second.empty())
            throw ConfigError("role inventory: role '" + std::string(role_name(role)) + "' has no cues");
    }
    return inv;
}

std::string_view metric_name(MetricKind m) noexcept {
    switch (m) {
        case MetricKind::trr: return "trr";
        case MetricKind::rfs: return "rfs";
        case MetricKind::ktc: return "ktc";
    }
    return "trr";
}

std::optional<MetricKind> parse_metric(std::string_view name) noexcept {
    if (name == "trr") return MetricKind::trr;
    if (name == "rfs") return MetricKind::rfs;
    if (name == "ktc") return MetricKind::ktc;
    return std::nullopt;
}

double trr(std::string_view hypothesis, const KgVariant& variant) {
    if (variant.entities_masked) return 0.0;
    std::set<std::string> objects;
    for (const auto& o : variant.objects()) {
        auto phrase = normalize_phrase(o);
        if (!phrase.empty()) objects.insert(std::move(phrase));
    }
    if (objects.empty()) return 0.0;
    const auto text = normalize_phrase(hypothesis);
    std::size_t hits = 0;
    for (const auto& o : objects) hits += contains_phrase(text, o);
    return static_cast<double>(hits) / static_cast<double>(objects.size());
}

double rfs(std::string_view hypothesis, const KgVariant& variant, const RoleInventory& inventory) {
    if (variant.relations_removed) return 0.0;
    std::set<RelationRole> roles;
    for (const auto& t : variant.triples) roles.insert(t.role);
    if (roles.empty()) return 0.0;
    const auto text = normalize_phrase(hypothesis);
    std::size_t hits = 0;
    for (auto r : roles) {
        const auto it = inventory.cues.find(r);
        if (it == inventory.cues.end()) continue;
        for (const auto& cue : it->second) {
            if (contains_substring(text, normalize_phrase(cue))) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(roles.size());
}

namespace {

double term_coverage(const std::set<std::string>& reference, std::string_view hypothesis, const TermNormalizer& normalizer) {
    if (reference.empty()) return 0.0;
    const auto hyp = normalizer.terms(hypothesis);
    std::size_t shared = 0;
    for (const auto& t : reference) shared += hyp.count(t);
    return static_cast<double>(shared) / static_cast<double>(reference.size());
}

}  // namespace

double ktc(std::string_view hypothesis, const KgVariant& variant, const TermNormalizer& normalizer) {
    if (variant.entities_masked) return 0.0;
    std::set<std::string> reference;
    for (const auto& o : variant.objects()) {
        auto terms = normalizer.terms(o);
        reference.insert(terms.begin(), terms.end());
    }
    return term_coverage(reference, hypothesis, normalizer);
}

double fixed_reference(std::string_view hypothesis, const LocalGraph& full_graph, MetricKind which,
                       const RoleInventory& inventory, const TermNormalizer& normalizer) {
    const auto full = full_variant(full_graph);
    switch (which) {
        case MetricKind::trr: return trr(hypothesis, full);
        case MetricKind::rfs: return rfs(hypothesis, full, inventory);
        case MetricKind::ktc: return ktc(hypothesis, full, normalizer);
    }
    return 0.0;
}

std::optional<double> mech_int_coverage(std::string_view hypothesis, const LocalGraph& full_graph,
                                        const TermNormalizer& normalizer) {
    std::set<std::string> reference;
    bool any = false;
    for (const auto& t : full_graph.triples) {
        if (t.role != RelationRole::mechanism && t.role != RelationRole::intervention) continue;
        any = true;
        auto terms = normalizer.terms(t.object);
        reference.insert(terms.begin(), terms.end());
    }
    if (!any) return std::nullopt;
    return term_coverage(reference, hypothesis, normalizer);
}

double ScoreRecord::metric(MetricKind m) const {
    switch (m) {
        case MetricKind::trr: return trr;
        case MetricKind::rfs: return rfs;
        case MetricKind::ktc: return ktc;
    }
    return 0.0;
}

double ScoreRecord::metric_ref(MetricKind m) const {
    switch (m) {
        case MetricKind::trr: return trr_ref;
        case MetricKind::rfs: return rfs_ref;
        case MetricKind::ktc: return ktc_ref;
    }
    return 0.0;
}

namespace {
nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }
std::optional<double> optional_from(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}
}  // namespace

void to_json(nlohmann::json& j, const ScoreRecord& s) {
    j = nlohmann::json{{"problem_id", s.problem_id},
                       {"condition", s.condition},
                       {"model_name", s.model_name},
                       {"sample_index", s.sample_index},
                       {"trr", s.trr},
                       {"rfs", s.rfs},
                       {"ktc", s.ktc},
                       {"trr_ref", s.trr_ref},
                       {"rfs_ref", s.rfs_ref},
                       {"ktc_ref", s.ktc_ref},
                       {"mech_int_coverage", optional_json(s.mech_int_coverage)},
                       {"d_sem_to_full", optional_json(s.d_sem_to_full)}};
}

void from_json(const nlohmann::json& j, ScoreRecord& s) {
    s.problem_id = j.at("problem_id").get<std::string>();
    s.condition = j.at("condition").get<std::string>();
    s.model_name = j.at("model_name").get<std::string>();
    s.sample_index = j.at("sample_index").get<std::size_t>();
    s.trr = j.at("trr").get<double>();
    s.rfs = j.at("rfs").get<double>();
    s.ktc = j.at("ktc").get<double>();
    s.trr_ref = j.at("trr_ref").get<double>();
    s.rfs_ref = j.at("rfs_ref").get<double>();
    s.ktc_ref = j.at("ktc_ref").get<double>();
    s.mech_int_coverage = optional_from(j, "mech_int_coverage");
    s.d_sem_to_full = optional_from(j, "d_sem_to_full");
}

}  // namespace kgprobe
