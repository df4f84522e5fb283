#include "kgprobe/kg_core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "kgprobe/errors.hpp"
#include "kgprobe/io.hpp"
#include "kgprobe/text.hpp"

namespace kgprobe {

namespace {

constexpr std::string_view kProblemRef = "@problem";

std::string required_string(const nlohmann::json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ValidationError(key, "missing required field");
    const auto& v = j.at(key);
    if (!v.is_string()) throw ValidationError(key, "expected a string");
    return v.get<std::string>();
}

}  // namespace

std::string_view role_name(RelationRole role) noexcept {
    switch (role) {
        case RelationRole::failure: return "failure";
        case RelationRole::intervention: return "intervention";
        case RelationRole::mechanism: return "mechanism";
        case RelationRole::property: return "property";
        case RelationRole::component: return "component";
        case RelationRole::system: return "system";
        case RelationRole::outcome: return "outcome";
    }
    return "component";
}

std::optional<RelationRole> parse_role(std::string_view name) noexcept {
    for (auto r : kAllRoles) {
        if (role_name(r) == name) return r;
    }
    return std::nullopt;
}

std::string_view tier_name(OntologyTier tier) noexcept { return tier == OntologyTier::t1 ? "t1" : "t3"; }

std::optional<OntologyTier> parse_tier(std::string_view name) noexcept {
    if (name == "t1" || name == "T1") return OntologyTier::t1;
    if (name == "t3" || name == "T3") return OntologyTier::t3;
    return std::nullopt;
}

const std::vector<std::string>& structured_field_names() {
    static const std::vector<std::string> names = {
        "material_system", "component",       "failure_mode",    "intervention",
        "mechanism",       "target_property", "claimed_outcome",
    };
    return names;
}

std::optional<std::string_view> field_value(const ProblemRecord& p, std::string_view name) {
    if (name == "material_system") return p.material_system;
    if (name == "component") return p.component;
    if (name == "failure_mode") return p.failure_mode;
    if (name == "intervention") return p.intervention;
    if (name == "mechanism") return p.mechanism;
    if (name == "target_property") return p.target_property;
    if (name == "claimed_outcome") return p.claimed_outcome;
    return std::nullopt;
}

std::string problem_node_label(std::string_view problem_id) { return "problem:" + normalize_label(problem_id); }

// --- RelationLabelMap -------------------------------------------------------

RelationLabelMap::RelationLabelMap(std::vector<RelationEntry> entries) : entries_(std::move(entries)) {
    std::set<std::string> ids;
    for (const auto& e : entries_) {
        if (e.id.empty() || e.t1.empty() || e.t3.empty())
            throw ConfigError("relation entry '" + e.id + "' needs id, t1 and t3 labels");
        if (!ids.insert(e.id).second) throw ConfigError("duplicate relation id '" + e.id + "'");
        for (const auto& label : {e.t1, e.t3}) {
            auto [it, inserted] = roles_.emplace(label, e.role);
            if (!inserted && it->second != e.role)
                throw ConfigError("relation label '" + label + "' maps to roles '" +
                                  std::string(role_name(it->second)) + "' and '" +
                                  std::string(role_name(e.role)) + "'");
        }
    }
}

const RelationEntry* RelationLabelMap::find_id(std::string_view id) const {
    for (const auto& e : entries_) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

std::optional<RelationRole> RelationLabelMap::role_of(std::string_view label) const {
    auto it = roles_.find(label);
    if (it == roles_.end()) return std::nullopt;
    return it->second;
}

std::string RelationLabelMap::relabel(std::string_view label, OntologyTier tier) const {
    std::set<std::string> targets;
    for (const auto& e : entries_) {
        if (e.t1 == label || e.t3 == label) targets.insert(label_for(e, tier));
    }
    if (targets.empty()) throw ValidationError(std::string(label), "relation is not in the label map");
    if (targets.size() > 1)
        throw ValidationError(std::string(label), "relation maps to " + std::to_string(targets.size()) +
                                                      " labels in tier " + std::string(tier_name(tier)));
    return *targets.begin();
}

// --- schema -----------------------------------------------------------------

GraphSchema parse_schema(const nlohmann::json& doc) {
    GraphSchema schema;
    if (!doc.is_object()) throw ConfigError("schema must be an object");
    schema.delimiter = doc.value("delimiter", std::string(";"));
    if (schema.delimiter.empty()) throw ConfigError("schema delimiter must be non-empty");
    if (doc.contains("tier")) {
        auto t = parse_tier(doc.at("tier").get<std::string>());
        if (!t) throw ConfigError("schema tier must be t1 or t3");
        schema.tier = *t;
    }
    schema.min_triples = doc.value("min_triples", std::size_t{15});
    schema.max_triples = doc.value("max_triples", std::size_t{18});

    std::vector<RelationEntry> entries;
    for (const auto& r : doc.at("relations")) {
        RelationEntry e;
        e.id = r.at("id").get<std::string>();
        auto role = parse_role(r.at("role").get<std::string>());
        if (!role) throw ConfigError("relation '" + e.id + "' has unknown role");
        e.role = *role;
        e.t1 = r.at("t1").get<std::string>();
        e.t3 = r.at("t3").get<std::string>();
        entries.push_back(std::move(e));
    }
    schema.labels = RelationLabelMap(std::move(entries));

    const auto& known = structured_field_names();
    auto check_relation = [&](const std::string& id, const std::string& where) {
        if (!schema.labels.find_id(id)) throw ConfigError(where + ": unknown relation id '" + id + "'");
    };
    for (const auto& f : doc.at("fields")) {
        FieldSpec spec;
        spec.name = f.at("name").get<std::string>();
        if (std::find(known.begin(), known.end(), spec.name) == known.end())
            throw ConfigError("schema field '" + spec.name + "' is not a problem field");
        const auto expand = f.value("expand", std::string("fan"));
        if (expand == "fan") {
            spec.expand = Expansion::fan;
        } else if (expand == "chain") {
            spec.expand = Expansion::chain;
            spec.chain_relation = f.at("chain_relation").get<std::string>();
            check_relation(spec.chain_relation, spec.name);
        } else {
            throw ConfigError("field '" + spec.name + "': expand must be fan or chain");
        }
        for (const auto& t : f.at("templates")) {
            EdgeTemplate tpl;
            tpl.subject = t.value("subject", std::string(kProblemRef));
            if (tpl.subject != kProblemRef &&
                std::find(known.begin(), known.end(), tpl.subject) == known.end())
                throw ConfigError("field '" + spec.name + "': unknown subject '" + tpl.subject + "'");
            tpl.relation = t.at("relation").get<std::string>();
            check_relation(tpl.relation, spec.name);
            if (t.contains("hub")) {
                HubSpec hub;
                hub.node = normalize_label(t.at("hub").at("node").get<std::string>());
                hub.relation = t.at("hub").at("relation").get<std::string>();
                if (hub.node.empty()) throw ConfigError("field '" + spec.name + "': empty hub node");
                check_relation(hub.relation, spec.name);
                tpl.hub = std::move(hub);
            }
            spec.templates.push_back(std::move(tpl));
        }
        if (spec.templates.empty()) throw ConfigError("field '" + spec.name + "' has no templates");
        schema.fields.push_back(std::move(spec));
    }
    if (schema.fields.empty()) throw ConfigError("schema declares no fields");
    return schema;
}

std::vector<std::string> split_values(std::string_view value, std::string_view delimiter) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= value.size()) {
        std::size_t end = value.find(delimiter, pos);
        if (end == std::string_view::npos) end = value.size();
        auto piece = trim(value.substr(pos, end - pos));
        if (!piece.empty()) out.push_back(std::move(piece));
        pos = end + delimiter.size();
    }
    return out;
}

LocalGraph build_local_graph(const ProblemRecord& problem, const GraphSchema& schema) {
    if (trim(problem.id).empty()) throw ValidationError("id", "must be non-empty");
    if (trim(problem.problem_statement).empty()) throw ValidationError("problem_statement", "must be non-empty");

    LocalGraph graph;
    graph.problem_id = problem.id;
    graph.tier = schema.tier;
    const std::string root = problem_node_label(problem.id);

    std::set<std::tuple<std::string, std::string, std::string>> seen;
    auto emit = [&](const std::string& subject, const std::string& relation_id, const std::string& object) {
        const auto* entry = schema.labels.find_id(relation_id);
        Triple t{subject, schema.labels.label_for(*entry, schema.tier), entry->role, object};
        if (seen.emplace(t.subject, t.relation, t.object).second) graph.triples.push_back(std::move(t));
    };
    auto first_value = [&](const std::string& field) -> std::optional<std::string> {
        auto raw = field_value(problem, field);
        auto values = split_values(*raw, schema.delimiter);
        if (values.empty()) return std::nullopt;
        return normalize_label(values.front());
    };

    for (const auto& field : schema.fields) {
        auto raw = field_value(problem, field.name);
        std::vector<std::string> values;
        for (auto& v : split_values(*raw, schema.delimiter)) values.push_back(normalize_label(v));

        for (std::size_t vi = 0; vi < values.size(); ++vi) {
            const auto& value = values[vi];
            if (field.expand == Expansion::chain && vi > 0) {
                emit(values[vi - 1], field.chain_relation, value);
                continue;
            }
            for (const auto& tpl : field.templates) {
                std::string subject = root;
                if (tpl.subject != kProblemRef) {
                    auto s = first_value(tpl.subject);
                    if (s && *s != value) subject = *s;
                }
                if (tpl.hub) {
                    emit(subject, tpl.hub->relation, tpl.hub->node);
                    emit(tpl.hub->node, tpl.relation, value);
                } else {
                    emit(subject, tpl.relation, value);
                }
            }
        }
    }
    if (graph.triples.empty()) throw ValidationError("", "problem '" + problem.id + "' has no non-empty fields");
    return graph;
}

// --- validation -------------------------------------------------------------

bool ValidationReport::has_errors() const {
    return std::any_of(issues.begin(), issues.end(),
                       [](const auto& i) { return i.severity == ValidationIssue::Severity::error; });
}

ValidationReport validate_graph(const LocalGraph& graph, const RelationLabelMap* labels, std::size_t min_triples,
                                std::size_t max_triples) {
    using Sev = ValidationIssue::Severity;
    ValidationReport report;
    const auto n = graph.triples.size();
    if (n < min_triples)
        report.issues.push_back({Sev::warning, "size", std::to_string(n) + " triples, below " + std::to_string(min_triples)});
    if (n > max_triples)
        report.issues.push_back({Sev::warning, "size", std::to_string(n) + " triples, above " + std::to_string(max_triples)});

    const std::string root = problem_node_label(graph.problem_id);
    bool root_is_subject = false;
    std::set<std::tuple<std::string, std::string, std::string>> seen;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& t = graph.triples[i];
        const auto where = "triple " + std::to_string(i);
        if (t.subject.empty() || t.relation.empty() || t.object.empty())
            report.issues.push_back({Sev::error, "empty", where + " has an empty subject, relation or object"});
        if (t.subject == root) root_is_subject = true;
        if (!seen.emplace(t.subject, t.relation, t.object).second)
            report.issues.push_back({Sev::error, "duplicate",
                                     where + " duplicates (" + t.subject + ", " + t.relation + ", " + t.object + ")"});
        if (labels) {
            auto role = labels->role_of(t.relation);
            if (!role)
                report.issues.push_back({Sev::error, "unroleable", where + " relation '" + t.relation + "' has no role"});
            else if (*role != t.role)
                report.issues.push_back({Sev::error, "role_mismatch",
                                         where + " carries role '" + std::string(role_name(t.role)) +
                                             "' but relation '" + t.relation + "' maps to '" +
                                             std::string(role_name(*role)) + "'"});
        }
    }
    if (n > 0 && !root_is_subject)
        report.issues.push_back({Sev::error, "root", "problem node '" + root + "' is not the subject of any triple"});
    return report;
}

// --- corpus statistics ------------------------------------------------------

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw Error("quantile of empty data");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

KgSizeStats corpus_stats(const std::vector<LocalGraph>& corpus, const std::vector<std::size_t>& ks) {
    if (corpus.empty()) throw ValidationError("corpus", "must contain at least one graph");
    KgSizeStats s;
    s.n_problems = corpus.size();
    std::vector<double> counts;
    counts.reserve(corpus.size());
    std::size_t total = 0;
    s.min_triples = corpus.front().triples.size();
    for (const auto& g : corpus) {
        const auto n = g.triples.size();
        if (n == 0) throw ValidationError(g.problem_id, "graph has no triples");
        counts.push_back(static_cast<double>(n));
        total += n;
        s.min_triples = std::min(s.min_triples, n);
        s.max_triples = std::max(s.max_triples, n);
    }
    const double m = static_cast<double>(total) / static_cast<double>(s.n_problems);
    s.mean_triples = m;
    double ss = 0.0;
    for (double c : counts) ss += (c - m) * (c - m);
    s.std_triples = s.n_problems > 1 ? std::sqrt(ss / static_cast<double>(s.n_problems - 1)) : 0.0;
    s.median_triples = quantile(counts, 0.5);
    s.p25_triples = quantile(counts, 0.25);
    s.p75_triples = quantile(counts, 0.75);
    for (auto k : ks) {
        std::vector<double> fractions;
        fractions.reserve(counts.size());
        double sum = 0.0;
        for (const auto& g : corpus) {
            const auto n = g.triples.size();
            const double f = static_cast<double>(std::min(k, n)) / static_cast<double>(n);
            fractions.push_back(f);
            sum += f;
        }
        s.topk_fraction[k] = sum / static_cast<double>(corpus.size());
        s.topk_fraction_median[k] = quantile(std::move(fractions), 0.5);
    }
    return s;
}

// --- JSON -------------------------------------------------------------------

void to_json(nlohmann::json& j, const ProblemRecord& p) {
    j = nlohmann::json{{"id", p.id},
                       {"problem_statement", p.problem_statement},
                       {"material_system", p.material_system},
                       {"component", p.component},
                       {"failure_mode", p.failure_mode},
                       {"intervention", p.intervention},
                       {"mechanism", p.mechanism},
                       {"target_property", p.target_property},
                       {"claimed_outcome", p.claimed_outcome}};
}

void from_json(const nlohmann::json& j, ProblemRecord& p) {
    p.id = required_string(j, "id");
    p.problem_statement = required_string(j, "problem_statement");
    p.material_system = required_string(j, "material_system");
    p.component = required_string(j, "component");
    p.failure_mode = required_string(j, "failure_mode");
    p.intervention = required_string(j, "intervention");
    p.mechanism = required_string(j, "mechanism");
    p.target_property = required_string(j, "target_property");
    p.claimed_outcome = required_string(j, "claimed_outcome");
}

void to_json(nlohmann::json& j, const Triple& t) {
    j = nlohmann::json{{"subject", t.subject}, {"relation", t.relation}, {"role", role_name(t.role)}, {"object", t.object}};
}

void from_json(const nlohmann::json& j, Triple& t) {
    t.subject = required_string(j, "subject");
    t.relation = required_string(j, "relation");
    t.object = required_string(j, "object");
    auto role = parse_role(required_string(j, "role"));
    if (!role) throw ValidationError("role", "unknown relation role");
    t.role = *role;
}

void to_json(nlohmann::json& j, const LocalGraph& g) {
    j = nlohmann::json{{"problem_id", g.problem_id}, {"tier", tier_name(g.tier)}, {"triples", g.triples}};
}

void from_json(const nlohmann::json& j, LocalGraph& g) {
    g.problem_id = required_string(j, "problem_id");
    auto tier = parse_tier(required_string(j, "tier"));
    if (!tier) throw ValidationError("tier", "must be t1 or t3");
    g.tier = *tier;
    if (!j.contains("triples") || !j.at("triples").is_array()) throw ValidationError("triples", "missing array");
    g.triples = j.at("triples").get<std::vector<Triple>>();
}

void to_json(nlohmann::json& j, const KgSizeStats& s) {
    nlohmann::json topk = nlohmann::json::object();
    for (const auto& [k, f] : s.topk_fraction) {
        topk[std::to_string(k)] = {{"mean", f}, {"median", s.topk_fraction_median.at(k)}};
    }
    j = nlohmann::json{{"n_problems", s.n_problems},     {"mean_triples", s.mean_triples},
                       {"median_triples", s.median_triples}, {"std_triples", s.std_triples},
                       {"p25_triples", s.p25_triples},   {"p75_triples", s.p75_triples},
                       {"min_triples", s.min_triples},   {"max_triples", s.max_triples},
                       {"topk_fraction", topk}};
}

std::vector<ProblemRecord> parse_problems_jsonl(std::string_view content) {
    std::vector<ProblemRecord> out;
    std::set<std::string> ids;
    std::size_t line = 0;
    for (const auto& j : parse_jsonl(content)) {
        ++line;
        ProblemRecord p;
        try {
            p = j.get<ProblemRecord>();
        } catch (const ValidationError& e) {
            throw ValidationError(e.field(), "record " + std::to_string(line) + ": " + e.what());
        }
        if (trim(p.id).empty()) throw ValidationError("id", "record " + std::to_string(line) + ": empty id");
        if (trim(p.problem_statement).empty())
            throw ValidationError("problem_statement", "record " + std::to_string(line) + ": empty statement");
        if (!ids.insert(p.id).second) throw ValidationError("id", "duplicate problem id '" + p.id + "'");
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<ProblemRecord> read_problems_jsonl(const std::string& path) { return parse_problems_jsonl(read_file(path)); }

}  // namespace kgprobe
