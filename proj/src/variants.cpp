#include "kgprobe/variants.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "kgprobe/centrality.hpp"
#include "kgprobe/errors.hpp"
#include "kgprobe/rng.hpp"

namespace kgprobe {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

KgVariant start_variant(const LocalGraph& graph, const ConditionStep& step) {
    KgVariant v;
    v.problem_id = graph.problem_id;
    v.tier = graph.tier;
    v.condition = format_step(step);
    v.provenance.condition = v.condition;
    return v;
}

StepProvenance& add_step(KgVariant& v, std::uint64_t seed) {
    StepProvenance p;
    p.step = v.condition;
    p.seed = seed;
    v.provenance.steps.push_back(std::move(p));
    return v.provenance.steps.back();
}

std::vector<Triple> pick(const std::vector<Triple>& triples, const std::vector<std::size_t>& indices) {
    std::vector<Triple> out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(triples.at(i));
    return out;
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& removed) {
    std::vector<bool> drop(n, false);
    for (auto i : removed) drop.at(i) = true;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i) {
        if (!drop[i]) keep.push_back(i);
    }
    return keep;
}

std::size_t fraction_count(std::size_t n, double fraction) {
    const double raw = static_cast<double>(n) * fraction;
    const auto c = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    return std::min(n, std::max<std::size_t>(c, n > 0 ? 1 : 0));
}

// Stable ordering of triple indices by descending score.
std::vector<std::size_t> order_by_score(const std::vector<double>& scores, bool descending) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return descending ? scores[a] > scores[b] : scores[a] < scores[b];
    });
    return idx;
}

std::vector<double> endpoint_centrality(const std::vector<Triple>& triples, CentralityKind kind) {
    const auto c = centrality(triples, kind);
    std::map<std::string, double, std::less<>> by_node;
    for (std::size_t i = 0; i < c.nodes.size(); ++i) by_node[c.nodes[i]] = c.scores(static_cast<Eigen::Index>(i));
    std::vector<double> out;
    out.reserve(triples.size());
    for (const auto& t : triples) out.push_back(std::max(by_node.at(t.subject), by_node.at(t.object)));
    return out;
}

void require_relations(const KgVariant& v, std::string_view what) {
    if (v.relations_removed)
        throw ValidationError("condition", std::string(what) + " needs role annotations, but '" + v.condition +
                                               "' removed relations");
}

}  // namespace

// --- KgVariant --------------------------------------------------------------

std::vector<std::string> KgVariant::objects() const {
    if (relations_removed) return entities;
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& t : triples) {
        if (seen.insert(t.object).second) out.push_back(t.object);
    }
    return out;
}

KgVariant full_variant(const LocalGraph& graph) {
    KgVariant v;
    v.problem_id = graph.problem_id;
    v.tier = graph.tier;
    v.triples = graph.triples;
    return v;
}

// --- ranking ----------------------------------------------------------------

std::vector<TripleScore> rank_triples(const LocalGraph& graph, std::string_view problem_statement,
                                      const TermNormalizer& normalizer) {
    if (trim(problem_statement).empty()) throw ValidationError("problem_statement", "must be non-empty for ranking");
    const auto problem_terms = normalizer.terms(problem_statement);
    std::vector<TripleScore> scores;
    scores.reserve(graph.triples.size());
    for (std::size_t i = 0; i < graph.triples.size(); ++i) {
        const auto& t = graph.triples[i];
        const auto object_terms = normalizer.terms(t.object);
        TripleScore s;
        s.triple_index = i;
        if (!object_terms.empty()) {
            std::size_t shared = 0;
            for (const auto& w : object_terms) shared += problem_terms.count(w);
            s.overlap = static_cast<double>(shared) / static_cast<double>(object_terms.size());
        }
        const bool central = t.role == RelationRole::mechanism || t.role == RelationRole::failure ||
                             t.role == RelationRole::intervention;
        s.boost = central ? kCentralRoleBoost : 1.0;
        s.score = s.overlap * s.boost;
        scores.push_back(s);
    }
    std::stable_sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
    return scores;
}

std::vector<std::size_t> select_top_k(const LocalGraph& graph, std::size_t k, Selector selector, std::uint64_t seed,
                                      const VariantContext& ctx) {
    const auto n = graph.triples.size();
    const auto take = std::min(k, n);
    std::vector<std::size_t> order;
    switch (selector) {
        case Selector::semantic:
            for (const auto& s : rank_triples(graph, ctx.problem_statement, ctx.normalizer)) order.push_back(s.triple_index);
            break;
        case Selector::random: {
            Rng rng(seed);
            order = sample_without_replacement(n, take, rng);
            break;
        }
        case Selector::degree:
            order = order_by_score(endpoint_centrality(graph.triples, CentralityKind::degree), true);
            break;
        case Selector::betweenness:
            order = order_by_score(endpoint_centrality(graph.triples, CentralityKind::betweenness), true);
            break;
        case Selector::pagerank:
            order = order_by_score(endpoint_centrality(graph.triples, CentralityKind::pagerank), true);
            break;
    }
    order.resize(take);
    return order;
}

// --- variant operations -----------------------------------------------------

KgVariant density_variant(const LocalGraph& graph, DensityLevel level, const VariantContext& ctx) {
    auto v = start_variant(graph, step::Density{level});
    auto& prov = add_step(v, 0);
    const auto n = graph.triples.size();
    if (level == DensityLevel::dense) {
        v.triples = graph.triples;
        v.expanded = true;
        prov.notes.push_back("expanded verbalization");
        return v;
    }
    const auto k = fraction_count(n, level == DensityLevel::sparse ? ctx.density.sparse : ctx.density.medium);
    std::vector<std::size_t> keep;
    for (const auto& s : rank_triples(graph, ctx.problem_statement, ctx.normalizer)) {
        if (keep.size() == k) break;
        keep.push_back(s.triple_index);
    }
    v.triples = pick(graph.triples, keep);
    prov.k = k;
    prov.selector = "semantic";
    prov.selected = std::move(keep);
    return v;
}

KgVariant ontology_variant(const LocalGraph& graph, OntologyTier tier, const RelationLabelMap& labels) {
    auto v = start_variant(graph, step::Ontology{tier});
    add_step(v, 0);
    v.tier = tier;
    v.triples.reserve(graph.triples.size());
    for (const auto& t : graph.triples) {
        Triple r = t;
        r.relation = labels.relabel(t.relation, tier);
        v.triples.push_back(std::move(r));
    }
    return v;
}

KgVariant topology_variant(const LocalGraph& graph, TopologyMode mode) {
    auto v = start_variant(graph, step::Topology{mode});
    auto& prov = add_step(v, 0);
    const auto root = problem_node_label(graph.problem_id);
    NodeIndex index(graph.triples);
    const auto n = index.size();
    constexpr auto kUnreached = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> depth(n, kUnreached);

    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& t : graph.triples) {
        const auto u = index.id(t.subject);
        const auto w = index.id(t.object);
        adj[u].push_back(w);
        if (mode == TopologyMode::two_hop) adj[w].push_back(u);
    }
    if (index.contains(root)) {
        std::deque<std::size_t> queue{index.id(root)};
        depth[queue.front()] = 0;
        while (!queue.empty()) {
            const auto u = queue.front();
            queue.pop_front();
            for (auto w : adj[u]) {
                if (depth[w] == kUnreached) {
                    depth[w] = depth[u] + 1;
                    queue.push_back(w);
                }
            }
        }
    }

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < graph.triples.size(); ++i) {
        const auto ds = depth[index.id(graph.triples[i].subject)];
        const auto dobj = depth[index.id(graph.triples[i].object)];
        if (mode == TopologyMode::two_hop) {
            // Hop of an edge: one past the nearer endpoint.
            const auto nearer = std::min(ds, dobj);
            if (nearer != kUnreached && nearer + 1 <= 2) keep.push_back(i);
        } else if (ds != kUnreached) {
            keep.push_back(i);
        }
    }
    prov.removed = complement(graph.triples.size(), keep);
    v.triples = pick(graph.triples, keep);
    return v;
}

KgVariant random_control(const LocalGraph& graph, const std::vector<LocalGraph>& corpus, std::size_t match_count,
                         std::uint64_t seed) {
    auto v = start_variant(graph, step::Control{ControlKind::random});
    auto& prov = add_step(v, seed);
    std::vector<const LocalGraph*> donors;
    for (const auto& g : corpus) {
        if (g.problem_id != graph.problem_id && g.triples.size() >= match_count) donors.push_back(&g);
    }
    if (donors.empty())
        throw ValidationError("corpus", "no donor problem other than '" + graph.problem_id + "' has at least " +
                                            std::to_string(match_count) + " triples");
    Rng rng(seed);
    const auto& donor = *donors[uniform_index(rng, donors.size())];
    auto chosen = sample_without_replacement(donor.triples.size(), match_count, rng);
    std::sort(chosen.begin(), chosen.end());
    v.triples = pick(donor.triples, chosen);
    prov.k = match_count;
    prov.donor_id = donor.problem_id;
    prov.selected = std::move(chosen);
    return v;
}

KgVariant shuffled_control(const LocalGraph& graph, std::uint64_t seed, const RelationLabelMap& labels,
                           std::size_t derangement_attempts) {
    auto v = start_variant(graph, step::Control{ControlKind::shuffled});
    auto& prov = add_step(v, seed);
    const auto n = graph.triples.size();
    std::vector<std::string> old_labels;
    for (const auto& t : graph.triples) old_labels.push_back(t.relation);
    if (std::set<std::string>(old_labels.begin(), old_labels.end()).size() < 2)
        throw ValidationError("relation", "shuffle needs at least two distinct relation labels");

    auto changes = [&](const std::vector<std::size_t>& perm, bool all) {
        std::size_t changed = 0;
        for (std::size_t i = 0; i < n; ++i) changed += old_labels[perm[i]] != old_labels[i];
        return all ? changed == n : changed > 0;
    };

    Rng rng(seed);
    std::vector<std::size_t> perm(n);
    bool found = false;
    for (std::size_t attempt = 0; attempt < derangement_attempts && !found; ++attempt) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        shuffle_in_place(perm, rng);
        found = changes(perm, true);
    }
    if (!found) {
        prov.notes.push_back("no derangement in " + std::to_string(derangement_attempts) + " draws");
        for (std::size_t attempt = 0; attempt < 10000 && !found; ++attempt) {
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            shuffle_in_place(perm, rng);
            found = changes(perm, false);
        }
    }
    if (!found) {
        // Swap the first pair of differing labels.
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t j = 1; j < n; ++j) {
            if (old_labels[j] != old_labels[0]) {
                std::swap(perm[0], perm[j]);
                break;
            }
        }
    }

    v.triples = graph.triples;
    for (std::size_t i = 0; i < n; ++i) {
        auto& t = v.triples[i];
        t.relation = old_labels[perm[i]];
        auto role = labels.role_of(t.relation);
        if (!role) throw ValidationError(t.relation, "relation is not in the label map");
        t.role = *role;
    }
    prov.permutation = std::move(perm);
    return v;
}

KgVariant entity_only_control(const LocalGraph& graph) {
    auto v = start_variant(graph, step::Control{ControlKind::entity_only});
    add_step(v, 0);
    std::set<std::string> seen;
    for (const auto& t : graph.triples) {
        if (seen.insert(t.object).second) v.entities.push_back(t.object);
    }
    v.relations_removed = true;
    return v;
}

KgVariant relation_skeleton_control(const LocalGraph& graph) {
    auto v = start_variant(graph, step::Control{ControlKind::rel_skeleton});
    add_step(v, 0);
    std::map<std::pair<RelationRole, std::string>, std::string> placeholder;
    std::map<std::string, std::string> by_entity;
    std::map<RelationRole, std::size_t> counters;
    for (const auto& t : graph.triples) {
        auto key = std::make_pair(t.role, t.object);
        if (placeholder.count(key)) continue;
        std::string name = to_lower_ascii(role_name(t.role));
        for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        auto label = "<" + name + "_" + std::to_string(++counters[t.role]) + ">";
        placeholder.emplace(key, label);
        by_entity.emplace(t.object, label);
    }
    v.triples.reserve(graph.triples.size());
    for (const auto& t : graph.triples) {
        Triple r = t;
        r.object = placeholder.at({t.role, t.object});
        if (auto it = by_entity.find(t.subject); it != by_entity.end()) r.subject = it->second;
        v.triples.push_back(std::move(r));
    }
    v.entities_masked = true;
    return v;
}

KgVariant top_k_variant(const LocalGraph& graph, std::size_t k, Selector selector, std::uint64_t seed,
                        const VariantContext& ctx) {
    if (k < 1) throw ValidationError("k", "must be at least 1");
    auto v = start_variant(graph, step::TopK{selector, k});
    auto& prov = add_step(v, seed);
    prov.k = k;
    prov.selector = std::string(selector_name(selector));
    const auto n = graph.triples.size();
    if (k > n) {
        prov.notes.push_back("k exceeds graph size " + std::to_string(n) + "; full graph returned");
        prov.selected.resize(n);
        std::iota(prov.selected.begin(), prov.selected.end(), std::size_t{0});
    } else {
        prov.selected = select_top_k(graph, k, selector, seed, ctx);
        if (selector == Selector::random) std::sort(prov.selected.begin(), prov.selected.end());
    }
    v.triples = pick(graph.triples, prov.selected);
    return v;
}

KgVariant outcome_holdout(const LocalGraph& graph) {
    auto v = start_variant(graph, step::Holdout{});
    auto& prov = add_step(v, 0);
    for (std::size_t i = 0; i < graph.triples.size(); ++i) {
        if (graph.triples[i].role == RelationRole::outcome)
            prov.removed.push_back(i);
        else
            v.triples.push_back(graph.triples[i]);
    }
    return v;
}

KgVariant outcome_holdout(const KgVariant& variant) {
    require_relations(variant, "holdout:outcome");
    LocalGraph g{variant.problem_id, variant.triples, variant.tier};
    auto step_result = outcome_holdout(g);
    KgVariant out = variant;
    out.triples = std::move(step_result.triples);
    out.condition = variant.condition.empty() ? step_result.condition : variant.condition + "+" + step_result.condition;
    out.provenance.condition = out.condition;
    out.provenance.steps.push_back(std::move(step_result.provenance.steps.front()));
    return out;
}

KgVariant knockout(const LocalGraph& graph, const step::Knockout& removal, std::uint64_t seed,
                   const VariantContext& ctx) {
    auto v = start_variant(graph, removal);
    auto& prov = add_step(v, seed);
    const auto n = graph.triples.size();
    std::vector<std::size_t> removed;
    if (removal.kind == RemovalKind::role) {
        for (std::size_t i = 0; i < n; ++i) {
            if (graph.triples[i].role == removal.role) removed.push_back(i);
        }
        if (removed.empty())
            throw ValidationError("role", "role '" + std::string(role_name(removal.role)) + "' is absent from the graph");
    } else {
        if (removal.count >= n)
            throw ValidationError("count", "knockout count " + std::to_string(removal.count) +
                                               " must be below the graph size " + std::to_string(n));
        prov.k = removal.count;
        switch (removal.kind) {
            case RemovalKind::bridge:
            case RemovalKind::peripheral: {
                const auto order = order_by_score(edge_betweenness(graph.triples), removal.kind == RemovalKind::bridge);
                removed.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(removal.count));
                prov.selector = "edge_betweenness";
                break;
            }
            case RemovalKind::random: {
                Rng rng(seed);
                removed = sample_without_replacement(n, removal.count, rng);
                break;
            }
            case RemovalKind::top:
                removed = select_top_k(graph, removal.count, removal.selector, seed, ctx);
                prov.selector = std::string(selector_name(removal.selector));
                break;
            case RemovalKind::role: break;
        }
    }
    std::sort(removed.begin(), removed.end());
    v.triples = pick(graph.triples, complement(n, removed));
    prov.removed = std::move(removed);
    return v;
}

// --- composition ------------------------------------------------------------

KgVariant apply_condition(const LocalGraph& source, const Condition& condition, std::uint64_t seed,
                          const VariantContext& ctx) {
    if (condition.steps.empty()) throw ValidationError("condition", "no steps");
    KgVariant current = full_variant(source);
    for (std::size_t i = 0; i < condition.steps.size(); ++i) {
        const auto& s = condition.steps[i];
        const auto step_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
        const LocalGraph g{current.problem_id, current.triples, current.tier};
        if (!std::holds_alternative<step::NoKg>(s)) require_relations(current, format_step(s));

        KgVariant next = std::visit(
            overloaded{
                [&](const step::NoKg& st) {
                    auto v = start_variant(g, st);
                    add_step(v, 0);
                    return v;
                },
                [&](const step::Density& st) { return density_variant(g, st.level, ctx); },
                [&](const step::Ontology& st) {
                    if (!ctx.labels) throw ConfigError("ontology variants need a relation-label map");
                    return ontology_variant(g, st.tier, *ctx.labels);
                },
                [&](const step::Topology& st) { return topology_variant(g, st.mode); },
                [&](const step::Control& st) {
                    switch (st.kind) {
                        case ControlKind::random:
                            if (!ctx.corpus) throw ConfigError("random control needs a corpus");
                            return random_control(g, *ctx.corpus, g.triples.size(), step_seed);
                        case ControlKind::shuffled:
                            if (!ctx.labels) throw ConfigError("shuffled control needs a relation-label map");
                            return shuffled_control(g, step_seed, *ctx.labels, ctx.shuffle_derangement_attempts);
                        case ControlKind::entity_only: return entity_only_control(g);
                        case ControlKind::rel_skeleton: return relation_skeleton_control(g);
                    }
                    return entity_only_control(g);
                },
                [&](const step::TopK& st) { return top_k_variant(g, st.k, st.selector, step_seed, ctx); },
                [&](const step::Holdout&) { return outcome_holdout(g); },
                [&](const step::Knockout& st) { return knockout(g, st, step_seed, ctx); },
            },
            s);

        next.expanded = next.expanded || current.expanded;
        next.entities_masked = next.entities_masked || current.entities_masked;
        next.provenance.steps.insert(next.provenance.steps.begin(), current.provenance.steps.begin(),
                                     current.provenance.steps.end());
        current = std::move(next);
    }
    current.condition = condition.tag();
    current.provenance.condition = current.condition;
    current.provenance.seed = seed;
    return current;
}

KgVariant regenerate(const LocalGraph& source, const Provenance& provenance, const VariantContext& ctx) {
    return apply_condition(source, parse_condition(provenance.condition), provenance.seed, ctx);
}

// --- JSON -------------------------------------------------------------------

void to_json(nlohmann::json& j, const StepProvenance& p) {
    j = nlohmann::json{{"step", p.step},        {"seed", p.seed},           {"selected", p.selected},
                       {"removed", p.removed},  {"permutation", p.permutation}, {"notes", p.notes}};
    j["k"] = p.k ? nlohmann::json(*p.k) : nlohmann::json(nullptr);
    j["selector"] = p.selector ? nlohmann::json(*p.selector) : nlohmann::json(nullptr);
    j["donor_id"] = p.donor_id ? nlohmann::json(*p.donor_id) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, StepProvenance& p) {
    p.step = j.at("step").get<std::string>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.selected = j.value("selected", std::vector<std::size_t>{});
    p.removed = j.value("removed", std::vector<std::size_t>{});
    p.permutation = j.value("permutation", std::vector<std::size_t>{});
    p.notes = j.value("notes", std::vector<std::string>{});
    p.k = j.contains("k") && !j.at("k").is_null() ? std::optional(j.at("k").get<std::size_t>()) : std::nullopt;
    p.selector = j.contains("selector") && !j.at("selector").is_null()
                     ? std::optional(j.at("selector").get<std::string>())
                     : std::nullopt;
    p.donor_id = j.contains("donor_id") && !j.at("donor_id").is_null()
                     ? std::optional(j.at("donor_id").get<std::string>())
                     : std::nullopt;
}

void to_json(nlohmann::json& j, const Provenance& p) {
    j = nlohmann::json{{"condition", p.condition}, {"seed", p.seed}, {"steps", p.steps}};
}

void from_json(const nlohmann::json& j, Provenance& p) {
    p.condition = j.at("condition").get<std::string>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.steps = j.at("steps").get<std::vector<StepProvenance>>();
}

void to_json(nlohmann::json& j, const KgVariant& v) {
    j = nlohmann::json{{"problem_id", v.problem_id},
                       {"condition", v.condition},
                       {"tier", tier_name(v.tier)},
                       {"triples", v.triples},
                       {"entities", v.entities},
                       {"relations_removed", v.relations_removed},
                       {"entities_masked", v.entities_masked},
                       {"expanded", v.expanded},
                       {"provenance", v.provenance}};
}

void from_json(const nlohmann::json& j, KgVariant& v) {
    v.problem_id = j.at("problem_id").get<std::string>();
    v.condition = j.at("condition").get<std::string>();
    auto tier = parse_tier(j.at("tier").get<std::string>());
    if (!tier) throw ValidationError("tier", "must be t1 or t3");
    v.tier = *tier;
    v.triples = j.at("triples").get<std::vector<Triple>>();
    v.entities = j.value("entities", std::vector<std::string>{});
    v.relations_removed = j.value("relations_removed", false);
    v.entities_masked = j.value("entities_masked", false);
    v.expanded = j.value("expanded", false);
    v.provenance = j.at("provenance").get<Provenance>();
}

}  // namespace kgprobe
