#include "kgprobe/pipeline.hpp"

#include <map>
#include <set>

#include "kgprobe/errors.hpp"
#include "kgprobe/io.hpp"
#include "kgprobe/rng.hpp"

namespace kgprobe {

std::vector<LocalGraph> build_graphs(const std::vector<ProblemRecord>& problems, const GraphSchema& schema) {
    std::vector<LocalGraph> graphs;
    graphs.reserve(problems.size());
    for (const auto& p : problems) graphs.push_back(build_local_graph(p, schema));
    return graphs;
}

std::string graph_file_name(std::string_view problem_id) {
    std::string name;
    for (char c : problem_id) {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                          c == '_' || c == '-';
        name += keep ? c : '_';
    }
    return name + ".json";
}

void write_graphs(const std::vector<LocalGraph>& graphs, const std::filesystem::path& dir) {
    std::set<std::string> names;
    for (const auto& g : graphs) {
        const auto name = graph_file_name(g.problem_id);
        if (name == "stats.json" || !names.insert(name).second)
            throw ValidationError("id", "problem id '" + g.problem_id + "' collides with another graph file");
        write_file((dir / name).string(), nlohmann::json(g).dump(2) + "\n");
    }
    const auto stats = corpus_stats(graphs, {1, 2, 4, 8});
    write_file((dir / "stats.json").string(), nlohmann::json(stats).dump(2) + "\n");
}

std::vector<LocalGraph> read_graphs(const std::filesystem::path& dir, const std::vector<ProblemRecord>& problems) {
    std::vector<LocalGraph> graphs;
    for (const auto& p : problems) {
        const auto path = dir / graph_file_name(p.id);
        if (!std::filesystem::exists(path)) throw ValidationError("graphs", "missing graph file " + path.string());
        auto g = nlohmann::json::parse(read_file(path.string())).get<LocalGraph>();
        if (g.problem_id != p.id) throw ValidationError("graphs", path.string() + " belongs to '" + g.problem_id + "'");
        graphs.push_back(std::move(g));
    }
    return graphs;
}

std::vector<KgVariant> generate_variants(const std::vector<ProblemRecord>& problems,
                                         const std::vector<LocalGraph>& graphs, const Config& config,
                                         const std::vector<std::string>& conditions, std::uint64_t seed) {
    if (problems.size() != graphs.size()) throw ValidationError("graphs", "one graph per problem is required");
    std::vector<Condition> parsed;
    for (const auto& tag : conditions) parsed.push_back(parse_condition(tag));

    std::vector<KgVariant> out;
    out.reserve(problems.size() * parsed.size());
    for (std::size_t i = 0; i < problems.size(); ++i) {
        VariantContext ctx;
        ctx.labels = &config.schema.labels;
        ctx.corpus = &graphs;
        ctx.problem_statement = problems[i].problem_statement;
        ctx.normalizer = config.normalizer;
        ctx.density = config.experiment.density;
        const auto problem_seed = derive_seed(seed, problems[i].id);
        for (const auto& c : parsed) out.push_back(apply_condition(graphs[i], c, problem_seed, ctx));
    }
    return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& lines) {
    std::string content;
    for (const auto& l : lines) content += to_jsonl_line(l);
    write_file(path.string(), content);
}

std::vector<KgVariant> read_variants(const std::filesystem::path& path) {
    std::vector<KgVariant> out;
    for (const auto& line : parse_jsonl(read_file(path.string()))) out.push_back(line.get<KgVariant>());
    return out;
}

Prompt build_prompt(const ProblemRecord& problem, const KgVariant& variant, const Config& config) {
    const auto style = effective_style(variant, config.experiment.style);
    return assemble_prompt(problem, verbalize_triples(variant, style, config.verbalize), config.prompt_template);
}

std::vector<PlanEntry> build_plan(const std::vector<ProblemRecord>& problems, const std::vector<KgVariant>& variants,
                                  const Config& config, const std::vector<BackendSpec>& backends) {
    if (backends.empty()) throw ConfigError("no backends configured");
    std::map<std::string, const ProblemRecord*> by_id;
    for (const auto& p : problems) by_id[p.id] = &p;
    std::vector<PlanEntry> plan;
    for (const auto& v : variants) {
        auto it = by_id.find(v.problem_id);
        if (it == by_id.end()) throw ValidationError("variants", "unknown problem '" + v.problem_id + "'");
        const auto prompt = build_prompt(*it->second, v, config);
        for (const auto& b : backends) plan.push_back({prompt, b.model_name, b.params.samples});
    }
    return plan;
}

BackendMap make_backends(const std::vector<BackendSpec>& specs) {
    BackendMap map;
    for (const auto& s : specs) map[s.model_name] = std::shared_ptr<const Backend>(make_backend(s));
    return map;
}

namespace {

std::string pair_key(std::string_view a, std::string_view b) {
    std::string k(a);
    k += '\x1f';
    k += b;
    return k;
}

}  // namespace

std::vector<ScoreRecord> score_generations(const std::vector<LocalGraph>& graphs,
                                           const std::vector<KgVariant>& variants,
                                           const std::vector<GenerationRecord>& generations, const Config& config,
                                           const EmbeddingProvider& provider) {
    std::map<std::string, const LocalGraph*> graph_of;
    for (const auto& g : graphs) graph_of[g.problem_id] = &g;
    std::map<std::string, const KgVariant*> variant_of;
    for (const auto& v : variants) variant_of[pair_key(v.problem_id, v.condition)] = &v;
    std::map<std::string, const GenerationRecord*> reference_of;
    const auto& ref = config.experiment.reference_condition;
    for (const auto& g : generations) {
        if (g.condition == ref) reference_of[generation_key(g.problem_id, ref, g.model_name, g.sample_index)] = &g;
    }

    std::vector<ScoreRecord> out;
    out.reserve(generations.size());
    for (const auto& g : generations) {
        auto gi = graph_of.find(g.problem_id);
        if (gi == graph_of.end()) throw ValidationError("generations", "no graph for problem '" + g.problem_id + "'");
        auto vi = variant_of.find(pair_key(g.problem_id, g.condition));
        if (vi == variant_of.end())
            throw ValidationError("generations", "no variant for '" + g.problem_id + "' under '" + g.condition + "'");
        const auto& variant = *vi->second;
        const auto& graph = *gi->second;

        ScoreRecord s;
        s.problem_id = g.problem_id;
        s.condition = g.condition;
        s.model_name = g.model_name;
        s.sample_index = g.sample_index;
        s.trr = trr(g.hypothesis, variant);
        s.rfs = rfs(g.hypothesis, variant, config.inventory);
        s.ktc = ktc(g.hypothesis, variant, config.normalizer);
        s.trr_ref = fixed_reference(g.hypothesis, graph, MetricKind::trr, config.inventory, config.normalizer);
        s.rfs_ref = fixed_reference(g.hypothesis, graph, MetricKind::rfs, config.inventory, config.normalizer);
        s.ktc_ref = fixed_reference(g.hypothesis, graph, MetricKind::ktc, config.inventory, config.normalizer);
        s.mech_int_coverage = mech_int_coverage(g.hypothesis, graph, config.normalizer);
        auto ri = reference_of.find(generation_key(g.problem_id, ref, g.model_name, g.sample_index));
        if (ri != reference_of.end()) {
            try {
                s.d_sem_to_full = semantic_distance(g.hypothesis, ri->second->hypothesis, provider);
            } catch (const UnembeddableError&) {
                s.d_sem_to_full = std::nullopt;
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<ScoreRecord> read_scores(const std::filesystem::path& path) {
    std::vector<ScoreRecord> out;
    for (const auto& line : parse_jsonl(read_file(path.string()))) out.push_back(line.get<ScoreRecord>());
    return out;
}

namespace {

nlohmann::json variance_ratio_line(const std::string& model, const std::vector<GenerationRecord>& generations,
                                   const std::vector<std::string>& conditions, const EmbeddingProvider& provider) {
    const std::set<std::string> wanted(conditions.begin(), conditions.end());
    // problem -> condition -> embedding, sample 0 only
    std::map<std::string, std::map<std::string, Eigen::VectorXd>> grid;
    std::size_t unembeddable = 0;
    for (const auto& g : generations) {
        if (g.model_name != model || g.sample_index != 0 || !wanted.count(g.condition)) continue;
        try {
            grid[g.problem_id][g.condition] = provider.embed(g.hypothesis).values;
        } catch (const UnembeddableError&) {
            ++unembeddable;
        }
    }
    std::vector<std::vector<Eigen::VectorXd>> groups;
    for (auto& [problem, by_condition] : grid) {
        if (by_condition.size() < 2) continue;
        std::vector<Eigen::VectorXd> g;
        for (auto& [c, v] : by_condition) g.push_back(std::move(v));
        groups.push_back(std::move(g));
    }
    nlohmann::json line{{"kind", "variance_ratio"},
                        {"model", model},
                        {"problems", groups.size()},
                        {"conditions", conditions.size()},
                        {"unembeddable", unembeddable},
                        {"provider", provider.id()}};
    try {
        line["value"] = variance_ratio(groups);
    } catch (const ValidationError& e) {
        line["value"] = nullptr;
        line["error"] = e.what();
    }
    return line;
}

}  // namespace

std::vector<nlohmann::json> analyze(const std::vector<ScoreRecord>& scores,
                                    const std::vector<GenerationRecord>& generations, const Config& config,
                                    const AnalysisOptions& options, const EmbeddingProvider& provider) {
    const auto& exp = config.experiment;
    const auto models = models_in(scores);
    std::vector<nlohmann::json> lines;

    for (const auto& model : models) {
        std::vector<AnalysisResult> results;
        for (const auto& c : exp.contrasts) {
            const auto column = std::string(metric_name(c.metric));
            const auto a = problem_means(scores, model, c.a, column);
            const auto b = problem_means(scores, model, c.b, column);
            if (a.empty() || b.empty())
                throw ValidationError("condition", "contrast '" + c.name + "' for model '" + model +
                                                       "' is missing condition '" + (a.empty() ? c.a : c.b) + "'");
            auto r = analyze_contrast(c.name, pair_by_problem(a, b), options.resamples, options.ci_level,
                                      derive_seed(derive_seed(options.seed, model), c.name));
            r.metric = column;
            r.model = model;
            r.condition_a = c.a;
            r.condition_b = c.b;
            r.check();
            results.push_back(std::move(r));
        }
        if (options.correction != Correction::none && !results.empty()) {
            std::vector<double> p;
            for (const auto& r : results) p.push_back(r.p_value);
            const auto adj = correct_pvalues(p, options.correction);
            for (std::size_t i = 0; i < results.size(); ++i) {
                results[i].p_adjusted = adj[i];
                results[i].correction = std::string(correction_name(options.correction));
            }
        }
        for (const auto& r : results) lines.emplace_back(r);

        if (!exp.main_conditions.empty())
            lines.push_back(variance_ratio_line(model, generations, exp.main_conditions, provider));

        std::vector<SampleScore> samples;
        const std::set<std::string> main(exp.main_conditions.begin(), exp.main_conditions.end());
        for (const auto& s : scores) {
            if (s.model_name == model && main.count(s.condition))
                samples.push_back({s.problem_id, s.condition, s.sample_index, s.trr});
        }
        nlohmann::json snr_line{{"kind", "sampling_snr"}, {"model", model}, {"metric", "trr"}};
        try {
            snr_line.update(nlohmann::json(sampling_snr(samples)));
        } catch (const ValidationError& e) {
            snr_line["skipped"] = e.what();
        }
        lines.push_back(std::move(snr_line));
    }

    if (models.size() >= 2 && exp.main_conditions.size() >= 2) {
        const std::set<std::string> main(exp.main_conditions.begin(), exp.main_conditions.end());
        for (auto metric : {MetricKind::trr, MetricKind::rfs, MetricKind::ktc}) {
            std::vector<FactorScore> rows;
            for (const auto& s : scores) {
                if (main.count(s.condition)) rows.push_back({s.problem_id, s.model_name, s.condition, s.metric(metric)});
            }
            nlohmann::json line{{"kind", "variance_components"}, {"metric", std::string(metric_name(metric))}};
            line.update(nlohmann::json(variance_components(rows)));
            lines.push_back(std::move(line));
        }
    }
    return lines;
}

std::vector<std::string> write_report(const std::vector<ScoreRecord>& scores,
                                      const std::vector<nlohmann::json>& analysis, const Config& config,
                                      const std::optional<nlohmann::json>& paper_constants,
                                      const std::filesystem::path& dir, const std::vector<EmitFormat>& formats) {
    std::map<std::string, double> ratios;
    std::vector<AnalysisResult> contrasts;
    for (const auto& line : analysis) {
        const auto kind = line.value("kind", std::string());
        if (kind == "contrast") contrasts.push_back(line.get<AnalysisResult>());
        if (kind == "variance_ratio" && line.contains("value") && line.at("value").is_number())
            ratios[line.at("model").get<std::string>()] = line.at("value").get<double>();
    }

    const auto summary = aggregate_summary(scores, config.experiment, ratios);
    auto summary_table = summary.to_table();
    std::vector<std::pair<std::string, Table>> tables;
    if (paper_constants) add_reference_rows(summary_table, summary, *paper_constants);
    tables.emplace_back("summary", std::move(summary_table));
    tables.emplace_back("contrasts", contrasts_table(contrasts));
    if (!config.experiment.sufficiency.selectors.empty())
        tables.emplace_back("curves", curves_table(sufficiency_curves(scores, config.experiment.sufficiency)));
    if (paper_constants) tables.emplace_back("reference_curves", reference_curves_table(*paper_constants));

    std::vector<std::string> written;
    for (const auto& [name, table] : tables) {
        for (auto f : formats) {
            const auto ext = f == EmitFormat::markdown ? ".md" : ".csv";
            written.push_back(emit(table, f, (dir / (name + ext)).string()));
        }
    }
    return written;
}

}  // namespace kgprobe
