// Command-line driver for the graph-conditioning experiment pipeline.
#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kgprobe/config.hpp"
#include "kgprobe/embedding.hpp"
#include "kgprobe/errors.hpp"
#include "kgprobe/io.hpp"
#include "kgprobe/pipeline.hpp"

namespace fs = std::filesystem;
using namespace kgprobe;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitPartial = 2;

struct Globals {
    std::uint64_t seed = 0;
    std::string config_path = default_config_path();
    std::string out_dir = "out";
    std::string style;  // empty keeps the config value
};

struct EmbedderFlags {
    std::string kind = "hashing";
    std::string endpoint;
    std::string vector_path = "vector";

    void attach(CLI::App* cmd) {
        cmd->add_option("--embedder", kind, "Embedding provider")->check(CLI::IsMember({"hashing", "http"}));
        cmd->add_option("--embed-endpoint", endpoint, "URL of the http embedding provider");
        cmd->add_option("--embed-vector-path", vector_path, "JSON path of the vector in the response");
    }

    std::unique_ptr<EmbeddingProvider> make(const Config& config) const {
        if (kind == "http") {
            HttpEmbedderOptions o;
            o.endpoint = endpoint;
            o.vector_path = vector_path;
            if (const char* key = std::getenv(kApiKeyEnv)) o.headers["Authorization"] = std::string("Bearer ") + key;
            return std::make_unique<HttpEmbedder>(std::move(o));
        }
        return std::make_unique<CachedEmbedder>(std::make_shared<HashingEmbedder>(config.normalizer));
    }
};

Config load(const Globals& g) {
    auto config = load_config(g.config_path);
    if (!g.style.empty() && g.style != "auto") config.experiment.style = parse_style(g.style);
    if (g.style == "auto") config.experiment.style.reset();
    return config;
}

std::vector<std::string> select_conditions(const Config& config, const std::string& list, bool main_only) {
    if (!list.empty()) {
        std::vector<std::string> tags;
        for (const auto& c : parse_condition_list(list)) tags.push_back(c.tag());
        return tags;
    }
    if (main_only) {
        auto tags = config.experiment.main_conditions;
        const auto& ref = config.experiment.reference_condition;
        if (std::find(tags.begin(), tags.end(), ref) == tags.end()) tags.push_back(ref);
        return tags;
    }
    return config.experiment.all_conditions();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kgprobe: knowledge-graph conditioning experiments for hypothesis generation"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Global seed");
    app.add_option("--config", g.config_path, "Config file");
    app.add_option("--out-dir", g.out_dir, "Directory for all stage outputs");
    app.add_option("--verbalize-style", g.style, "compact, expanded or auto")
        ->check(CLI::IsMember({"compact", "expanded", "auto"}));

    std::string problems_path;
    std::string graphs_out;
    auto* build = app.add_subcommand("build-graphs", "Build one local graph per problem");
    build->add_option("--in", problems_path, "Problems JSONL")->required();
    build->add_option("--out", graphs_out, "Graph directory (default <out-dir>/graphs)");

    std::string conditions;
    bool main_only = false;
    auto* variants = app.add_subcommand("gen-variants", "Materialize condition variants");
    variants->add_option("--in", problems_path, "Problems JSONL")->required();
    variants->add_option("--conditions", conditions, "Comma-separated condition tags (default: full plan)");
    variants->add_flag("--main-only", main_only, "Only the main conditions and the reference");

    std::string backend_kind;
    std::string model_name;
    std::size_t samples = 0;
    std::size_t max_in_flight = 0;
    std::size_t stop_after = 0;
    auto* run = app.add_subcommand("run", "Generate hypotheses for every variant");
    run->add_option("--in", problems_path, "Problems JSONL")->required();
    run->add_option("--backend", backend_kind, "Use a single backend of this kind instead of the config list")
        ->check(CLI::IsMember({"http", "mock_echo", "mock_ignore", "mock_template"}));
    run->add_option("--model-name", model_name, "Model name for --backend");
    run->add_option("--samples", samples, "Samples per prompt (overrides the backend)");
    run->add_option("--max-in-flight", max_in_flight, "Concurrent generations");
    run->add_option("--stop-after", stop_after, "Stop after this many new records")->group("");

    EmbedderFlags embed;
    auto* score = app.add_subcommand("score", "Score generations");
    score->add_option("--in", problems_path, "Problems JSONL")->required();
    embed.attach(score);

    std::size_t resamples = 0;
    std::string correction;
    double ci_level = 0.0;
    auto* analyze_cmd = app.add_subcommand("analyze", "Contrasts, variance ratio and sampling checks");
    analyze_cmd->add_option("--resamples", resamples, "Permutation and bootstrap resamples");
    analyze_cmd->add_option("--correction", correction, "holm, bh or none")
        ->check(CLI::IsMember({"holm", "bh", "none"}));
    analyze_cmd->add_option("--ci-level", ci_level, "Bootstrap interval level")->check(CLI::Range(0.5, 0.999999));
    embed.attach(analyze_cmd);

    std::string paper_constants;
    std::vector<std::string> formats{"markdown", "csv"};
    auto* report = app.add_subcommand("report", "Emit summary tables and curve series");
    report->add_option("--paper-constants", paper_constants, "JSON file of published reference values")
        ->check(CLI::ExistingFile);
    report->add_option("--format", formats, "markdown and/or csv")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    const OutputLayout out{fs::path(g.out_dir)};
    try {
        const auto config = load(g);

        if (*build) {
            const auto problems = read_problems_jsonl(problems_path);
            const auto graphs = build_graphs(problems, config.schema);
            std::size_t flagged = 0;
            for (const auto& graph : graphs) {
                const auto report_issues = validate_graph(graph, &config.schema.labels, config.schema.min_triples,
                                                          config.schema.max_triples);
                for (const auto& issue : report_issues.issues) {
                    std::cerr << graph.problem_id << ": " << issue.code << ": " << issue.message << "\n";
                    ++flagged;
                }
            }
            const fs::path dir = graphs_out.empty() ? out.graphs_dir() : fs::path(graphs_out);
            write_graphs(graphs, dir);
            std::cout << "wrote " << graphs.size() << " graphs to " << dir.string() << " (" << flagged
                      << " validation issues)\n";
        } else if (*variants) {
            const auto problems = read_problems_jsonl(problems_path);
            const auto graphs = read_graphs(out.graphs_dir(), problems);
            const auto tags = select_conditions(config, conditions, main_only);
            const auto vs = generate_variants(problems, graphs, config, tags, g.seed);
            write_records(out.variants(), vs);
            std::cout << "wrote " << vs.size() << " variants (" << tags.size() << " conditions)\n";
        } else if (*run) {
            const auto problems = read_problems_jsonl(problems_path);
            const auto vs = read_variants(out.variants());
            auto specs = config.experiment.backends;
            if (!backend_kind.empty()) {
                BackendSpec spec = specs.empty() ? BackendSpec{} : specs.front();
                spec.kind = *parse_backend_kind(backend_kind);
                spec.model_name = model_name.empty() ? backend_kind : model_name;
                specs = {spec};
            }
            for (auto& s : specs) {
                if (samples > 0) s.params.samples = samples;
                validate_backend(s);
            }
            RunOptions options;
            options.seed = g.seed;
            options.max_in_flight = max_in_flight > 0 ? max_in_flight : config.experiment.max_in_flight;
            if (stop_after > 0) options.stop_after = stop_after;
            const auto plan = build_plan(problems, vs, config, specs);
            const auto summary = run_experiment(plan, make_backends(specs), out.generations().string(), options);
            std::cout << "planned " << summary.planned << ", skipped " << summary.skipped << ", wrote "
                      << summary.written << ", failed " << summary.failed_keys.size() << "\n";
            if (summary.truncated_partial_line) std::cout << "truncated a partial trailing record\n";
            for (std::size_t i = 0; i < summary.failed_keys.size(); ++i)
                std::cerr << "failed: " << summary.failed_keys[i] << ": " << summary.errors[i] << "\n";
            if (!summary.complete()) return kExitPartial;
        } else if (*score) {
            const auto problems = read_problems_jsonl(problems_path);
            const auto graphs = read_graphs(out.graphs_dir(), problems);
            const auto provider = embed.make(config);
            const auto scores = score_generations(graphs, read_variants(out.variants()),
                                                  read_generations(out.generations().string()), config, *provider);
            write_records(out.scores(), scores);
            std::cout << "wrote " << scores.size() << " scores\n";
        } else if (*analyze_cmd) {
            AnalysisOptions options;
            options.seed = g.seed;
            options.resamples = resamples > 0 ? resamples : config.experiment.resamples;
            options.ci_level = ci_level > 0.0 ? ci_level : config.experiment.ci_level;
            options.correction = correction.empty() ? config.experiment.correction : *parse_correction(correction);
            const auto provider = embed.make(config);
            const auto lines = analyze(read_scores(out.scores()), read_generations(out.generations().string()), config,
                                       options, *provider);
            write_jsonl(out.analysis(), lines);
            std::cout << "wrote " << lines.size() << " analysis records\n";
        } else if (*report) {
            std::optional<nlohmann::json> constants;
            if (!paper_constants.empty()) constants = nlohmann::json::parse(read_file(paper_constants));
            std::vector<EmitFormat> fmts;
            for (const auto& f : formats) {
                auto parsed = parse_format(f);
                if (!parsed) throw ValidationError("format", "unknown format '" + f + "'");
                fmts.push_back(*parsed);
            }
            const auto written = write_report(read_scores(out.scores()), parse_jsonl(read_file(out.analysis().string())),
                                              config, constants, out.report_dir(), fmts);
            for (const auto& path : written) std::cout << path << "\n";
        }
    } catch (const TransportError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPartial;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitOk;
}
