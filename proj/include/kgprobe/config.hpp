#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kgprobe/condition.hpp"
#include "kgprobe/kg_core.hpp"
#include "kgprobe/llm_bridge.hpp"
#include "kgprobe/metrics.hpp"
#include "kgprobe/stats.hpp"
#include "kgprobe/text.hpp"
#include "kgprobe/variants.hpp"
#include "kgprobe/verbalize.hpp"

namespace kgprobe {

struct ContrastSpec {
    std::string name;
    MetricKind metric = MetricKind::trr;
    std::string a;  // condition tag, the "real" side
    std::string b;
};

struct SufficiencySpec {
    std::vector<Selector> selectors;
    std::vector<std::size_t> ks;
    // Keep-series point at which every graph is passed whole.
    std::size_t full_k = 18;

    std::string keep_tag(Selector s, std::size_t k) const;
    std::string remove_tag(Selector s, std::size_t k) const;
};

struct ExperimentConfig {
    std::string reference_condition = "ontology:t3";
    std::vector<std::string> main_conditions;
    std::vector<std::string> extra_conditions;
    SufficiencySpec sufficiency;
    std::vector<ContrastSpec> contrasts;
    std::vector<std::pair<std::string, std::vector<std::string>>> best_groups;
    // Score column ranked for the best-* columns (trr, rfs, ktc or a *_ref name).
    std::string best_metric = "ktc_ref";
    DensityFractions density;
    std::optional<VerbalizeStyle> style;  // nullopt = auto
    std::size_t max_in_flight = 4;
    std::size_t resamples = 10000;
    double ci_level = 0.95;
    Correction correction = Correction::holm;
    std::vector<BackendSpec> backends;

    // main, extra, then the sufficiency keep and remove series; duplicates dropped.
    std::vector<std::string> all_conditions() const;
};

struct Config {
    GraphSchema schema;
    RoleInventory inventory;
    TermNormalizer normalizer;
    VerbalizeConfig verbalize;
    std::string prompt_template;
    ExperimentConfig experiment;
};

// `base_dir` resolves relative file references such as the prompt template.
Config parse_config(const nlohmann::json& doc, const std::string& base_dir);
Config load_config(const std::string& path);

// The shipped config/default.json.
std::string default_config_path();

}  // namespace kgprobe
