#include "kgprobe/config.hpp"

#include <filesystem>
#include <set>

#include "kgprobe/errors.hpp"
#include "kgprobe/io.hpp"

#ifndef KGPROBE_DEFAULT_CONFIG
#define KGPROBE_DEFAULT_CONFIG "config/default.json"
#endif

namespace kgprobe {

std::string SufficiencySpec::keep_tag(Selector s, std::size_t k) const {
    return "topk:" + std::string(selector_name(s)) + ":" + std::to_string(k);
}

std::string SufficiencySpec::remove_tag(Selector s, std::size_t k) const {
    return "knockout:top." + std::string(selector_name(s)) + ":" + std::to_string(k);
}

std::vector<std::string> ExperimentConfig::all_conditions() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    auto add = [&](const std::string& tag) {
        if (seen.insert(tag).second) out.push_back(tag);
    };
    for (const auto& c : main_conditions) add(c);
    for (const auto& c : extra_conditions) add(c);
    for (auto s : sufficiency.selectors) {
        for (auto k : sufficiency.ks) add(sufficiency.keep_tag(s, k));
        add(sufficiency.keep_tag(s, sufficiency.full_k));
        for (auto k : sufficiency.ks) add(sufficiency.remove_tag(s, k));
    }
    return out;
}

namespace {

bool is_score_column(const std::string& name) {
    static const std::set<std::string> names = {"trr", "rfs", "ktc", "trr_ref", "rfs_ref", "ktc_ref"};
    return names.count(name) != 0;
}

ExperimentConfig parse_experiment(const nlohmann::json& doc) {
    ExperimentConfig e;
    if (doc.is_null()) return e;
    e.reference_condition = doc.value("reference_condition", e.reference_condition);
    e.main_conditions = doc.value("main_conditions", std::vector<std::string>{});
    e.extra_conditions = doc.value("extra_conditions", std::vector<std::string>{});

    if (doc.contains("sufficiency")) {
        const auto& s = doc.at("sufficiency");
        for (const auto& name : s.value("selectors", std::vector<std::string>{})) {
            auto sel = parse_selector(name);
            if (!sel) throw ConfigError("sufficiency: unknown selector '" + name + "'");
            e.sufficiency.selectors.push_back(*sel);
        }
        e.sufficiency.ks = s.value("ks", std::vector<std::size_t>{});
        e.sufficiency.full_k = s.value("full_k", e.sufficiency.full_k);
        for (std::size_t i = 0; i < e.sufficiency.ks.size(); ++i) {
            if (e.sufficiency.ks[i] == 0 || (i > 0 && e.sufficiency.ks[i] <= e.sufficiency.ks[i - 1]))
                throw ConfigError("sufficiency: ks must be positive and strictly increasing");
        }
        if (!e.sufficiency.ks.empty() && e.sufficiency.full_k <= e.sufficiency.ks.back())
            throw ConfigError("sufficiency: full_k must exceed every k");
    }

    for (const auto& c : doc.value("contrasts", nlohmann::json::array())) {
        ContrastSpec spec;
        spec.name = c.at("name").get<std::string>();
        const auto metric = c.at("metric").get<std::string>();
        auto m = parse_metric(metric);
        if (!m) throw ConfigError("contrast '" + spec.name + "': unknown metric '" + metric + "'");
        spec.metric = *m;
        spec.a = c.at("a").get<std::string>();
        spec.b = c.at("b").get<std::string>();
        e.contrasts.push_back(std::move(spec));
    }
    if (doc.contains("best_groups")) {
        for (const auto& [name, tags] : doc.at("best_groups").items())
            e.best_groups.emplace_back(name, tags.get<std::vector<std::string>>());
    }
    e.best_metric = doc.value("best_metric", e.best_metric);
    if (!is_score_column(e.best_metric)) throw ConfigError("best_metric: unknown column '" + e.best_metric + "'");

    if (doc.contains("density_fractions")) {
        e.density.sparse = doc.at("density_fractions").value("sparse", e.density.sparse);
        e.density.medium = doc.at("density_fractions").value("medium", e.density.medium);
    }
    const auto style = doc.value("verbalize_style", std::string("auto"));
    if (style != "auto") {
        e.style = parse_style(style);
        if (!e.style) throw ConfigError("verbalize_style must be compact, expanded or auto");
    }
    e.max_in_flight = doc.value("max_in_flight", e.max_in_flight);
    e.resamples = doc.value("resamples", e.resamples);
    e.ci_level = doc.value("ci_level", e.ci_level);
    const auto correction = doc.value("correction", std::string("holm"));
    auto corr = parse_correction(correction);
    if (!corr) throw ConfigError("correction must be holm, bh or none");
    e.correction = *corr;
    for (const auto& b : doc.value("backends", nlohmann::json::array())) e.backends.push_back(parse_backend_spec(b));

    // Every referenced tag must parse, and contrasts must name planned conditions.
    const auto all = e.all_conditions();
    const std::set<std::string> planned(all.begin(), all.end());
    for (const auto& tag : all) parse_condition(tag);
    auto require = [&](const std::string& tag, const std::string& where) {
        if (!planned.count(tag)) throw ConfigError(where + ": condition '" + tag + "' is not in the plan");
    };
    require(e.reference_condition, "reference_condition");
    for (const auto& c : e.contrasts) {
        require(c.a, "contrast '" + c.name + "'");
        require(c.b, "contrast '" + c.name + "'");
    }
    for (const auto& [name, tags] : e.best_groups) {
        for (const auto& t : tags) require(t, "best_groups." + name);
    }
    std::set<std::string> models;
    for (const auto& b : e.backends) {
        if (!models.insert(b.model_name).second) throw ConfigError("duplicate backend model_name '" + b.model_name + "'");
    }
    return e;
}

}  // namespace

Config parse_config(const nlohmann::json& doc, const std::string& base_dir) {
    Config c;
    c.schema = parse_schema(doc.at("schema"));
    c.inventory = doc.contains("role_inventory") ? parse_role_inventory(doc.at("role_inventory")) : RoleInventory::defaults();
    c.normalizer = doc.contains("stopwords") ? TermNormalizer(doc.at("stopwords").get<std::vector<std::string>>())
                                             : TermNormalizer();
    c.verbalize = parse_verbalize_config(doc.value("verbalize", nlohmann::json()));
    if (doc.contains("prompt_template")) {
        c.prompt_template = doc.at("prompt_template").get<std::string>();
    } else if (doc.contains("prompt_template_file")) {
        c.prompt_template =
            read_file((std::filesystem::path(base_dir) / doc.at("prompt_template_file").get<std::string>()).string());
    } else {
        c.prompt_template = default_prompt_template();
    }
    c.experiment = parse_experiment(doc.value("experiment", nlohmann::json()));
    return c;
}

Config load_config(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    try {
        return parse_config(doc, std::filesystem::path(path).parent_path().string());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string default_config_path() { return KGPROBE_DEFAULT_CONFIG; }

}  // namespace kgprobe
