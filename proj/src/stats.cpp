#include "kgprobe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "kgprobe/errors.hpp"
#include "kgprobe/kg_core.hpp"
#include "kgprobe/rng.hpp"

namespace kgprobe {

std::vector<double> PairedSample::differences() const {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

PairedSample pair_by_problem(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
    PairedSample out;
    for (const auto& [id, va] : a) {
        auto it = b.find(id);
        if (it == b.end()) {
            ++out.dropped;
            continue;
        }
        out.problem_ids.push_back(id);
        out.a.push_back(va);
        out.b.push_back(it->second);
    }
    for (const auto& [id, vb] : b) out.dropped += a.count(id) == 0;
    return out;
}

std::string_view permutation_method_name(PermutationMethod m) noexcept {
    switch (m) {
        case PermutationMethod::automatic: return "auto";
        case PermutationMethod::exact: return "exact";
        case PermutationMethod::monte_carlo: return "monte_carlo";
    }
    return "auto";
}

namespace {

constexpr std::size_t kMaxExactN = 30;

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Flipped sums within this distance of the observed one count as ties, so
// sign patterns that reproduce |sum| exactly are not lost to rounding.
double tie_tolerance(const std::vector<double>& d) {
    double total = 0.0;
    for (double x : d) total += std::abs(x);
    return 1e-12 * std::max(1.0, total);
}

}  // namespace

PermutationResult paired_permutation(const std::vector<double>& d, std::size_t resamples, std::uint64_t seed,
                                     PermutationMethod method) {
    const std::size_t n = d.size();
    if (n < 2) throw ValidationError("pairs", "permutation test needs at least 2 pairs");
    if (resamples == 0) throw ValidationError("resamples", "must be positive");

    PermutationResult r;
    r.n = n;
    r.delta = mean_of(d);
    const double observed = std::abs(std::accumulate(d.begin(), d.end(), 0.0));
    const double threshold = observed - tie_tolerance(d);

    if (method == PermutationMethod::automatic)
        method = (n < 63 && (std::uint64_t{1} << n) <= resamples) ? PermutationMethod::exact
                                                                  : PermutationMethod::monte_carlo;

    if (method == PermutationMethod::exact) {
        if (n > kMaxExactN) throw ValidationError("pairs", "exact enumeration limited to 30 pairs");
        const std::uint64_t patterns = std::uint64_t{1} << n;
        std::uint64_t hits = 0;
        for (std::uint64_t mask = 0; mask < patterns; ++mask) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += (mask >> i & 1U) ? -d[i] : d[i];
            hits += std::abs(s) >= threshold;
        }
        r.method = PermutationMethod::exact;
        r.resamples = static_cast<std::size_t>(patterns);
        r.p_value = static_cast<double>(hits) / static_cast<double>(patterns);
        return r;
    }

    std::size_t hits = 0;
    for (std::size_t k = 0; k < resamples; ++k) {
        SplitMixEngine rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
        double s = 0.0;
        std::uint64_t bits = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i % 64 == 0) bits = rng();
            s += (bits >> (i % 64) & 1U) ? -d[i] : d[i];
        }
        hits += std::abs(s) >= threshold;
    }
    r.method = PermutationMethod::monte_carlo;
    r.resamples = resamples;
    r.p_value = static_cast<double>(1 + hits) / static_cast<double>(1 + resamples);
    return r;
}

PermutationResult paired_permutation(const PairedSample& pairs, std::size_t resamples, std::uint64_t seed,
                                     PermutationMethod method) {
    return paired_permutation(pairs.differences(), resamples, seed, method);
}

Interval bootstrap_ci(const std::vector<double>& values, std::size_t resamples, double level, std::uint64_t seed) {
    const std::size_t n = values.size();
    if (n < 2) throw ValidationError("values", "bootstrap needs at least 2 values");
    if (resamples == 0) throw ValidationError("resamples", "must be positive");
    if (!(level > 0.0 && level < 1.0)) throw ValidationError("ci_level", "must lie in (0, 1)");

    std::vector<double> means(resamples);
    for (std::size_t k = 0; k < resamples; ++k) {
        SplitMixEngine rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += values[static_cast<std::size_t>(uniform_index(rng, n))];
        means[k] = s / static_cast<double>(n);
    }
    const double tail = (1.0 - level) / 2.0;
    std::sort(means.begin(), means.end());
    return {quantile(means, tail), quantile(means, 1.0 - tail)};
}

std::string_view correction_name(Correction c) noexcept {
    switch (c) {
        case Correction::none: return "none";
        case Correction::holm: return "holm";
        case Correction::bh: return "bh";
    }
    return "none";
}

std::optional<Correction> parse_correction(std::string_view name) noexcept {
    if (name == "none") return Correction::none;
    if (name == "holm") return Correction::holm;
    if (name == "bh") return Correction::bh;
    return std::nullopt;
}

std::vector<double> correct_pvalues(const std::vector<double>& p, Correction method) {
    for (double x : p) {
        if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("p_value", "must lie in [0, 1]");
    }
    const std::size_t m = p.size();
    if (method == Correction::none || m == 0) return p;

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return p[i] < p[j]; });

    std::vector<double> adj(m);
    const double md = static_cast<double>(m);
    if (method == Correction::holm) {
        double running = 0.0;
        for (std::size_t rank = 0; rank < m; ++rank) {
            const auto i = order[rank];
            running = std::max(running, std::min(1.0, (md - static_cast<double>(rank)) * p[i]));
            adj[i] = running;
        }
    } else {
        double running = 1.0;
        for (std::size_t rank = m; rank-- > 0;) {
            const auto i = order[rank];
            running = std::min(running, std::min(1.0, md / static_cast<double>(rank + 1) * p[i]));
            adj[i] = running;
        }
    }
    return adj;
}

double variance_ratio(const std::vector<std::vector<Eigen::VectorXd>>& groups) {
    if (groups.size() < 2) throw ValidationError("outputs", "variance ratio needs at least 2 problems");
    Eigen::Index dim = -1;
    std::size_t total = 0;
    for (const auto& g : groups) {
        if (g.size() < 2) throw ValidationError("outputs", "every problem needs at least 2 conditions");
        for (const auto& v : g) {
            if (dim < 0) dim = v.size();
            if (v.size() != dim) throw ValidationError("outputs", "embedding dimensions differ");
            if (v.norm() == 0.0) throw UnembeddableError();
        }
        total += g.size();
    }

    // Rows are unit vectors, so the Gram matrix holds every pairwise cosine.
    Eigen::MatrixXd x(static_cast<Eigen::Index>(total), dim);
    std::vector<std::size_t> owner(total);
    Eigen::Index row = 0;
    for (std::size_t p = 0; p < groups.size(); ++p) {
        for (const auto& v : groups[p]) {
            x.row(row) = v.transpose() / v.norm();
            owner[static_cast<std::size_t>(row)] = p;
            ++row;
        }
    }
    const Eigen::MatrixXd gram = x * x.transpose();
    auto distance = [&](Eigen::Index i, Eigen::Index j) {
        const double d = std::clamp(1.0 - gram(i, j), 0.0, 2.0);
        return d < 1e-12 ? 0.0 : d;
    };

    double within_sum = 0.0;
    double between_sum = 0.0;
    std::size_t between_pairs = 0;
    Eigen::Index start = 0;
    for (const auto& g : groups) {
        const auto size = static_cast<Eigen::Index>(g.size());
        double s = 0.0;
        for (Eigen::Index i = start; i < start + size; ++i) {
            for (Eigen::Index j = i + 1; j < start + size; ++j) s += distance(i, j);
        }
        within_sum += s / static_cast<double>(size * (size - 1) / 2);
        for (Eigen::Index i = start; i < start + size; ++i) {
            for (Eigen::Index j = start + size; j < static_cast<Eigen::Index>(total); ++j) {
                between_sum += distance(i, j);
                ++between_pairs;
            }
        }
        start += size;
    }
    const double numerator = within_sum / static_cast<double>(groups.size());
    const double denominator = between_sum / static_cast<double>(between_pairs);
    if (denominator == 0.0) throw ValidationError("outputs", "inter-problem distance is zero; ratio undefined");
    return numerator / denominator;
}

double variance_ratio(const std::vector<std::vector<EmbeddingVector>>& embeddings) {
    std::vector<std::vector<Eigen::VectorXd>> raw(embeddings.size());
    for (std::size_t p = 0; p < embeddings.size(); ++p) {
        for (const auto& e : embeddings[p]) raw[p].push_back(e.values);
    }
    return variance_ratio(raw);
}

double variance_ratio(const std::vector<std::vector<std::string>>& texts, const EmbeddingProvider& provider) {
    std::vector<std::vector<Eigen::VectorXd>> raw(texts.size());
    for (std::size_t p = 0; p < texts.size(); ++p) {
        for (const auto& t : texts[p]) raw[p].push_back(provider.embed(t).values);
    }
    return variance_ratio(raw);
}

SnrResult sampling_snr(const std::vector<SampleScore>& scores) {
    // condition -> problem -> sample values
    std::map<std::string, std::map<std::string, std::vector<double>>> cells;
    for (const auto& s : scores) cells[s.condition][s.problem_id].push_back(s.value);

    bool repeated = false;
    std::vector<double> means;
    std::vector<double> stds;
    for (const auto& [condition, problems] : cells) {
        double sum = 0.0;
        std::size_t count = 0;
        double std_sum = 0.0;
        std::size_t std_count = 0;
        for (const auto& [problem, values] : problems) {
            for (double v : values) sum += v;
            count += values.size();
            if (values.size() < 2) continue;
            repeated = true;
            const double m = mean_of(values);
            double ss = 0.0;
            for (double v : values) ss += (v - m) * (v - m);
            std_sum += std::sqrt(ss / static_cast<double>(values.size() - 1));
            ++std_count;
        }
        means.push_back(sum / static_cast<double>(count));
        if (std_count > 0) stds.push_back(std_sum / static_cast<double>(std_count));
    }
    if (!repeated) throw ValidationError("samples", "sampling SNR needs at least 2 samples for some condition");

    SnrResult r;
    r.conditions = means.size();
    const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
    r.between_range = *hi - *lo;
    r.within_std = mean_of(stds);
    if (r.within_std > 0.0) r.snr = r.between_range / r.within_std;
    return r;
}

VarianceComponents variance_components(const std::vector<FactorScore>& scores) {
    std::set<std::string> models;
    std::set<std::string> conditions;
    // (problem, model, condition) -> (sum, count)
    std::map<std::string, std::map<std::pair<std::string, std::string>, std::pair<double, std::size_t>>> cells;
    for (const auto& s : scores) {
        models.insert(s.model);
        conditions.insert(s.condition);
        auto& c = cells[s.problem_id][{s.model, s.condition}];
        c.first += s.value;
        ++c.second;
    }
    if (models.size() < 2 || conditions.size() < 2)
        throw ValidationError("scores", "variance components need at least 2 models and 2 conditions");

    VarianceComponents out;
    const std::size_t cells_per_problem = models.size() * conditions.size();
    struct Obs {
        std::string model;
        std::string condition;
        double y;
    };
    std::vector<Obs> obs;
    for (const auto& [problem, by_cell] : cells) {
        if (by_cell.size() != cells_per_problem) {
            ++out.problems_dropped;
            continue;
        }
        ++out.problems_used;
        for (const auto& [key, acc] : by_cell) obs.push_back({key.first, key.second, acc.first / static_cast<double>(acc.second)});
    }
    if (obs.empty()) throw ValidationError("scores", "no problem has scores for every model and condition");

    double grand = 0.0;
    std::map<std::string, std::pair<double, std::size_t>> model_acc;
    std::map<std::string, std::pair<double, std::size_t>> cond_acc;
    for (const auto& o : obs) {
        grand += o.y;
        model_acc[o.model].first += o.y;
        ++model_acc[o.model].second;
        cond_acc[o.condition].first += o.y;
        ++cond_acc[o.condition].second;
    }
    grand /= static_cast<double>(obs.size());

    double ss_total = 0.0;
    double ss_model = 0.0;
    double ss_cond = 0.0;
    for (const auto& o : obs) {
        const double mm = model_acc[o.model].first / static_cast<double>(model_acc[o.model].second);
        const double cm = cond_acc[o.condition].first / static_cast<double>(cond_acc[o.condition].second);
        ss_total += (o.y - grand) * (o.y - grand);
        ss_model += (mm - grand) * (mm - grand);
        ss_cond += (cm - grand) * (cm - grand);
    }
    out.ss_total = ss_total;
    if (ss_total <= 1e-15 * static_cast<double>(obs.size())) {
        out.zero_total = true;
        return out;
    }
    out.model_share = ss_model / ss_total;
    out.condition_share = ss_cond / ss_total;
    out.residual_share = std::max(0.0, 1.0 - out.model_share - out.condition_share);
    return out;
}

void AnalysisResult::check() const {
    const double slack = 1e-12 * std::max(1.0, std::abs(delta));
    if (ci.lo > delta + slack || ci.hi < delta - slack)
        throw Error("contrast '" + contrast + "': bootstrap interval does not contain delta");
}

AnalysisResult analyze_contrast(const std::string& contrast, const PairedSample& pairs, std::size_t resamples,
                                double ci_level, std::uint64_t seed) {
    const auto diffs = pairs.differences();
    const auto perm = paired_permutation(diffs, resamples, derive_seed(seed, "permutation"));
    AnalysisResult r;
    r.contrast = contrast;
    r.delta = perm.delta;
    r.p_value = perm.p_value;
    r.ci = bootstrap_ci(diffs, resamples, ci_level, derive_seed(seed, "bootstrap"));
    r.n = perm.n;
    r.dropped = pairs.dropped;
    r.seed = seed;
    r.method = std::string(permutation_method_name(perm.method));
    r.resamples = resamples;
    r.ci_level = ci_level;
    return r;
}

namespace {
nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }
}  // namespace

void to_json(nlohmann::json& j, const AnalysisResult& r) {
    j = nlohmann::json{{"kind", "contrast"},
                       {"contrast", r.contrast},
                       {"metric", r.metric},
                       {"model", r.model},
                       {"condition_a", r.condition_a},
                       {"condition_b", r.condition_b},
                       {"delta", r.delta},
                       {"p_value", r.p_value},
                       {"p_adjusted", optional_json(r.p_adjusted)},
                       {"ci_lo", r.ci.lo},
                       {"ci_hi", r.ci.hi},
                       {"n", r.n},
                       {"dropped", r.dropped},
                       {"seed", r.seed},
                       {"method", r.method},
                       {"resamples", r.resamples},
                       {"ci_level", r.ci_level},
                       {"correction", r.correction}};
}

void from_json(const nlohmann::json& j, AnalysisResult& r) {
    r.contrast = j.at("contrast").get<std::string>();
    r.metric = j.at("metric").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.condition_a = j.at("condition_a").get<std::string>();
    r.condition_b = j.at("condition_b").get<std::string>();
    r.delta = j.at("delta").get<double>();
    r.p_value = j.at("p_value").get<double>();
    r.p_adjusted = j.at("p_adjusted").is_null() ? std::nullopt : std::optional<double>(j.at("p_adjusted").get<double>());
    r.ci = {j.at("ci_lo").get<double>(), j.at("ci_hi").get<double>()};
    r.n = j.at("n").get<std::size_t>();
    r.dropped = j.at("dropped").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.method = j.at("method").get<std::string>();
    r.resamples = j.at("resamples").get<std::size_t>();
    r.ci_level = j.at("ci_level").get<double>();
    r.correction = j.at("correction").get<std::string>();
}

void to_json(nlohmann::json& j, const SnrResult& r) {
    j = nlohmann::json{{"between_range", r.between_range},
                       {"within_std", r.within_std},
                       {"snr", optional_json(r.snr)},
                       {"snr_infinite", !r.snr.has_value()},
                       {"conditions", r.conditions}};
}

void to_json(nlohmann::json& j, const VarianceComponents& v) {
    j = nlohmann::json{{"model_share", v.model_share},
                       {"condition_share", v.condition_share},
                       {"residual_share", v.residual_share},
                       {"ss_total", v.ss_total},
                       {"zero_total", v.zero_total},
                       {"problems_used", v.problems_used},
                       {"problems_dropped", v.problems_dropped}};
}

}  // namespace kgprobe
