#include "kgprobe/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "kgprobe/errors.hpp"
#include "kgprobe/io.hpp"

namespace kgprobe {

std::optional<EmitFormat> parse_format(std::string_view name) noexcept {
    if (name == "markdown" || name == "md") return EmitFormat::markdown;
    if (name == "csv") return EmitFormat::csv;
    return std::nullopt;
}

std::string format_number(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (std::isnan(value)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", value);
    std::string s(buf);
    return s == "-0.0000" ? "0.0000" : s;
}

std::string to_markdown(const Table& table) {
    std::string out;
    if (!table.title.empty()) out += "### " + table.title + "\n\n";
    auto row = [&](const std::vector<std::string>& cells) {
        out += "|";
        for (const auto& c : cells) out += " " + c + " |";
        out += "\n";
    };
    row(table.columns);
    out += "|";
    for (std::size_t i = 0; i < table.columns.size(); ++i) out += " --- |";
    out += "\n";
    for (const auto& r : table.rows) row(r);
    return out;
}

namespace {

std::string csv_cell(const std::string& cell) {
    if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string to_csv(const Table& table) {
    std::string out;
    auto row = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ",";
            out += csv_cell(cells[i]);
        }
        out += "\n";
    };
    row(table.columns);
    for (const auto& r : table.rows) row(r);
    return out;
}

Table parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string cell;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
            continue;
        }
        any = true;
        if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            record.push_back(std::move(cell));
            cell.clear();
        } else if (c == '\n') {
            record.push_back(std::move(cell));
            cell.clear();
            records.push_back(std::move(record));
            record.clear();
            any = false;
        } else if (c != '\r') {
            cell += c;
        }
    }
    if (quoted) throw ValidationError("csv", "unterminated quoted cell");
    if (any) {
        record.push_back(std::move(cell));
        records.push_back(std::move(record));
    }
    Table t;
    if (records.empty()) return t;
    t.columns = std::move(records.front());
    t.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
    return t;
}

std::string emit(const Table& table, EmitFormat format, const std::string& path) {
    write_file(path, format == EmitFormat::markdown ? to_markdown(table) : to_csv(table));
    return path;
}

std::optional<double> score_column(const ScoreRecord& r, std::string_view column) {
    if (column == "trr") return r.trr;
    if (column == "rfs") return r.rfs;
    if (column == "ktc") return r.ktc;
    if (column == "trr_ref") return r.trr_ref;
    if (column == "rfs_ref") return r.rfs_ref;
    if (column == "ktc_ref") return r.ktc_ref;
    if (column == "mech_int_coverage") return r.mech_int_coverage;
    if (column == "d_sem_to_full") return r.d_sem_to_full;
    throw ValidationError("column", "unknown score column '" + std::string(column) + "'");
}

std::map<std::string, double> problem_means(const std::vector<ScoreRecord>& scores, std::string_view model,
                                            std::string_view condition, std::string_view column) {
    std::map<std::string, std::pair<double, std::size_t>> acc;
    for (const auto& s : scores) {
        if (s.model_name != model || s.condition != condition) continue;
        const auto v = score_column(s, column);
        if (!v) continue;
        auto& a = acc[s.problem_id];
        a.first += *v;
        ++a.second;
    }
    std::map<std::string, double> out;
    for (const auto& [id, a] : acc) out[id] = a.first / static_cast<double>(a.second);
    return out;
}

std::vector<std::string> models_in(const std::vector<ScoreRecord>& scores) {
    std::set<std::string> models;
    for (const auto& s : scores) models.insert(s.model_name);
    return {models.begin(), models.end()};
}

namespace {

double mean_values(const std::map<std::string, double>& m) {
    double s = 0.0;
    for (const auto& [id, v] : m) s += v;
    return s / static_cast<double>(m.size());
}

std::map<std::string, double> require_means(const std::vector<ScoreRecord>& scores, const std::string& model,
                                             const std::string& condition, std::string_view column) {
    auto m = problem_means(scores, model, condition, column);
    if (m.empty())
        throw ValidationError("condition", "no scores for condition '" + condition + "' and model '" + model + "'");
    return m;
}

}  // namespace

SummaryTable aggregate_summary(const std::vector<ScoreRecord>& scores, const ExperimentConfig& config,
                               const std::map<std::string, double>& variance_ratios) {
    SummaryTable table;
    for (const auto& c : config.contrasts) table.contrast_names.push_back(c.name);
    for (const auto& [name, tags] : config.best_groups) table.group_names.push_back(name);

    for (const auto& model : models_in(scores)) {
        SummaryRow row;
        row.model = model;
        for (const auto& c : config.contrasts) {
            const auto column = std::string(metric_name(c.metric));
            const auto pairs = pair_by_problem(require_means(scores, model, c.a, column),
                                               require_means(scores, model, c.b, column));
            if (pairs.size() == 0)
                throw ValidationError("contrast", "'" + c.name + "' has no paired problems for model '" + model + "'");
            const auto d = pairs.differences();
            double s = 0.0;
            for (double x : d) s += x;
            row.deltas.push_back(s / static_cast<double>(d.size()));
        }
        if (auto it = variance_ratios.find(model); it != variance_ratios.end()) row.variance_ratio = it->second;

        for (const auto& [group, tags] : config.best_groups) {
            std::vector<std::string> sorted = tags;
            std::sort(sorted.begin(), sorted.end());
            BestPick pick;
            pick.group = group;
            bool first = true;
            for (const auto& tag : sorted) {
                const double v = mean_values(require_means(scores, model, tag, config.best_metric));
                if (first || v > pick.value + 1e-12) {
                    pick.condition = tag;
                    pick.value = v;
                    pick.tie = false;
                    first = false;
                } else if (std::abs(v - pick.value) <= 1e-12) {
                    pick.tie = true;
                }
            }
            row.best.push_back(std::move(pick));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

Table SummaryTable::to_table() const {
    Table t;
    t.title = "Model-level summary";
    t.columns.push_back("model");
    for (const auto& c : contrast_names) t.columns.push_back(c);
    t.columns.push_back("variance_ratio");
    for (const auto& g : group_names) t.columns.push_back("best_" + g);
    for (const auto& r : rows) {
        std::vector<std::string> cells{r.model};
        for (double d : r.deltas) cells.push_back(format_number(d));
        cells.push_back(r.variance_ratio ? format_number(*r.variance_ratio) : "");
        for (const auto& b : r.best) cells.push_back(b.condition + (b.tie ? " (tie)" : ""));
        t.rows.push_back(std::move(cells));
    }
    return t;
}

namespace {

struct PointStats {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

std::optional<PointStats> curve_point(const std::vector<ScoreRecord>& scores, const std::string& model,
                                      const std::string& condition) {
    const auto m = problem_means(scores, model, condition, "d_sem_to_full");
    if (m.empty()) return std::nullopt;
    PointStats p;
    p.n = m.size();
    p.mean = mean_values(m);
    if (p.n > 1) {
        double ss = 0.0;
        for (const auto& [id, v] : m) ss += (v - p.mean) * (v - p.mean);
        p.stderr_ = std::sqrt(ss / static_cast<double>(p.n - 1)) / std::sqrt(static_cast<double>(p.n));
    }
    return p;
}

}  // namespace

std::vector<CurveSeries> sufficiency_curves(const std::vector<ScoreRecord>& scores, const SufficiencySpec& spec) {
    std::vector<CurveSeries> out;
    for (const auto& model : models_in(scores)) {
        for (auto sel : spec.selectors) {
            for (const std::string series : {"keep", "remove"}) {
                CurveSeries c;
                c.model = model;
                c.selector = std::string(selector_name(sel));
                c.series = series;
                std::vector<std::size_t> ks = spec.ks;
                if (series == "keep") ks.push_back(spec.full_k);
                for (auto k : ks) {
                    const auto tag = series == "keep" ? spec.keep_tag(sel, k) : spec.remove_tag(sel, k);
                    auto p = curve_point(scores, model, tag);
                    if (!p) {
                        c.gaps.push_back(k);
                        continue;
                    }
                    c.x.push_back(static_cast<double>(k));
                    c.y.push_back(p->mean);
                    c.stderr_.push_back(p->stderr_);
                    c.n.push_back(p->n);
                }
                out.push_back(std::move(c));
            }
        }
    }
    return out;
}

Table curves_table(const std::vector<CurveSeries>& curves) {
    Table t;
    t.title = "Sufficiency and comprehensiveness curves";
    t.columns = {"model", "selector", "series", "k", "mean_d_sem", "stderr", "n", "gap"};
    for (const auto& c : curves) {
        // Emit points and gaps together in k order.
        std::map<std::size_t, std::vector<std::string>> by_k;
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            const auto k = static_cast<std::size_t>(c.x[i]);
            by_k[k] = {c.model, c.selector, c.series, std::to_string(k), format_number(c.y[i]),
                       format_number(c.stderr_[i]), std::to_string(c.n[i]), "no"};
        }
        for (auto k : c.gaps) by_k[k] = {c.model, c.selector, c.series, std::to_string(k), "", "", "0", "yes"};
        for (auto& [k, row] : by_k) t.rows.push_back(std::move(row));
    }
    return t;
}

Table contrasts_table(const std::vector<AnalysisResult>& results) {
    Table t;
    t.title = "Condition contrasts";
    t.columns = {"model", "contrast", "metric", "condition_a", "condition_b", "delta", "p_value", "p_adjusted",
                 "correction", "ci_lo", "ci_hi", "n", "method"};
    for (const auto& r : results) {
        t.rows.push_back({r.model, r.contrast, r.metric, r.condition_a, r.condition_b, format_number(r.delta),
                          format_number(r.p_value), r.p_adjusted ? format_number(*r.p_adjusted) : "", r.correction,
                          format_number(r.ci.lo), format_number(r.ci.hi), std::to_string(r.n), r.method});
    }
    return t;
}

void add_reference_rows(Table& summary, const SummaryTable& layout, const nlohmann::json& constants) {
    if (!constants.contains("summary")) return;
    for (const auto& ref : constants.at("summary")) {
        std::vector<std::string> cells{"reference: " + ref.at("model").get<std::string>()};
        auto number_or_blank = [&](const std::string& key) {
            return ref.contains(key) && ref.at(key).is_number() ? format_number(ref.at(key).get<double>()) : "";
        };
        for (const auto& c : layout.contrast_names) cells.push_back(number_or_blank(c));
        cells.push_back(number_or_blank("variance_ratio"));
        for (const auto& g : layout.group_names) {
            const auto key = "best_" + g;
            cells.push_back(ref.contains(key) ? ref.at(key).get<std::string>() : "");
        }
        summary.rows.push_back(std::move(cells));
    }
}

Table reference_curves_table(const nlohmann::json& constants) {
    Table t;
    t.title = "Reference curves";
    t.columns = {"model", "selector", "series", "k", "mean_d_sem"};
    if (!constants.contains("curves")) return t;
    for (const auto& c : constants.at("curves")) {
        const auto& x = c.at("x");
        const auto& y = c.at("y");
        if (x.size() != y.size()) throw ValidationError("curves", "x and y lengths differ");
        for (std::size_t i = 0; i < x.size(); ++i) {
            t.rows.push_back({"reference: " + c.at("model").get<std::string>(), c.at("selector").get<std::string>(),
                              c.value("series", std::string("keep")), std::to_string(x[i].get<long long>()),
                              format_number(y[i].get<double>())});
        }
    }
    return t;
}

}  // namespace kgprobe
