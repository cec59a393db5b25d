#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "esalloc/harness.hpp"
#include "esalloc/identification.hpp"
#include "esalloc/scoring.hpp"
#include "esalloc/simd.hpp"

namespace esalloc {

namespace {

using nlohmann::ordered_json;

LossPanel subset_panel(const LossPanel& panel, const std::vector<std::size_t>& idx) {
    const std::size_t d = panel.cols();
    std::vector<double> values;
    values.reserve(idx.size() * d);
    std::vector<std::int64_t> times;
    times.reserve(idx.size());
    for (std::size_t i : idx) {
        times.push_back(panel.times()[i]);
        for (std::size_t j = 0; j < d; ++j) values.push_back(panel.at(i, j));
    }
    return LossPanel(std::move(values), std::move(times), panel.names());
}

std::vector<ForecastRecord> subset_records(
    const std::vector<std::optional<ForecastRecord>>& recs,
    const std::vector<std::size_t>& idx) {
    std::vector<ForecastRecord> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(*recs[i]);
    return out;
}

std::vector<std::size_t> complete_indices(
    const std::vector<std::optional<ForecastRecord>>& recs) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < recs.size(); ++i)
        if (recs[i].has_value()) idx.push_back(i);
    return idx;
}

std::vector<std::size_t> intersect(const std::vector<std::size_t>& a,
                                   const std::vector<std::size_t>& b) {
    std::vector<std::size_t> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(out));
    return out;
}

double mean_of(std::span<const double> x) {
    return kernels::active().sum_comp(x.data(), x.size()) /
           static_cast<double>(x.size());
}

// Mid-rank assignment over (value, row index) with exact ties averaged.
void assign_ranks(std::vector<ScoreRow*>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const ScoreRow* a, const ScoreRow* b) {
        return a->avg_score < b->avg_score;
    });
    std::size_t i = 0;
    while (i < rows.size()) {
        std::size_t j = i;
        while (j + 1 < rows.size() &&
               rows[j + 1]->avg_score == rows[i]->avg_score)
            ++j;
        const double rank = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (std::size_t k = i; k <= j; ++k) rows[k]->rank = rank;
        i = j + 1;
    }
}

std::string join_flags(const std::vector<std::string>& flags) {
    std::string out;
    for (const auto& f : flags) {
        if (!out.empty()) out += ';';
        out += f;
    }
    return out;
}

TestRow insufficient_row(std::string kind, std::string target, std::string model,
                         std::string benchmark, std::size_t n_used) {
    TestRow row;
    row.kind = std::move(kind);
    row.target = std::move(target);
    row.model = std::move(model);
    row.benchmark = std::move(benchmark);
    row.n_used = n_used;
    row.result.degenerate = true;
    row.result.zone = Zone::none;
    row.result.n = n_used;
    row.result.flags.push_back("insufficient_observations");
    return row;
}

} // namespace

BacktestReport assemble_report(const RollResult& roll, const LossPanel& oos,
                               const RunConfig& config) {
    if (roll.model_names.empty())
        throw std::runtime_error("assemble_report: empty roll result");
    if (oos.rows() != roll.times.size() || oos.times() != roll.times)
        throw std::runtime_error(
            "assemble_report: panel rows do not match the forecast period");
    const auto bench_it = std::find(roll.model_names.begin(),
                                    roll.model_names.end(), config.benchmark);
    if (bench_it == roll.model_names.end())
        throw std::runtime_error("assemble_report: benchmark model '" +
                                 config.benchmark + "' is not in the run");
    const std::size_t bench = static_cast<std::size_t>(bench_it - roll.model_names.begin());

    const std::size_t d = oos.cols();
    const std::size_t n_models = roll.model_names.size();

    std::vector<std::vector<std::size_t>> complete(n_models);
    for (std::size_t m = 0; m < n_models; ++m)
        complete[m] = complete_indices(roll.forecasts[m]);

    BacktestReport report;
    report.failures = roll.failures;
    for (std::size_t m = 0; m < n_models; ++m)
        report.missing_total += roll.times.size() - complete[m].size();

    std::vector<std::string> targets = {"var", "esc_tuple"};
    for (std::size_t j = 1; j <= d; ++j) targets.push_back("esc_" + std::to_string(j));

    // ----- average scores and ranks -----
    for (std::size_t m = 0; m < n_models; ++m) {
        if (complete[m].empty()) continue;
        const LossPanel sub = subset_panel(oos, complete[m]);
        const auto recs = subset_records(roll.forecasts[m], complete[m]);
        const double var_mean = mean_of(score_var_series(recs, sub));
        const double tuple_mean = mean_of(score_esc_tuple_series(recs, sub));
        report.avg_scores.push_back(
            {"var", roll.model_names[m], complete[m].size(), var_mean, var_mean, 0.0});
        report.avg_scores.push_back({"esc_tuple", roll.model_names[m],
                                     complete[m].size(), var_mean, tuple_mean, 0.0});
        for (std::size_t j = 0; j < d; ++j) {
            const double comp_mean =
                mean_of(score_esc_component_series(recs, sub, j));
            report.avg_scores.push_back({"esc_" + std::to_string(j + 1),
                                         roll.model_names[m], complete[m].size(),
                                         var_mean, comp_mean, 0.0});
        }
    }
    for (const auto& target : targets) {
        std::vector<ScoreRow*> rows;
        for (auto& row : report.avg_scores)
            if (row.target == target) rows.push_back(&row);
        assign_ranks(rows);
    }

    // ----- comparative DM tests against the benchmark -----
    for (std::size_t m = 0; m < n_models; ++m) {
        if (m == bench) continue;
        const auto paired = intersect(complete[m], complete[bench]);
        const std::string& name = roll.model_names[m];
        if (paired.size() < 10) {
            for (const auto& target : targets)
                report.dm_rows.push_back(insufficient_row(
                    "dm", target, name, config.benchmark, paired.size()));
            continue;
        }
        const LossPanel sub = subset_panel(oos, paired);
        const auto recs_m = subset_records(roll.forecasts[m], paired);
        const auto recs_b = subset_records(roll.forecasts[bench], paired);

        auto add_dm = [&](const std::string& target, std::vector<double> a,
                          std::vector<double> b) {
            std::vector<double> diff(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
            TestRow row;
            row.kind = "dm";
            row.target = target;
            row.model = name;
            row.benchmark = config.benchmark;
            row.n_used = diff.size();
            row.mean_value = mean_of(diff);
            row.result = dm_test(diff, config.level);
            report.dm_rows.push_back(std::move(row));
        };
        add_dm("var", score_var_series(recs_m, sub), score_var_series(recs_b, sub));
        add_dm("esc_tuple", score_esc_tuple_series(recs_m, sub),
               score_esc_tuple_series(recs_b, sub));
        for (std::size_t j = 0; j < d; ++j)
            add_dm("esc_" + std::to_string(j + 1),
                   score_esc_component_series(recs_m, sub, j),
                   score_esc_component_series(recs_b, sub, j));

        // Comparative one-step Wald tests on (VaR score diff, ESC score diff).
        auto add_wald_cmp = [&](const std::string& target,
                                const std::vector<double>& var_diff,
                                const std::vector<double>& esc_diff) {
            if (var_diff.size() < 20) {
                report.wald_rows.push_back(
                    insufficient_row("wald_comparative", target, name,
                                     config.benchmark, var_diff.size()));
                return;
            }
            Matrix mtx(var_diff.size(), 2);
            for (std::size_t t = 0; t < var_diff.size(); ++t) {
                mtx(t, 0) = var_diff[t];
                mtx(t, 1) = esc_diff[t];
            }
            TestRow row;
            row.kind = "wald_comparative";
            row.target = target;
            row.model = name;
            row.benchmark = config.benchmark;
            row.n_used = var_diff.size();
            row.mean_value = mean_of(esc_diff);
            row.result = wald_joint(mtx, config.level, WaldMode::two_sided);
            report.wald_rows.push_back(std::move(row));
        };
        {
            auto va = score_var_series(recs_m, sub);
            auto vb = score_var_series(recs_b, sub);
            std::vector<double> var_diff(va.size());
            for (std::size_t t = 0; t < va.size(); ++t) var_diff[t] = va[t] - vb[t];
            auto ea = score_esc_tuple_series(recs_m, sub);
            auto eb = score_esc_tuple_series(recs_b, sub);
            std::vector<double> esc_diff(ea.size());
            for (std::size_t t = 0; t < ea.size(); ++t) esc_diff[t] = ea[t] - eb[t];
            add_wald_cmp("esc_tuple", var_diff, esc_diff);
            for (std::size_t j = 0; j < d; ++j) {
                auto ca = score_esc_component_series(recs_m, sub, j);
                auto cb = score_esc_component_series(recs_b, sub, j);
                std::vector<double> cd(ca.size());
                for (std::size_t t = 0; t < ca.size(); ++t) cd[t] = ca[t] - cb[t];
                add_wald_cmp("esc_" + std::to_string(j + 1), var_diff, cd);
            }
        }
    }

    // ----- calibration tests and calibration Wald tests -----
    for (std::size_t m = 0; m < n_models; ++m) {
        const std::string& name = roll.model_names[m];
        if (complete[m].size() < 10) {
            report.calibration_rows.push_back(
                insufficient_row("calibration", "var", name, "", complete[m].size()));
            continue;
        }
        const LossPanel sub = subset_panel(oos, complete[m]);
        const auto recs = subset_records(roll.forecasts[m], complete[m]);

        auto add_calib = [&](const std::string& target, const IdentSeries& series) {
            std::vector<double> col(series.values.rows());
            for (std::size_t t = 0; t < col.size(); ++t) col[t] = series.values(t, 0);
            TestRow row;
            row.kind = "calibration";
            row.target = target;
            row.model = name;
            row.n_used = col.size();
            row.mean_value = mean_of(col);
            row.result = calibration_test(col, config.level);
            report.calibration_rows.push_back(std::move(row));
        };
        add_calib("var", ident_series(recs, sub, IdentKind::var));
        add_calib("es", ident_series(recs, sub, IdentKind::es));
        for (std::size_t j = 0; j < d; ++j)
            add_calib("esc_" + std::to_string(j + 1),
                      ident_series(recs, sub, IdentKind::esc, j));

        // Joint calibration Walds: (V_var, V_es), (V_var, V_esc_1..d),
        // (V_var, V_esc_j).
        const IdentSeries var_s = ident_series(recs, sub, IdentKind::var);
        const IdentSeries es_s = ident_series(recs, sub, IdentKind::es);
        const IdentSeries tup = ident_series(recs, sub, IdentKind::tuple);
        const std::size_t T = var_s.values.rows();

        auto add_wald = [&](const std::string& target, const Matrix& mtx,
                            double mean_secondary) {
            if (mtx.rows() < 10 * mtx.cols()) {
                report.wald_rows.push_back(insufficient_row(
                    "wald_calibration", target, name, "", mtx.rows()));
                return;
            }
            TestRow row;
            row.kind = "wald_calibration";
            row.target = target;
            row.model = name;
            row.n_used = mtx.rows();
            row.mean_value = mean_secondary;
            row.result = wald_joint(mtx, config.level, WaldMode::two_sided);
            report.wald_rows.push_back(std::move(row));
        };

        {
            Matrix mtx(T, 2);
            std::vector<double> sec(T);
            for (std::size_t t = 0; t < T; ++t) {
                mtx(t, 0) = var_s.values(t, 0);
                mtx(t, 1) = es_s.values(t, 0);
                sec[t] = es_s.values(t, 0);
            }
            add_wald("es", mtx, mean_of(sec));
        }
        add_wald("esc_tuple", tup.values, 0.0);
        for (std::size_t j = 0; j < d; ++j) {
            Matrix mtx(T, 2);
            std::vector<double> sec(T);
            for (std::size_t t = 0; t < T; ++t) {
                mtx(t, 0) = tup.values(t, 0);
                mtx(t, 1) = tup.values(t, j + 1);
                sec[t] = tup.values(t, j + 1);
            }
            add_wald("esc_" + std::to_string(j + 1), mtx, mean_of(sec));
        }
    }

    // ----- Murphy curves on the common period -----
    std::vector<std::size_t> common = complete[0];
    for (std::size_t m = 1; m < n_models; ++m) common = intersect(common, complete[m]);
    if (!common.empty()) {
        const LossPanel sub = subset_panel(oos, common);
        std::vector<std::vector<ForecastRecord>> recs(n_models);
        for (std::size_t m = 0; m < n_models; ++m)
            recs[m] = subset_records(roll.forecasts[m], common);

        const std::size_t per_model = 2 + d;
        for (std::size_t m = 0; m < n_models; ++m) {
            report.murphy_curves.push_back(
                murphy_curve_var(recs[m], sub, roll.model_names[m]));
            report.murphy_curves.push_back(
                murphy_curve_tuple(recs[m], sub, roll.model_names[m]));
            for (std::size_t j = 0; j < d; ++j)
                report.murphy_curves.push_back(
                    murphy_curve_esc(recs[m], sub, j, roll.model_names[m]));
        }

        // Descriptive dominance against the benchmark, per target.
        for (std::size_t m = 0; m < n_models; ++m) {
            if (m == bench) continue;
            for (std::size_t c = 0; c < per_model; ++c) {
                const MurphyCurve& mine = report.murphy_curves[m * per_model + c];
                const MurphyCurve& ref = report.murphy_curves[bench * per_model + c];
                report.murphy_dominance.emplace_back(
                    mine.target, roll.model_names[m], dominance_fraction(mine, ref));
            }
        }

        // VaR forecast equality (exact), the comparability condition for
        // ESC Murphy curves.
        report.var_all_equal = true;
        for (std::size_t m = 0; m < n_models; ++m) {
            if (m == bench) continue;
            bool equal = true;
            for (std::size_t t = 0; t < common.size(); ++t)
                if (recs[m][t].var != recs[bench][t].var) {
                    equal = false;
                    break;
                }
            report.var_equal_vs_benchmark.emplace_back(roll.model_names[m], equal);
            if (!equal) report.var_all_equal = false;
        }
    }

    return report;
}

namespace {

void write_avg_scores(const std::string& path, const BacktestReport& report) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "target,model,n_used,avg_var_score,avg_score,rank\n";
    for (const auto& r : report.avg_scores)
        out << r.target << ',' << r.model << ',' << r.n_used << ','
            << format_double(r.avg_var_score) << ',' << format_double(r.avg_score)
            << ',' << format_double(r.rank) << '\n';
}

void write_test_rows(const std::string& path, const std::vector<TestRow>& rows,
                     bool with_benchmark, const char* mean_name) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "kind,target,model,";
    if (with_benchmark) out << "benchmark,";
    out << "n_used," << mean_name
        << ",statistic,bandwidth,p_equal,p_leq,p_geq,zone,flags\n";
    for (const auto& r : rows) {
        out << r.kind << ',' << r.target << ',' << r.model << ',';
        if (with_benchmark) out << r.benchmark << ',';
        out << r.n_used << ',' << format_double(r.mean_value) << ','
            << format_double(r.result.statistic) << ','
            << format_double(r.result.bandwidth) << ','
            << format_double(r.result.p_equal) << ','
            << format_double(r.result.p_leq) << ','
            << format_double(r.result.p_geq) << ',' << zone_name(r.result.zone)
            << ',' << join_flags(r.result.flags) << '\n';
    }
}

} // namespace

void write_report(const BacktestReport& report, const RunConfig& config,
                  const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const auto path = [&](const std::string& name) { return dir + "/" + name; };

    write_avg_scores(path("avg_scores.csv"), report);
    write_test_rows(path("dm_tests.csv"), report.dm_rows, true, "mean_diff");
    write_test_rows(path("calibration.csv"), report.calibration_rows, false,
                    "mean_ident");
    write_test_rows(path("wald.csv"), report.wald_rows, true, "mean_secondary");

    std::vector<std::string> files = {"avg_scores.csv", "dm_tests.csv",
                                      "calibration.csv", "wald.csv"};

    // Murphy CSVs, one file per target.
    std::vector<std::string> murphy_targets;
    for (const auto& c : report.murphy_curves)
        if (std::find(murphy_targets.begin(), murphy_targets.end(), c.target) ==
            murphy_targets.end())
            murphy_targets.push_back(c.target);
    for (const auto& target : murphy_targets) {
        std::vector<MurphyCurve> curves;
        for (const auto& c : report.murphy_curves)
            if (c.target == target) curves.push_back(c);
        const std::string name = "murphy_" + target + ".csv";
        write_murphy_csv(path(name), curves);
        files.push_back(name);
    }

    ordered_json summary;
    summary["alpha"] = config.alpha;
    summary["n"] = config.n;
    summary["T_out"] = config.T_out;
    summary["seed"] = config.seed;
    summary["epsilon"] = config.epsilon;
    summary["level"] = config.level;
    summary["benchmark"] = config.benchmark;
    {
        std::vector<std::string> names;
        for (const auto& m : config.models) names.push_back(m.name);
        summary["models"] = names;
    }
    summary["kernels"] = std::string(kernels::active_name());
    summary["missing_steps"] = report.missing_total;
    summary["failures"] = report.failures;
    summary["murphy_var_forecasts_all_equal"] = report.var_all_equal;
    {
        ordered_json flags = ordered_json::object();
        for (const auto& [model, eq] : report.var_equal_vs_benchmark)
            flags[model] = eq;
        summary["murphy_var_equal_vs_benchmark"] = flags;
    }
    {
        // fraction of knots at or below the benchmark curve, per target
        ordered_json dom = ordered_json::array();
        for (const auto& [target, model, frac] : report.murphy_dominance) {
            ordered_json row;
            row["target"] = target;
            row["model"] = model;
            row["benchmark"] = config.benchmark;
            row["fraction_at_or_below"] = frac;
            dom.push_back(row);
        }
        summary["murphy_dominance"] = dom;
    }
    files.push_back("summary.json");
    summary["files"] = files;

    std::ofstream out(path("summary.json"), std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write summary.json");
    out << summary.dump(2) << '\n';
}

ForecastTable to_forecast_table(const RollResult& roll) {
    ForecastTable table;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < roll.times.size(); ++i) {
        bool all = true;
        for (const auto& recs : roll.forecasts)
            if (!recs[i].has_value()) {
                all = false;
                break;
            }
        if (all) idx.push_back(i);
    }
    for (std::size_t i : idx) table.times.push_back(roll.times[i]);
    for (std::size_t m = 0; m < roll.model_names.size(); ++m) {
        std::vector<ForecastRecord> recs;
        recs.reserve(idx.size());
        for (std::size_t i : idx) recs.push_back(*roll.forecasts[m][i]);
        table.models.emplace_back(roll.model_names[m], std::move(recs));
    }
    return table;
}

} // namespace esalloc
