// Command-line surface binding panels, configs, models and reports into
// runnable pipelines. Exit codes: 0 success, 1 fatal error, 2 completed
// with model-step failures (reports are still written).

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "esalloc/core.hpp"
#include "esalloc/harness.hpp"
#include "esalloc/murphy.hpp"

namespace {

using namespace esalloc;

struct CommonArgs {
    std::string config_path;
    std::string panel_path;
    std::string truth_path;
    std::string out_dir = ".";
    std::vector<std::string> forecast_paths;
    std::optional<double> alpha;
    std::optional<std::uint64_t> seed;
    std::optional<double> level;
    std::optional<double> epsilon;
    std::string benchmark;
    std::string models_csv;
};

RunConfig effective_config(const CommonArgs& args) {
    RunConfig cfg;
    if (!args.config_path.empty()) cfg = load_run_config(args.config_path);
    if (args.alpha) cfg.alpha = *args.alpha;
    if (args.seed) cfg.seed = *args.seed;
    if (args.level) cfg.level = *args.level;
    if (args.epsilon) cfg.epsilon = *args.epsilon;
    if (!args.benchmark.empty()) cfg.benchmark = args.benchmark;
    if (!args.models_csv.empty()) {
        cfg.models.clear();
        std::string cur;
        for (char c : args.models_csv + ",") {
            if (c == ',') {
                if (!cur.empty()) cfg.models.push_back(ModelConfig{cur});
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
    }
    cfg.validate();
    return cfg;
}

void add_common_overrides(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config_path, "JSON run config path");
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--alpha", args.alpha, "override config key 'alpha'");
    sub->add_option("--seed", args.seed, "override config key 'seed'");
    sub->add_option("--level", args.level, "override config key 'level'");
    sub->add_option("--epsilon", args.epsilon, "override config key 'epsilon'");
    sub->add_option("--benchmark", args.benchmark,
                    "override config key 'benchmark'");
    sub->add_option("--models", args.models_csv,
                    "override config key 'models' (comma-separated names)");
}

int run_simulate(const CommonArgs& args) {
    const RunConfig cfg = effective_config(args);
    const SynthTruth truth = make_synth(cfg.sim, cfg.alpha, cfg.seed, cfg.epsilon);
    std::filesystem::create_directories(args.out_dir);
    write_panel_csv(args.out_dir + "/panel.csv", truth.panel);
    write_truth_csv(args.out_dir + "/truth.csv", truth);
    std::cout << "wrote " << args.out_dir << "/panel.csv and truth.csv ("
              << truth.panel.rows() << " rows, d=" << truth.panel.cols() << ")\n";
    return 0;
}

std::optional<SynthTruth> maybe_truth(const CommonArgs& args,
                                      const LossPanel& panel) {
    if (args.truth_path.empty()) return std::nullopt;
    return load_truth_csv(args.truth_path, panel);
}

int run_forecast(const CommonArgs& args) {
    const RunConfig cfg = effective_config(args);
    const LossPanel panel = load_panel_csv(args.panel_path);
    const auto truth = maybe_truth(args, panel);
    const RollResult roll =
        rolling_run(cfg, panel, truth ? &*truth : nullptr);
    std::filesystem::create_directories(args.out_dir);
    write_forecast_csv(args.out_dir + "/forecasts.csv", to_forecast_table(roll));
    for (const auto& f : roll.failures) std::cerr << "warning: " << f << '\n';
    std::cout << "wrote " << args.out_dir << "/forecasts.csv\n";
    return roll.failures.empty() ? 0 : 2;
}

int run_backtest(const CommonArgs& args) {
    const RunConfig cfg = effective_config(args);
    const LossPanel panel = load_panel_csv(args.panel_path);
    const auto truth = maybe_truth(args, panel);
    const RollResult roll = rolling_run(cfg, panel, truth ? &*truth : nullptr);
    const LossPanel oos = panel.slice(cfg.n, cfg.T_out);
    const BacktestReport report = assemble_report(roll, oos, cfg);
    write_report(report, cfg, args.out_dir);
    for (const auto& f : roll.failures) std::cerr << "warning: " << f << '\n';
    std::cout << "report written to " << args.out_dir << '\n';
    return roll.failures.empty() ? 0 : 2;
}

// Rows of the panel matching the forecast times, in order.
LossPanel panel_for_times(const LossPanel& panel,
                          const std::vector<std::int64_t>& times) {
    std::map<std::int64_t, std::size_t> row_of;
    for (std::size_t t = 0; t < panel.rows(); ++t)
        row_of[panel.times()[t]] = t;
    std::vector<double> values;
    std::vector<std::int64_t> ts;
    for (std::int64_t t : times) {
        const auto it = row_of.find(t);
        if (it == row_of.end())
            throw std::runtime_error("forecast time " + std::to_string(t) +
                                     " is not present in the panel");
        ts.push_back(t);
        const auto row = panel.row(it->second);
        values.insert(values.end(), row.begin(), row.end());
    }
    return LossPanel(std::move(values), std::move(ts), panel.names());
}

RollResult roll_from_tables(const CommonArgs& args, const RunConfig& cfg,
                            const LossPanel& panel, LossPanel* oos_out) {
    if (args.forecast_paths.empty())
        throw std::runtime_error("no forecast files given (--forecasts)");
    RollResult roll;
    bool first = true;
    for (const auto& path : args.forecast_paths) {
        const ForecastTable table = load_forecast_csv(path, cfg.alpha);
        if (first) {
            roll.times = table.times;
            first = false;
        } else if (table.times != roll.times) {
            throw std::runtime_error(path + ": time range differs from the first file");
        }
        for (const auto& [name, recs] : table.models) {
            roll.model_names.push_back(name);
            std::vector<std::optional<ForecastRecord>> opt(recs.begin(), recs.end());
            roll.forecasts.push_back(std::move(opt));
        }
    }
    *oos_out = panel_for_times(panel, roll.times);
    return roll;
}

int run_murphy(const CommonArgs& args) {
    const RunConfig cfg = effective_config(args);
    const LossPanel panel = load_panel_csv(args.panel_path);
    LossPanel oos = panel;
    const RollResult roll = roll_from_tables(args, cfg, panel, &oos);

    std::filesystem::create_directories(args.out_dir);
    const std::size_t d = oos.cols();
    std::vector<std::string> targets = {"var", "esc_tuple"};
    for (std::size_t j = 1; j <= d; ++j) targets.push_back("esc_" + std::to_string(j));

    for (const auto& target : targets) {
        std::vector<MurphyCurve> curves;
        for (std::size_t m = 0; m < roll.model_names.size(); ++m) {
            std::vector<ForecastRecord> recs;
            recs.reserve(roll.times.size());
            for (const auto& r : roll.forecasts[m]) recs.push_back(*r);
            if (target == "var")
                curves.push_back(murphy_curve_var(recs, oos, roll.model_names[m]));
            else if (target == "esc_tuple")
                curves.push_back(murphy_curve_tuple(recs, oos, roll.model_names[m]));
            else {
                const std::size_t j =
                    static_cast<std::size_t>(std::stoul(target.substr(4))) - 1;
                curves.push_back(murphy_curve_esc(recs, oos, j, roll.model_names[m]));
            }
        }
        write_murphy_csv(args.out_dir + "/murphy_" + target + ".csv", curves);
    }
    std::cout << "murphy curves written to " << args.out_dir << '\n';
    return 0;
}

int run_report(const CommonArgs& args) {
    RunConfig cfg = effective_config(args);
    const LossPanel panel = load_panel_csv(args.panel_path);
    LossPanel oos = panel;
    const RollResult roll = roll_from_tables(args, cfg, panel, &oos);
    const BacktestReport report = assemble_report(roll, oos, cfg);
    write_report(report, cfg, args.out_dir);
    std::cout << "report written to " << args.out_dir << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forecasting and backtesting of expected-shortfall allocations"};
    app.require_subcommand(1);

    CommonArgs args;

    CLI::App* simulate = app.add_subcommand(
        "simulate",
        "Generate a synthetic loss panel and its analytic truth.\n"
        "Config keys honored: alpha, seed, epsilon, sim.kind, sim.d, sim.T,\n"
        "sim.rho, sim.garch{omega,a,b}, sim.names, sim.noise_scale,\n"
        "sim.phi_diag, sim.tau_scale, sim.psi_scale");
    add_common_overrides(simulate, args);

    CLI::App* forecast = app.add_subcommand(
        "forecast",
        "Run the rolling forecast and export the forecast series.\n"
        "Config keys honored: alpha, n, T_out, models (with per-model\n"
        "refit_stride, ewma_lambda, ewma_floor, first_stage, estimate_w1),\n"
        "seed, epsilon");
    add_common_overrides(forecast, args);
    forecast->add_option("--panel", args.panel_path, "loss panel CSV")->required();
    forecast->add_option("--truth", args.truth_path,
                         "truth CSV (enables the 'truth' model)");

    CLI::App* backtest = app.add_subcommand(
        "backtest",
        "Rolling forecasts plus the full comparative/calibration report.\n"
        "Config keys honored: alpha, n, T_out, models (with per-model\n"
        "refit_stride, ewma_lambda, ewma_floor, first_stage, estimate_w1),\n"
        "seed, epsilon, level, benchmark");
    add_common_overrides(backtest, args);
    backtest->add_option("--panel", args.panel_path, "loss panel CSV")->required();
    backtest->add_option("--truth", args.truth_path,
                         "truth CSV (enables the 'truth' model)");

    CLI::App* murphy = app.add_subcommand(
        "murphy",
        "Murphy diagram curves for stored forecast series.\n"
        "Config keys honored: alpha");
    add_common_overrides(murphy, args);
    murphy->add_option("--panel", args.panel_path, "loss panel CSV")->required();
    murphy->add_option("--forecasts", args.forecast_paths, "forecast CSV file(s)")
        ->required();

    CLI::App* report = app.add_subcommand(
        "report",
        "Assemble the backtest report from stored forecast series.\n"
        "Config keys honored: alpha, level, benchmark");
    add_common_overrides(report, args);
    report->add_option("--panel", args.panel_path, "loss panel CSV")->required();
    report->add_option("--forecasts", args.forecast_paths, "forecast CSV file(s)")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return run_simulate(args);
        if (forecast->parsed()) return run_forecast(args);
        if (backtest->parsed()) return run_backtest(args);
        if (murphy->parsed()) return run_murphy(args);
        if (report->parsed()) return run_report(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
