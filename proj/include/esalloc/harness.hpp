// Rolling-window forecast driver, synthetic data generation with analytic
// truth, and report assembly/serialization.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "esalloc/core.hpp"
#include "esalloc/murphy.hpp"
#include "esalloc/stattests.hpp"

namespace esalloc {

struct SimGarch {
    double omega = 0.05;
    double a = 0.08;
    double b = 0.90;
};

struct SimConfig {
    std::string kind = "ccc"; // "ccc" | "weights"
    std::size_t d = 3;
    std::size_t T = 750;
    double rho = 0.3;              // equicorrelation of the innovations
    std::vector<SimGarch> garch;   // per asset; broadcast when a single entry
    std::vector<std::string> names;
    // weight-dynamics generator settings
    double noise_scale = 0.25;
    double phi_diag = 0.8;
    double phi_angle = 0.0; // damped rotation of the ilr coordinates
    double tau_scale = 0.1;
    double psi_scale = 0.05;
};

struct ModelConfig {
    std::string name;
    std::size_t refit_stride = 250;
    double ewma_lambda = 0.97;
    double ewma_floor = 1e-8;
    std::string first_stage = "garch"; // "garch" | "truth"
    bool estimate_w1 = false;
};

struct RunConfig {
    double alpha = 0.975;
    std::size_t n = 500;
    std::size_t T_out = 250;
    std::vector<ModelConfig> models;
    std::uint64_t seed = 1;
    double epsilon = 0.01;
    double level = 0.05;
    std::string benchmark = "cr_opt";
    SimConfig sim;

    void validate() const;
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text,
                           const std::string& origin);

/// Synthetic panel with its conditional analytic truth. The truth satisfies
/// full allocation exactly and is computed from the conditional Gaussian
/// law, never from samples.
struct SynthTruth {
    LossPanel panel;
    std::vector<double> true_var, true_es;
    Matrix true_esc; // T x d
};

/// Constant-conditional-correlation Gaussian panel: per-asset GARCH(1,1)
/// volatilities, correlated standard normal innovations. Deterministic per
/// seed.
SynthTruth synth_ccc_gaussian(const SimConfig& sim, double alpha,
                              std::uint64_t seed);

/// Panel whose true allocation weights follow the compositional weight
/// dynamics: S_t is Gaussian GARCH, X_t = w_t S_t + zero-sum noise, and
/// w_{t+1} steps through a fixed small theta. Deterministic per seed.
SynthTruth synth_weight_dynamics(const SimConfig& sim, double alpha,
                                 std::uint64_t seed, double epsilon);

SynthTruth make_synth(const SimConfig& sim, double alpha, std::uint64_t seed,
                      double epsilon);

void write_truth_csv(const std::string& path, const SynthTruth& truth);
SynthTruth load_truth_csv(const std::string& path, const LossPanel& panel);

// ---------------------------------------------------------------------------
// Rolling run

struct RollResult {
    std::vector<std::int64_t> times; // out-of-sample times
    std::vector<std::string> model_names;
    // forecasts[model][i]; nullopt marks a failed model step
    std::vector<std::vector<std::optional<ForecastRecord>>> forecasts;
    std::vector<std::string> failures; // "model@time: message"
    std::size_t clamp_events = 0;
};

/// For each out-of-sample step, fits every configured model on the
/// preceding n observations and emits its one-step-ahead forecast. Failed
/// model steps are recorded and never abort the run. `truth` is required
/// only by the "truth" model and the "truth" first stage.
RollResult rolling_run(const RunConfig& config, const LossPanel& panel,
                       const SynthTruth* truth = nullptr);

// ---------------------------------------------------------------------------
// Report

struct ScoreRow {
    std::string target, model;
    std::size_t n_used = 0;
    double avg_var_score = 0.0;
    double avg_score = 0.0; // the target's own score
    double rank = 0.0;
};

struct TestRow {
    std::string kind; // "dm" | "calibration" | "wald_calibration" | "wald_comparative"
    std::string target, model, benchmark;
    std::size_t n_used = 0;
    double mean_value = 0.0;
    TestResult result;
};

struct BacktestReport {
    std::vector<ScoreRow> avg_scores;
    std::vector<TestRow> dm_rows;
    std::vector<TestRow> calibration_rows;
    std::vector<TestRow> wald_rows;
    std::vector<MurphyCurve> murphy_curves;
    std::vector<std::pair<std::string, bool>> var_equal_vs_benchmark;
    bool var_all_equal = false;
    // (target, model, fraction of knots at or below the benchmark curve)
    std::vector<std::tuple<std::string, std::string, double>> murphy_dominance;
    std::size_t missing_total = 0;
    std::vector<std::string> failures;
};

/// `oos_panel` holds exactly the out-of-sample rows, aligned with
/// roll.times (for a rolling run: panel.slice(n, T_out)).
BacktestReport assemble_report(const RollResult& roll, const LossPanel& oos_panel,
                               const RunConfig& config);

/// Writes summary.json, avg_scores.csv, dm_tests.csv, calibration.csv,
/// wald.csv and the per-target Murphy CSVs into `dir`.
void write_report(const BacktestReport& report, const RunConfig& config,
                  const std::string& dir);

/// Forecast table restricted to steps where every model succeeded.
ForecastTable to_forecast_table(const RollResult& roll);

} // namespace esalloc
