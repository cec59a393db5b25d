// Reference forecasting models: historical simulation, a Gaussian
// GARCH(1,1) forecaster for the aggregate (VaR, ES) pair, EWMA covariance,
// the elliptical allocation formula, and the two compositional regression
// fits (least-squares on observed weights, and score minimization).

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "esalloc/composition.hpp"
#include "esalloc/core.hpp"

namespace esalloc {

// ---------------------------------------------------------------------------
// Historical simulation

/// Nonparametric forecast from a window of length n: VaR is the lower
/// empirical alpha-quantile of the aggregates, each ESC the mean of the
/// component losses over the exceedance days, ES their sum. Throws when
/// the window admits no exceedance.
ForecastRecord hs_forecast(const LossPanel& window, double alpha);

// ---------------------------------------------------------------------------
// Gaussian GARCH(1,1) on the aggregate

struct Garch11Params {
    double mu = 0.0;
    double omega = 0.0;
    double a = 0.0;
    double b = 0.0;
    double sigma0_sq = 0.0;
};

struct GarchFit {
    Garch11Params params;
    bool converged = false;
    double nll = 0.0;
};

/// Gaussian quasi-maximum-likelihood fit of a demeaned GARCH(1,1).
/// Constraints (omega > 0, a,b >= 0, a+b < 1) are built into the
/// reparameterization, so any optimum is feasible. Deterministic.
GarchFit garch11_qmle_fit(std::span<const double> series);

/// One-step-ahead (VaR, ES) under Gaussian innovations.
std::pair<double, double> garch11_forecast(const Garch11Params& params,
                                           std::span<const double> series,
                                           double alpha);

/// Filtered conditional (VaR_t, ES_t) for t = 0..T; entry t uses
/// observations before t, entry T is the out-of-window forecast.
struct VarEsPath {
    std::vector<double> var, es;
};
VarEsPath garch11_var_es_path(const Garch11Params& params,
                              std::span<const double> series, double alpha);

// ---------------------------------------------------------------------------
// EWMA covariance and the elliptical allocation

struct EwmaCovSpec {
    double lambda = 0.97;
    double floor = 1e-8; // minimum eigenvalue after clamping
};

/// Exponentially weighted covariance of the demeaned window rows, with
/// eigenvalues clamped at spec.floor.
Matrix ewma_cov(const LossPanel& window, const EwmaCovSpec& spec);

/// Predictable covariance path: entry t uses rows before t (entry 0 is the
/// clamped equal-weight covariance of the window), entry T the one-step
/// forecast.
std::vector<Matrix> ewma_cov_path(const LossPanel& window, const EwmaCovSpec& spec);

/// ESC = mu + Sigma 1 / (1' Sigma 1) * (ES - 1'mu). Components sum to
/// es_total by construction.
std::vector<double> elliptical_allocation(std::span<const double> mu,
                                          const Matrix& sigma, double es_total);

// ---------------------------------------------------------------------------
// Compositional regression fits

struct CrFitResult {
    ThetaParams theta;
    double objective = 0.0;
    bool converged = false;
    std::size_t evals = 0;
    std::size_t clamp_events = 0;
};

/// Least-squares fit of the weight dynamics to an observed weight series:
/// minimizes the one-step-ahead squared weight errors. `covariates[t]`
/// belongs to the transition from t to t+1.
CrFitResult cr_lse_fit(std::span<const SimplexWeights> weights,
                       std::span<const std::vector<double>> covariates,
                       std::uint64_t seed, bool estimate_w1 = false);

/// Score-minimization fit: minimizes the exceedance-gated squared errors
/// between realized losses and the allocation forecasts w_t * ES_t, with
/// the weights generated recursively from w1 (predictable: the day-t term
/// uses the weight recursed through day t-1). Requires at least 5
/// in-sample exceedances. `warm_start`, when given, seeds one extra
/// optimizer start (typically the least-squares fit).
CrFitResult cr_opt_fit(const LossPanel& panel, std::span<const double> var_hat,
                       std::span<const double> es_hat, const SimplexWeights& w1,
                       std::span<const std::vector<double>> covariates,
                       std::uint64_t seed, bool estimate_w1 = false,
                       const ThetaParams* warm_start = nullptr);

/// Recursive weight forecast: record t carries esc = w_t * es_hat[t], with
/// w_1 = theta.w1 and w_{t+1} = upsilon_theta(w_t, X_t).
std::vector<ForecastRecord> cr_forecast(const ThetaParams& theta,
                                        const LossPanel& panel,
                                        std::span<const double> var_hat,
                                        std::span<const double> es_hat,
                                        std::span<const std::vector<double>> covariates,
                                        double alpha,
                                        std::size_t* clamp_count = nullptr);

} // namespace esalloc
