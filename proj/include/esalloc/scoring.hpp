// Multi-objective scoring of (ES-contribution, VaR) forecasts, plus the
// elementary scores driving Murphy diagrams.
//
// Tie conventions are fixed bit-exactly: {s <= v} is closed in the VaR
// score and identification, {s > v} gates the ESC scores, and the
// elementary VaR score uses the strict {s < v}.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "esalloc/core.hpp"

namespace esalloc {

/// Strictly increasing piecewise-linear table; extended linearly beyond its
/// knots with the boundary segment slopes.
class MonotoneTable {
public:
    MonotoneTable(std::vector<double> knots, std::vector<double> values);
    double operator()(double x) const;
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> knots_, values_;
};

/// Strictly convex function given by a knot table of its subgradient
/// (point, subgradient) with linear interpolation of phi'. phi itself is
/// the exact integral of the table (piecewise quadratic), anchored at the
/// first knot; scores only ever use phi up to affine terms.
class ConvexTable {
public:
    ConvexTable(std::vector<double> knots, std::vector<double> subgradient);
    double phi(double x) const;
    double dphi(double x) const;
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& subgradient() const { return grad_; }

private:
    std::vector<double> knots_, grad_, cum_; // cum_: phi at each knot
};

struct VarScoreSpec {
    double alpha = 0.975;
    std::optional<MonotoneTable> h; // identity when absent (pinball loss)
};

struct EscScoreSpec {
    std::optional<ConvexTable> phi; // square loss when absent
};

/// (1{s<=v} - alpha) * (h(v) - h(s)).
double score_var(double v, double s, const VarScoreSpec& spec);

/// 1{s>v} * { phi'(m)(m - x_j) - phi(m) + phi(x_j) }.
double score_esc_component(double m, double v, double x_j, double s,
                           const EscScoreSpec& spec = {});

/// Pair (VaR score of the aggregate, summed ESC component scores).
ScorePair score_tuple(const ForecastRecord& f, std::span<const double> x,
                      const VarScoreSpec& vspec, const EscScoreSpec& espec = {});
/// Per-component convex functions instead of a shared one.
ScorePair score_tuple(const ForecastRecord& f, std::span<const double> x,
                      const VarScoreSpec& vspec,
                      std::span<const EscScoreSpec> especs);
/// Same with pinball + square loss at f.alpha.
ScorePair score_tuple(const ForecastRecord& f, std::span<const double> x);

/// (1{s<v} - alpha) * (1{eta<v} - 1{eta<s}).
double elementary_score_var(double eta, double v, double s, double alpha);

/// 1{s>v}(x_j-eta) on m<=eta<x_j, 1{s>v}(eta-x_j) on x_j<=eta<m, else 0.
double elementary_score_esc(double eta, double m, double v, double x_j, double s);

/// Componentwise compensated mean of score_tuple over the period.
ScorePair average_scores(std::span<const ForecastRecord> forecasts,
                         const LossPanel& panel,
                         const std::optional<VarScoreSpec>& vspec = std::nullopt,
                         const EscScoreSpec& espec = {});

// Per-time score series (pinball / square loss), used by the comparative
// tests and the report.
std::vector<double> score_var_series(std::span<const ForecastRecord> forecasts,
                                     const LossPanel& panel);
std::vector<double> score_esc_tuple_series(std::span<const ForecastRecord> forecasts,
                                           const LossPanel& panel);
std::vector<double> score_esc_component_series(
    std::span<const ForecastRecord> forecasts, const LossPanel& panel,
    std::size_t j);

} // namespace esalloc
