// Strict identification functions for VaR, ES and ES contributions, and
// their out-of-sample averages. Negative expectation means over-estimation
// for every function here; the calibration tests rely on that sign logic.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "esalloc/core.hpp"

namespace esalloc {

enum class IdentKind { var, es, esc, tuple };

/// T x k matrix of per-time identification values. For tuples the column
/// order is frozen as (V_var, V_esc_1, ..., V_esc_d); Wald tests index it
/// positionally.
struct IdentSeries {
    Matrix values;
    IdentKind kind = IdentKind::var;
    std::vector<std::string> columns;
};

/// alpha - 1{s<=v}.
double ident_var(double v, double s, double alpha);

/// 1{s>v} * (x_j - m).
double ident_esc(double m, double v, double x_j, double s);

/// v - e - 1{s>v} * (v - s) / (1 - alpha).
double ident_es(double v, double e, double s, double alpha);

/// Per-time identification values for the requested functional. `j` picks
/// the component for IdentKind::esc and is ignored otherwise.
IdentSeries ident_series(std::span<const ForecastRecord> forecasts,
                         const LossPanel& panel, IdentKind kind,
                         std::size_t j = 0);

/// Column-wise compensated means of ident_series.
std::vector<double> average_ident(std::span<const ForecastRecord> forecasts,
                                  const LossPanel& panel, IdentKind kind,
                                  std::size_t j = 0);

} // namespace esalloc
