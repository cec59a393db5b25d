// HAC long-run variance, Diebold-Mariano comparative tests, calibration
// tests with the three-zone classification, and joint Wald tests.
//
// p-value fields follow the report labels: p_leq is the p-value of the
// null "model is at most as accurate as the benchmark" (for score
// differences) or "the forecast under-estimates" (for identification
// values); p_geq the mirrored null. Both reduce to Phi(z) and 1-Phi(z) of
// the studentized statistic. The zone rule is uniform: red when p_geq
// rejects, green when p_leq rejects, yellow otherwise.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "esalloc/core.hpp"

namespace esalloc {

enum class Zone { red, yellow, green, none };

std::string zone_name(Zone z);

struct TestResult {
    double statistic = 0.0;
    double p_equal = 1.0;
    double p_leq = 1.0;
    double p_geq = 1.0;
    Zone zone = Zone::none;
    std::size_t n = 0;
    double bandwidth = 0.0;
    bool degenerate = false;
    std::vector<std::string> flags;
};

struct HacResult {
    double variance = 0.0;
    double bandwidth = 0.0;
    bool rho_clamped = false;
};

/// Bartlett-kernel long-run variance with the AR(1) automatic bandwidth
/// b = 1.1447 (a1 T)^{1/3}, a1 = 4 rho^2 / ((1-rho)^2 (1+rho)^2), rho the
/// lag-1 autocorrelation clamped to [-0.97, 0.97]. Variance floored at
/// 1e-300. Needs at least 10 observations.
HacResult hac_lrv_full(std::span<const double> series);
std::pair<double, double> hac_lrv(std::span<const double> series);

/// DM test on a score-difference series (model minus benchmark).
TestResult dm_test(std::span<const double> score_diff, double level);

/// Same statistic on identification values; red = under-estimation
/// confirmed, green = over-estimation confirmed.
TestResult calibration_test(std::span<const double> ident_values, double level);

enum class WaldMode { two_sided, leq_lex, geq_lex };

/// Joint Wald test on a T x k matrix of identification values or score
/// differences (column 0 is the VaR component). two_sided: T Vbar' Om^-1
/// Vbar against chi-square(k). The one-and-a-half-sided nulls pin the VaR
/// column to zero and sign the remaining columns; they are tested as a
/// Bonferroni union of the two-sided VaR test and the one-sided tests on
/// the rest, each at level/2. All three p-values are always computed; the
/// mode selects which hypothesis drives the zone.
TestResult wald_joint(const Matrix& ident_matrix, double level,
                      WaldMode mode = WaldMode::two_sided);

} // namespace esalloc
