// Murphy diagrams for VaR and ES contributions: knot enumeration, exact
// piecewise-linear curve evaluation, and curve differences.
//
// The averaged elementary scores are piecewise linear in eta with all kinks
// and jumps located at the knots (realized losses and forecasts). Jumps are
// real: the curves are right-continuous at a knot but their left limit can
// differ. A curve therefore stores both one-sided values per knot, which
// makes knot-only storage lossless: between adjacent knots the curve is the
// segment from (k_i, value[i]) to (k_{i+1}, value_left[i+1]).

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "esalloc/core.hpp"

namespace esalloc {

struct MurphyCurve {
    std::vector<double> knots;      // strictly increasing, sentinels at both ends
    std::vector<double> value;      // curve value at each knot
    std::vector<double> value_left; // left limit at each knot
    std::string label;
    std::string target; // "var" | "esc_tuple" | "esc_<j>"
    std::uint64_t fingerprint = 0;

    /// Exact curve value at eta (0 outside the knot range).
    double value_at(double eta) const;
    /// Left limit at eta.
    double left_limit_at(double eta) const;
    /// Exact integral over the real line.
    double integral() const;
};

/// Sorted deduplicated union of the j-th realized losses and j-th ESC
/// forecasts over the period.
std::vector<double> esc_knots(std::span<const ForecastRecord> forecasts,
                              const LossPanel& panel, std::size_t j);

MurphyCurve murphy_curve_esc(std::span<const ForecastRecord> forecasts,
                             const LossPanel& panel, std::size_t j,
                             const std::string& label);

MurphyCurve murphy_curve_var(std::span<const ForecastRecord> forecasts,
                             const LossPanel& panel, const std::string& label);

MurphyCurve murphy_curve_tuple(std::span<const ForecastRecord> forecasts,
                               const LossPanel& panel, const std::string& label);

/// a - b on the merged knot set. Throws when the curves were built from
/// different panels/periods/targets.
MurphyCurve murphy_difference(const MurphyCurve& a, const MurphyCurve& b);

/// Descriptive dominance: fraction of merged knots (both one-sided values)
/// where a lies at or below b. 1.0 means a dominates everywhere, which by
/// piecewise linearity extends to the whole real line.
double dominance_fraction(const MurphyCurve& a, const MurphyCurve& b);

/// Long-format emission `eta,value,model,target`; jump knots produce two
/// rows (left limit first) so any plotting tool draws the vertical step.
void write_murphy_csv(const std::string& path,
                      std::span<const MurphyCurve> curves);

} // namespace esalloc
