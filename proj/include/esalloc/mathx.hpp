// Scalar probability helpers used across the library: standard normal
// pdf/cdf/quantile and the chi-square cdf. All pure, no global state.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>

namespace esalloc {

inline double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.39894228040143267794;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / 1.4142135623730950488);
}

/// Inverse standard normal cdf (Wichura's PPND16 rational approximation,
/// accurate to ~1e-15 over (0,1)).
double normal_icdf(double p);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

inline double chi2_cdf(double x, double dof) {
    if (x <= 0.0) return 0.0;
    return gamma_p(0.5 * dof, 0.5 * x);
}

/// Mean tail value of the standard normal beyond its alpha-quantile,
/// pdf(z_alpha) / (1 - alpha).
inline double normal_es_factor(double alpha) {
    return normal_pdf(normal_icdf(alpha)) / (1.0 - alpha);
}

/// Compensated (Neumaier) sum.
inline double sum_compensated(std::span<const double> x) {
    double s = 0.0, c = 0.0;
    for (double v : x) {
        double t = s + v;
        if (std::abs(s) >= std::abs(v))
            c += (s - t) + v;
        else
            c += (v - t) + s;
        s = t;
    }
    return s + c;
}

inline double mean_compensated(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("mean_compensated: empty input");
    return sum_compensated(x) / static_cast<double>(x.size());
}

inline double sample_variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    double m = mean_compensated(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

} // namespace esalloc
