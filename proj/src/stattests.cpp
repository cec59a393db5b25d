#include "esalloc/stattests.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "esalloc/mathx.hpp"
#include "esalloc/simd.hpp"

namespace esalloc {

std::string zone_name(Zone z) {
    switch (z) {
    case Zone::red: return "red";
    case Zone::yellow: return "yellow";
    case Zone::green: return "green";
    case Zone::none: return "none";
    }
    return "none";
}

namespace {

constexpr double rho_clamp = 0.97;
constexpr double variance_floor = 1e-300;

struct Bandwidth {
    double b = 0.0;
    bool clamped = false;
};

// Andrews AR(1) plug-in for the Bartlett kernel.
Bandwidth bartlett_bandwidth(double gamma0, double gamma1, std::size_t n) {
    Bandwidth bw;
    double rho = (gamma0 > variance_floor) ? gamma1 / gamma0 : 0.0;
    if (rho > rho_clamp) {
        rho = rho_clamp;
        bw.clamped = true;
    } else if (rho < -rho_clamp) {
        rho = -rho_clamp;
        bw.clamped = true;
    }
    const double one_m = (1.0 - rho) * (1.0 - rho);
    const double one_p = (1.0 + rho) * (1.0 + rho);
    const double a1 = 4.0 * rho * rho / (one_m * one_p);
    bw.b = 1.1447 * std::cbrt(a1 * static_cast<double>(n));
    return bw;
}

double autocov(std::span<const double> centered, std::size_t lag) {
    const std::size_t n = centered.size();
    if (lag >= n) return 0.0;
    return kernels::active().dot(centered.data() + lag, centered.data(),
                                 n - lag) /
           static_cast<double>(n);
}

} // namespace

HacResult hac_lrv_full(std::span<const double> series) {
    const std::size_t n = series.size();
    if (n < 10)
        throw std::invalid_argument("hac_lrv: need at least 10 observations");
    const double mean =
        kernels::active().sum_comp(series.data(), n) / static_cast<double>(n);
    std::vector<double> c(n);
    for (std::size_t t = 0; t < n; ++t) c[t] = series[t] - mean;

    const double g0 = autocov(c, 0);
    const double g1 = autocov(c, 1);
    const Bandwidth bw = bartlett_bandwidth(g0, g1, n);

    double lrv = g0;
    const auto lags = static_cast<std::size_t>(std::floor(bw.b));
    for (std::size_t k = 1; k <= lags && k < n; ++k)
        lrv += 2.0 * (1.0 - static_cast<double>(k) / (bw.b + 1.0)) * autocov(c, k);

    HacResult out;
    out.variance = std::max(lrv, variance_floor);
    out.bandwidth = bw.b;
    out.rho_clamped = bw.clamped;
    return out;
}

std::pair<double, double> hac_lrv(std::span<const double> series) {
    const HacResult r = hac_lrv_full(series);
    return {r.variance, r.bandwidth};
}

namespace {

TestResult studentized_test(std::span<const double> series, double level) {
    const std::size_t n = series.size();
    if (n < 10)
        throw std::invalid_argument("test: need at least 10 observations");
    TestResult res;
    res.n = n;

    bool all_zero = true;
    for (double v : series)
        if (v != 0.0) {
            all_zero = false;
            break;
        }
    if (all_zero) {
        res.statistic = std::numeric_limits<double>::quiet_NaN();
        res.degenerate = true;
        res.zone = Zone::none;
        res.flags.push_back("degenerate_zero_series");
        return res;
    }

    const double mean =
        kernels::active().sum_comp(series.data(), n) / static_cast<double>(n);
    const HacResult hac = hac_lrv_full(series);
    if (hac.rho_clamped) res.flags.push_back("rho_clamped");
    if (hac.variance <= variance_floor) res.flags.push_back("zero_variance");
    res.bandwidth = hac.bandwidth;

    const double z = std::sqrt(static_cast<double>(n)) * mean / std::sqrt(hac.variance);
    res.statistic = z;
    const double phi = normal_cdf(z);
    res.p_equal = 2.0 * (1.0 - normal_cdf(std::abs(z)));
    res.p_leq = phi;        // null: under-estimation / model not better
    res.p_geq = 1.0 - phi;  // null: over-estimation / model not worse
    if (res.p_geq < level)
        res.zone = Zone::red;
    else if (res.p_leq < level)
        res.zone = Zone::green;
    else
        res.zone = Zone::yellow;
    return res;
}

} // namespace

TestResult dm_test(std::span<const double> score_diff, double level) {
    return studentized_test(score_diff, level);
}

TestResult calibration_test(std::span<const double> ident_values, double level) {
    return studentized_test(ident_values, level);
}

TestResult wald_joint(const Matrix& ident_matrix, double level, WaldMode mode) {
    const std::size_t n = ident_matrix.rows();
    const std::size_t k = ident_matrix.cols();
    if (k < 2) throw std::invalid_argument("wald_joint: need at least 2 columns");
    if (n < 10 * k)
        throw std::invalid_argument("wald_joint: need at least 10k observations");

    TestResult res;
    res.n = n;

    std::vector<double> col(n);
    Eigen::VectorXd mean(static_cast<Eigen::Index>(k));
    Eigen::MatrixXd centered(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t t = 0; t < n; ++t) col[t] = ident_matrix(t, c);
        const double m =
            kernels::active().sum_comp(col.data(), n) / static_cast<double>(n);
        mean(static_cast<Eigen::Index>(c)) = m;
        for (std::size_t t = 0; t < n; ++t)
            centered(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) =
                col[t] - m;
    }

    // Single bandwidth pooled from the first (VaR) column.
    for (std::size_t t = 0; t < n; ++t) col[t] = centered(static_cast<Eigen::Index>(t), 0);
    const double g0 = autocov(col, 0);
    const double g1 = autocov(col, 1);
    const Bandwidth bw = bartlett_bandwidth(g0, g1, n);
    if (bw.clamped) res.flags.push_back("rho_clamped");
    res.bandwidth = bw.b;

    const double dn = static_cast<double>(n);
    Eigen::MatrixXd omega = centered.transpose() * centered / dn;
    const auto lags = static_cast<std::size_t>(std::floor(bw.b));
    for (std::size_t l = 1; l <= lags && l < n; ++l) {
        const double w = 1.0 - static_cast<double>(l) / (bw.b + 1.0);
        const auto rows = static_cast<Eigen::Index>(n - l);
        Eigen::MatrixXd gl =
            centered.bottomRows(rows).transpose() * centered.topRows(rows) / dn;
        omega += w * (gl + gl.transpose());
    }

    // Ridge regularization when the long-run covariance is not positive
    // definite.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(omega);
    const double max_ev = eig.eigenvalues().maxCoeff();
    const double min_ev = eig.eigenvalues().minCoeff();
    if (!(min_ev > 0.0) || min_ev < 1e-12 * std::max(max_ev, 1e-300)) {
        const double ridge = 1e-8 * omega.trace() / static_cast<double>(k) + 1e-300;
        omega += ridge * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k),
                                                   static_cast<Eigen::Index>(k));
        res.flags.push_back("ridge_regularized");
    }

    const Eigen::VectorXd solved = omega.ldlt().solve(mean);
    const double w_stat = dn * mean.dot(solved);
    res.statistic = w_stat;
    res.p_equal = 1.0 - chi2_cdf(w_stat, static_cast<double>(k));

    // One-and-a-half-sided parts: two-sided on the VaR column plus
    // one-sided on the remaining columns, Bonferroni at level/2 each.
    const double z0 = std::sqrt(dn) * mean(0) / std::sqrt(std::max(omega(0, 0), variance_floor));
    const double p_var2 = 2.0 * (1.0 - normal_cdf(std::abs(z0)));
    double p_over_min = 1.0, p_under_min = 1.0;
    for (std::size_t c = 1; c < k; ++c) {
        const auto ic = static_cast<Eigen::Index>(c);
        const double zc =
            std::sqrt(dn) * mean(ic) / std::sqrt(std::max(omega(ic, ic), variance_floor));
        p_over_min = std::min(p_over_min, 1.0 - normal_cdf(zc));
        p_under_min = std::min(p_under_min, normal_cdf(zc));
    }
    const double m_rest = static_cast<double>(k - 1);
    const double p_rest_over = std::min(1.0, m_rest * p_over_min);
    const double p_rest_under = std::min(1.0, m_rest * p_under_min);
    // H0(<=lex): VaR exact and secondary mean <= 0; rejection favors
    // under-estimation / the benchmark. Stored under the "geq" label.
    res.p_geq = std::min(1.0, 2.0 * std::min(p_var2, p_rest_over));
    res.p_leq = std::min(1.0, 2.0 * std::min(p_var2, p_rest_under));

    switch (mode) {
    case WaldMode::two_sided:
        if (res.p_geq < level)
            res.zone = Zone::red;
        else if (res.p_leq < level)
            res.zone = Zone::green;
        else
            res.zone = Zone::yellow;
        break;
    case WaldMode::leq_lex:
        res.zone = (res.p_geq < level) ? Zone::red : Zone::yellow;
        break;
    case WaldMode::geq_lex:
        res.zone = (res.p_leq < level) ? Zone::green : Zone::yellow;
        break;
    }
    return res;
}

} // namespace esalloc
