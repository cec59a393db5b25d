#include "esalloc/models.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "esalloc/mathx.hpp"
#include "esalloc/optim.hpp"
#include "esalloc/simd.hpp"

namespace esalloc {

// ---------------------------------------------------------------------------
// Historical simulation

ForecastRecord hs_forecast(const LossPanel& window, double alpha) {
    const std::size_t n = window.rows();
    const std::size_t d = window.cols();
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("hs_forecast: alpha outside (0,1)");
    if (static_cast<double>(n) * (1.0 - alpha) < 1.0 - 1e-9)
        throw std::invalid_argument(
            "hs_forecast: window too short for level alpha (n=" +
            std::to_string(n) + ")");

    std::vector<double> s = window.aggregate();
    std::vector<double> sorted = s;
    std::sort(sorted.begin(), sorted.end());
    // Lower empirical quantile: smallest k with k/n >= alpha.
    const auto k = static_cast<std::size_t>(
        std::ceil(static_cast<double>(n) * alpha - 1e-9));
    const double var = sorted[k - 1];

    std::size_t exceed = 0;
    std::vector<double> esc(d, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        if (s[t] > var) {
            ++exceed;
            for (std::size_t j = 0; j < d; ++j) esc[j] += window.at(t, j);
        }
    }
    if (exceed == 0)
        throw std::runtime_error("hs_forecast: no exceedance in window");
    for (double& m : esc) m /= static_cast<double>(exceed);

    ForecastRecord rec;
    rec.alpha = alpha;
    rec.var = var;
    rec.esc = std::move(esc);
    double es = 0.0;
    for (double m : rec.esc) es += m;
    rec.es = es;
    return rec;
}

// ---------------------------------------------------------------------------
// Gaussian GARCH(1,1)

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

struct GarchTransform {
    // theta = (log omega, logit persistence, logit share); a = pers*share,
    // b = pers*(1-share). Feasible by construction.
    static Garch11Params to_params(std::span<const double> th, double mu,
                                   double sigma0_sq) {
        const double lw = std::clamp(th[0], -50.0, 50.0);
        const double pers = sigmoid(std::clamp(th[1], -30.0, 30.0));
        const double share = sigmoid(std::clamp(th[2], -30.0, 30.0));
        Garch11Params p;
        p.mu = mu;
        p.omega = std::exp(lw);
        p.a = pers * share;
        p.b = pers * (1.0 - share);
        p.sigma0_sq = sigma0_sq;
        return p;
    }
    static std::vector<double> from_ab(double omega, double a, double b) {
        const double pers = std::clamp(a + b, 1e-6, 1.0 - 1e-6);
        const double share = std::clamp(a / pers, 1e-6, 1.0 - 1e-6);
        return {std::log(omega), logit(pers), logit(share)};
    }
};

double garch_nll(const Garch11Params& p, std::span<const double> x) {
    double s2 = p.sigma0_sq;
    double nll = 0.0;
    for (double xt : x) {
        const double e = xt - p.mu;
        const double v = std::max(s2, 1e-12);
        nll += std::log(v) + e * e / v;
        s2 = p.omega + p.a * e * e + p.b * s2;
    }
    return nll;
}

} // namespace

GarchFit garch11_qmle_fit(std::span<const double> series) {
    const std::size_t n = series.size();
    if (n < 250)
        throw std::invalid_argument("garch11_qmle_fit: need at least 250 points");
    const double mu = mean_compensated(series);
    double var = 0.0;
    for (double x : series) var += (x - mu) * (x - mu);
    var /= static_cast<double>(n - 1);
    if (!(var > 0.0))
        throw std::invalid_argument("garch11_qmle_fit: series has zero variance");

    auto objective = [&](std::span<const double> th) {
        return garch_nll(GarchTransform::to_params(th, mu, var), series);
    };

    // Fixed fan of starting points; deterministic across runs.
    const double starts[][2] = {{0.05, 0.90}, {0.10, 0.80}, {0.02, 0.92},
                                {0.15, 0.60}, {0.01, 0.05}};
    NelderMeadOptions opts;
    opts.init_step = 0.5;
    std::vector<OptimResult> results;
    for (const auto& ab : starts) {
        const double omega0 = var * std::max(1.0 - ab[0] - ab[1], 1e-3);
        const auto x0 = GarchTransform::from_ab(omega0, ab[0], ab[1]);
        results.push_back(nelder_mead(objective, x0, opts));
    }
    // Best likelihood wins; near-ties resolve to the least persistent
    // parameters. For white-noise inputs the likelihood is flat along the
    // (a ~ 0, b) ridge, where persistence carries no information.
    double best_nll = std::numeric_limits<double>::infinity();
    for (const auto& r : results) best_nll = std::min(best_nll, r.value);
    const double tie_tol = 1e-2;
    const OptimResult* best = nullptr;
    double best_persistence = std::numeric_limits<double>::infinity();
    for (const auto& r : results) {
        if (r.value > best_nll + tie_tol) continue;
        const Garch11Params p = GarchTransform::to_params(r.x, mu, var);
        if (p.a + p.b < best_persistence) {
            best_persistence = p.a + p.b;
            best = &r;
        }
    }

    GarchFit fit;
    fit.params = GarchTransform::to_params(best->x, mu, var);
    fit.converged = best->converged;
    fit.nll = best->value;
    return fit;
}

std::pair<double, double> garch11_forecast(const Garch11Params& params,
                                           std::span<const double> series,
                                           double alpha) {
    double s2 = params.sigma0_sq;
    for (double xt : series) {
        const double e = xt - params.mu;
        s2 = params.omega + params.a * e * e + params.b * s2;
    }
    const double sigma = std::sqrt(std::max(s2, 1e-300));
    const double z = normal_icdf(alpha);
    const double var = params.mu + sigma * z;
    const double es = params.mu + sigma * normal_es_factor(alpha);
    return {var, es};
}

VarEsPath garch11_var_es_path(const Garch11Params& params,
                              std::span<const double> series, double alpha) {
    const double z = normal_icdf(alpha);
    const double c = normal_es_factor(alpha);
    VarEsPath path;
    path.var.reserve(series.size() + 1);
    path.es.reserve(series.size() + 1);
    double s2 = params.sigma0_sq;
    for (std::size_t t = 0; t <= series.size(); ++t) {
        const double sigma = std::sqrt(std::max(s2, 1e-300));
        path.var.push_back(params.mu + sigma * z);
        path.es.push_back(params.mu + sigma * c);
        if (t < series.size()) {
            const double e = series[t] - params.mu;
            s2 = params.omega + params.a * e * e + params.b * s2;
        }
    }
    return path;
}

// ---------------------------------------------------------------------------
// EWMA covariance

namespace {

Matrix clamp_eigenvalues(const Matrix& m, double floor_value) {
    const auto n = static_cast<Eigen::Index>(m.rows());
    Eigen::MatrixXd em(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            em(r, c) = m(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(em);
    Eigen::VectorXd vals = eig.eigenvalues();
    bool need = false;
    for (Eigen::Index i = 0; i < n; ++i)
        if (vals(i) < floor_value) {
            vals(i) = floor_value;
            need = true;
        }
    if (!need) return m;
    Eigen::MatrixXd fixed =
        eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
                0.5 * (fixed(r, c) + fixed(c, r));
    return out;
}

void check_ewma_spec(const EwmaCovSpec& spec) {
    if (!(spec.lambda > 0.0 && spec.lambda < 1.0))
        throw std::invalid_argument("ewma_cov: lambda outside (0,1)");
    if (!(spec.floor > 0.0))
        throw std::invalid_argument("ewma_cov: floor must be positive");
}

std::vector<double> column_means(const LossPanel& p) {
    std::vector<double> mu(p.cols(), 0.0);
    for (std::size_t t = 0; t < p.rows(); ++t)
        for (std::size_t j = 0; j < p.cols(); ++j) mu[j] += p.at(t, j);
    for (double& m : mu) m /= static_cast<double>(p.rows());
    return mu;
}

Matrix equal_weight_cov(const LossPanel& p, const std::vector<double>& mu) {
    const std::size_t d = p.cols();
    Matrix cov(d, d);
    for (std::size_t t = 0; t < p.rows(); ++t)
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c)
                cov(r, c) += (p.at(t, r) - mu[r]) * (p.at(t, c) - mu[c]);
    for (auto& v : cov.data()) v /= static_cast<double>(p.rows());
    return cov;
}

} // namespace

Matrix ewma_cov(const LossPanel& window, const EwmaCovSpec& spec) {
    check_ewma_spec(spec);
    const std::size_t n = window.rows();
    const std::size_t d = window.cols();
    if (n < 2) throw std::invalid_argument("ewma_cov: need at least 2 rows");
    const auto mu = column_means(window);

    // Normalized weights lambda^{n-1-t}.
    double wsum = 0.0;
    std::vector<double> w(n);
    for (std::size_t t = 0; t < n; ++t) {
        w[t] = std::pow(spec.lambda, static_cast<double>(n - 1 - t));
        wsum += w[t];
    }
    Matrix cov(d, d);
    for (std::size_t t = 0; t < n; ++t) {
        const double wt = w[t] / wsum;
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c)
                cov(r, c) += wt * (window.at(t, r) - mu[r]) * (window.at(t, c) - mu[c]);
    }
    return clamp_eigenvalues(cov, spec.floor);
}

std::vector<Matrix> ewma_cov_path(const LossPanel& window, const EwmaCovSpec& spec) {
    check_ewma_spec(spec);
    const std::size_t n = window.rows();
    const std::size_t d = window.cols();
    if (n < 2) throw std::invalid_argument("ewma_cov_path: need at least 2 rows");
    const auto mu = column_means(window);

    std::vector<Matrix> path;
    path.reserve(n + 1);
    Matrix cur = clamp_eigenvalues(equal_weight_cov(window, mu), spec.floor);
    path.push_back(cur);
    for (std::size_t t = 0; t < n; ++t) {
        Matrix next(d, d);
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c)
                next(r, c) = spec.lambda * cur(r, c) +
                             (1.0 - spec.lambda) * (window.at(t, r) - mu[r]) *
                                 (window.at(t, c) - mu[c]);
        cur = clamp_eigenvalues(next, spec.floor);
        path.push_back(cur);
    }
    return path;
}

std::vector<double> elliptical_allocation(std::span<const double> mu,
                                          const Matrix& sigma, double es_total) {
    const std::size_t d = mu.size();
    if (sigma.rows() != d || sigma.cols() != d)
        throw std::invalid_argument("elliptical_allocation: dimension mismatch");
    std::vector<double> row_sums(d, 0.0);
    double quad = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) row_sums[r] += sigma(r, c);
        quad += row_sums[r];
    }
    if (!(quad > 0.0))
        throw std::invalid_argument("elliptical_allocation: 1'Sigma1 must be positive");
    double mu_sum = 0.0;
    for (double m : mu) mu_sum += m;
    std::vector<double> out(d);
    for (std::size_t j = 0; j < d; ++j)
        out[j] = mu[j] + row_sums[j] / quad * (es_total - mu_sum);
    return out;
}

// ---------------------------------------------------------------------------
// Compositional regression fits

namespace {

struct ThetaLayout {
    std::size_t k; // d-1
    std::size_t q;
    bool with_w1;

    std::size_t size() const { return k + k * k + k * q + (with_w1 ? k : 0); }

    ThetaParams unpack(std::span<const double> th, const SimplexWeights& w1) const {
        ThetaParams theta{std::vector<double>(k), Matrix(k, k), Matrix(k, q), w1};
        std::size_t p = 0;
        for (std::size_t i = 0; i < k; ++i) theta.tau[i] = th[p++];
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < k; ++c) theta.phi(r, c) = th[p++];
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < q; ++c) theta.psi(r, c) = th[p++];
        if (with_w1) theta.w1 = ilr_inv(th.subspan(p, k));
        return theta;
    }
};

double spectral_radius(const Matrix& m) {
    const auto k = static_cast<Eigen::Index>(m.rows());
    if (k == 1) return std::abs(m(0, 0));
    Eigen::MatrixXd em(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
        for (Eigen::Index c = 0; c < k; ++c)
            em(r, c) = m(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    return em.eigenvalues().cwiseAbs().maxCoeff();
}

// Stationarity barrier for the weight recursion: an explosive Phi walks
// the out-of-sample weights onto the simplex boundary.
constexpr double phi_radius_cap = 0.999;

double stability_penalty(const ThetaParams& theta) {
    const double rho = spectral_radius(theta.phi);
    if (rho < phi_radius_cap) return 0.0;
    return 1e6 * (1.0 + rho - phi_radius_cap);
}

void check_covariates(std::span<const std::vector<double>> covariates,
                      std::size_t expected, std::size_t q) {
    if (covariates.size() < expected)
        throw std::invalid_argument("compositional fit: covariate series too short");
    for (const auto& y : covariates)
        if (y.size() != q)
            throw std::invalid_argument("compositional fit: covariate dimension mismatch");
}

} // namespace

CrFitResult cr_lse_fit(std::span<const SimplexWeights> weights,
                       std::span<const std::vector<double>> covariates,
                       std::uint64_t seed, bool estimate_w1) {
    if (weights.size() < 2)
        throw std::invalid_argument("cr_lse_fit: need at least 2 weights");
    const std::size_t d = weights.front().dim();
    const std::size_t k = d - 1;
    const std::size_t q = covariates.empty() ? 0 : covariates.front().size();
    check_covariates(covariates, weights.size() - 1, q);
    const std::size_t min_points = 2 * k * (d + q);
    if (weights.size() < min_points)
        throw std::invalid_argument("cr_lse_fit: need at least " +
                                    std::to_string(min_points) + " time points");

    const ThetaLayout layout{k, q, estimate_w1};
    const SimplexWeights& w1 = weights.front();

    auto objective = [&](std::span<const double> th) {
        const ThetaParams theta = layout.unpack(th, w1);
        const double barrier = stability_penalty(theta);
        if (barrier > 0.0) return barrier;
        double acc = 0.0;
        for (std::size_t t = 0; t + 1 < weights.size(); ++t) {
            const SimplexWeights next = step_weights(theta, weights[t], covariates[t]);
            for (std::size_t j = 0; j < d; ++j) {
                const double e = weights[t + 1][j] - next[j];
                acc += e * e;
            }
        }
        return acc;
    };

    std::vector<double> x0(layout.size(), 0.0);
    if (estimate_w1) {
        const auto z1 = ilr(w1);
        std::copy(z1.begin(), z1.end(), x0.end() - static_cast<std::ptrdiff_t>(k));
    }
    NelderMeadOptions opts;
    const OptimResult res = restarted_nelder_mead(
        objective, x0, opts, 4, CounterRng(seed, hash_name("cr_lse")));

    CrFitResult fit{layout.unpack(res.x, w1), res.value, res.converged, res.evals, 0};
    return fit;
}

CrFitResult cr_opt_fit(const LossPanel& panel, std::span<const double> var_hat,
                       std::span<const double> es_hat, const SimplexWeights& w1,
                       std::span<const std::vector<double>> covariates,
                       std::uint64_t seed, bool estimate_w1,
                       const ThetaParams* warm_start) {
    const std::size_t n = panel.rows();
    const std::size_t d = panel.cols();
    const std::size_t k = d - 1;
    if (var_hat.size() != n || es_hat.size() != n)
        throw std::invalid_argument("cr_opt_fit: var/es path length mismatch");
    if (w1.dim() != d) throw std::invalid_argument("cr_opt_fit: w1 dimension mismatch");
    const std::size_t q = covariates.empty() ? 0 : covariates.front().size();
    check_covariates(covariates, n, q);

    const auto& s = panel.aggregate();
    std::size_t exceedances = 0;
    for (std::size_t t = 0; t < n; ++t)
        if (s[t] > var_hat[t]) ++exceedances;
    if (exceedances < 5)
        throw std::runtime_error("cr_opt_fit: only " + std::to_string(exceedances) +
                                 " in-sample exceedances (need 5)");

    const ThetaLayout layout{k, q, estimate_w1};
    std::size_t clamp_events = 0;
    std::size_t* recount = nullptr;

    auto objective = [&](std::span<const double> th) {
        const ThetaParams theta = layout.unpack(th, w1);
        const double barrier = stability_penalty(theta);
        if (barrier > 0.0) return barrier;
        std::size_t path_clamps = 0;
        SimplexWeights w = theta.w1;
        // Compensated accumulation; exceedance terms can nearly cancel
        // against large regular terms in the optimizer's comparisons.
        double acc = 0.0, comp = 0.0;
        auto add = [&](double v) {
            const double t2 = acc + v;
            if (std::abs(acc) >= std::abs(v))
                comp += (acc - t2) + v;
            else
                comp += (v - t2) + acc;
            acc = t2;
        };
        for (std::size_t t = 0; t < n; ++t) {
            // w is predictable: recursed through observations before t. The
            // day-t term scores the day-t forecast w * ES_t; only then does
            // the recursion consume day t. Pairing x_t with
            // upsilon(w_t, x_t) instead would let the covariates (built
            // from X_t) reconstruct the same day's shares in sample.
            if (s[t] > var_hat[t]) {
                for (std::size_t j = 0; j < d; ++j) {
                    const double e = panel.at(t, j) - w[j] * es_hat[t];
                    add(e * e);
                }
            }
            w = clamp_interior(step_weights(theta, w, covariates[t]), weight_floor,
                               &path_clamps);
        }
        // Boundary-hugging dynamics are rejected: a parameter whose
        // in-sample weight path needs clamping produces degenerate
        // allocations out of sample.
        if (recount != nullptr) *recount = path_clamps;
        return acc + comp + 1e6 * static_cast<double>(path_clamps);
    };

    std::vector<double> x0(layout.size(), 0.0);
    if (estimate_w1) {
        const auto z1 = ilr(w1);
        std::copy(z1.begin(), z1.end(), x0.end() - static_cast<std::ptrdiff_t>(k));
    }
    NelderMeadOptions opts;
    OptimResult res = restarted_nelder_mead(
        objective, x0, opts, 4, CounterRng(seed, hash_name("cr_opt")));
    if (warm_start != nullptr) {
        std::vector<double> xw(layout.size(), 0.0);
        std::size_t p = 0;
        for (std::size_t i = 0; i < k; ++i) xw[p++] = warm_start->tau[i];
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < k; ++c) xw[p++] = warm_start->phi(r, c);
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < q; ++c) xw[p++] = warm_start->psi(r, c);
        if (estimate_w1) {
            const auto z1 = ilr(warm_start->w1);
            std::copy(z1.begin(), z1.end(), xw.begin() + static_cast<std::ptrdiff_t>(p));
        }
        OptimResult warm = restarted_nelder_mead(
            objective, xw, opts, 0, CounterRng(seed, hash_name("cr_opt_warm")));
        if (warm.value < res.value) res = std::move(warm);
    }

    recount = &clamp_events;
    const double final_obj = objective(res.x); // recount clamps for the optimum
    CrFitResult fit{layout.unpack(res.x, w1), final_obj, res.converged, res.evals,
                    clamp_events};
    return fit;
}

std::vector<ForecastRecord> cr_forecast(const ThetaParams& theta,
                                        const LossPanel& panel,
                                        std::span<const double> var_hat,
                                        std::span<const double> es_hat,
                                        std::span<const std::vector<double>> covariates,
                                        double alpha, std::size_t* clamp_count) {
    const std::size_t n = panel.rows();
    const std::size_t d = panel.cols();
    if (var_hat.size() != n || es_hat.size() != n)
        throw std::invalid_argument("cr_forecast: var/es path length mismatch");
    check_covariates(covariates, n, theta.covariate_dim());

    std::vector<ForecastRecord> out;
    out.reserve(n);
    std::size_t clamps = 0;
    SimplexWeights w = theta.w1;
    for (std::size_t t = 0; t < n; ++t) {
        ForecastRecord rec;
        rec.alpha = alpha;
        rec.var = var_hat[t];
        rec.es = es_hat[t];
        rec.esc.resize(d);
        for (std::size_t j = 0; j < d; ++j) rec.esc[j] = w[j] * es_hat[t];
        out.push_back(std::move(rec));
        w = clamp_interior(step_weights(theta, w, covariates[t]), weight_floor,
                           &clamps);
    }
    if (clamp_count != nullptr) *clamp_count += clamps;
    return out;
}

} // namespace esalloc
