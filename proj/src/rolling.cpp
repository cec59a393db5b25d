#include <cmath>
#include <optional>
#include <stdexcept>

#include "esalloc/harness.hpp"
#include "esalloc/models.hpp"
#include "esalloc/rng.hpp"

namespace esalloc {

namespace {

std::vector<double> column_means(const LossPanel& p) {
    std::vector<double> mu(p.cols(), 0.0);
    for (std::size_t t = 0; t < p.rows(); ++t)
        for (std::size_t j = 0; j < p.cols(); ++j) mu[j] += p.at(t, j);
    for (double& m : mu) m /= static_cast<double>(p.rows());
    return mu;
}

std::uint64_t fit_seed(std::uint64_t run_seed, const std::string& model,
                       std::size_t t0) {
    return mix64(run_seed ^ mix64(hash_name(model) + 0x9E3779B97F4A7C15ull * t0));
}

// First-stage (VaR, ES) path over the window plus the one-step forecast;
// entry t belongs to window row t, entry n to the out-of-sample step.
VarEsPath first_stage_path(const ModelConfig& mc, const LossPanel& window,
                           double alpha, const SynthTruth* truth,
                           std::size_t window_start) {
    if (mc.first_stage == "truth") {
        if (truth == nullptr)
            throw std::runtime_error("first_stage=truth requires truth data");
        VarEsPath path;
        const std::size_t n = window.rows();
        path.var.assign(truth->true_var.begin() + window_start,
                        truth->true_var.begin() + window_start + n + 1);
        path.es.assign(truth->true_es.begin() + window_start,
                       truth->true_es.begin() + window_start + n + 1);
        return path;
    }
    const GarchFit fit = garch11_qmle_fit(window.aggregate());
    return garch11_var_es_path(fit.params, window.aggregate(), alpha);
}

// Weights observed through the elliptical formula, as used by CR.LSE for
// fitting and by the CR models for their initial weight. Nonpositive
// allocation components are floored before closing.
struct EllipticalWeights {
    std::vector<SimplexWeights> w; // per window row
    std::size_t clamp_events = 0;
};

EllipticalWeights elliptical_weight_series(const LossPanel& window,
                                           const VarEsPath& path,
                                           const ModelConfig& mc) {
    const std::size_t n = window.rows();
    const auto mu = column_means(window);
    const auto covs = ewma_cov_path(window, {mc.ewma_lambda, mc.ewma_floor});
    EllipticalWeights out;
    out.w.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        auto esc = elliptical_allocation(mu, covs[t], path.es[t]);
        const double floor_value = 1e-8 * (std::abs(path.es[t]) + 1.0);
        bool clamped = false;
        for (double& v : esc)
            if (v < floor_value) {
                v = floor_value;
                clamped = true;
            }
        if (clamped) ++out.clamp_events;
        out.w.push_back(closing(esc));
    }
    return out;
}

std::vector<std::vector<double>> covariate_series(const LossPanel& window,
                                                  double eps) {
    std::vector<std::vector<double>> y;
    y.reserve(window.rows());
    for (std::size_t t = 0; t < window.rows(); ++t)
        y.push_back(build_covariates(window.row(t), window.aggregate()[t], eps));
    return y;
}

struct CrState {
    std::optional<ThetaParams> theta;
    std::optional<SimplexWeights> w_cur; // weight for the upcoming forecast
};

class ModelDriver {
public:
    ModelDriver(const ModelConfig& mc, const RunConfig& cfg,
                const SynthTruth* truth)
        : mc_(mc), cfg_(cfg), truth_(truth) {}

    ForecastRecord step(const LossPanel& panel, std::size_t i,
                        std::size_t* clamp_events) {
        const std::size_t n = cfg_.n;
        const std::size_t t0 = n + i; // panel row being forecast

        if (mc_.name == "truth") {
            if (truth_ == nullptr)
                throw std::runtime_error("model 'truth' requires truth data");
            ForecastRecord rec;
            rec.alpha = cfg_.alpha;
            rec.var = truth_->true_var[t0];
            rec.es = truth_->true_es[t0];
            rec.esc.resize(panel.cols());
            for (std::size_t j = 0; j < panel.cols(); ++j)
                rec.esc[j] = truth_->true_esc(t0, j);
            return rec;
        }

        const LossPanel window = panel.slice(i, n);
        if (mc_.name == "hs") return hs_forecast(window, cfg_.alpha);

        const VarEsPath path = first_stage_path(mc_, window, cfg_.alpha, truth_, i);
        const double var_next = path.var[n];
        const double es_next = path.es[n];

        if (mc_.name == "elliptical") {
            const Matrix cov = ewma_cov(window, {mc_.ewma_lambda, mc_.ewma_floor});
            const auto mu = column_means(window);
            ForecastRecord rec;
            rec.alpha = cfg_.alpha;
            rec.var = var_next;
            rec.es = es_next;
            rec.esc = elliptical_allocation(mu, cov, es_next);
            return rec;
        }

        // Compositional models.
        const bool refit = (i % mc_.refit_stride == 0) || !state_.theta.has_value();
        const auto y = covariate_series(window, cfg_.epsilon);

        if (mc_.name == "cr_lse") {
            if (refit) {
                auto ew = elliptical_weight_series(window, path, mc_);
                *clamp_events += ew.clamp_events;
                const auto fit =
                    cr_lse_fit(ew.w, y, fit_seed(cfg_.seed, mc_.name, t0),
                               mc_.estimate_w1);
                state_.theta = fit.theta;
                const SimplexWeights w_next = clamp_interior(
                    step_weights(fit.theta, ew.w.back(), y.back()), weight_floor,
                    clamp_events);
                return make_record(w_next, var_next, es_next);
            }
            auto ew = elliptical_weight_series(window, path, mc_);
            *clamp_events += ew.clamp_events;
            const SimplexWeights w_next = clamp_interior(
                step_weights(*state_.theta, ew.w.back(), y.back()), weight_floor,
                clamp_events);
            return make_record(w_next, var_next, es_next);
        }

        if (mc_.name == "cr_opt" || mc_.name == "const_w") {
            if (refit) {
                auto ew = elliptical_weight_series(window, path, mc_);
                *clamp_events += ew.clamp_events;
                const SimplexWeights w1 = ew.w.front();
                ThetaParams theta = zero_theta(w1, y.front().size());
                if (mc_.name == "cr_opt") {
                    const auto fit = cr_opt_fit(
                        window, std::span(path.var).first(n),
                        std::span(path.es).first(n), w1, y,
                        fit_seed(cfg_.seed, mc_.name, t0), mc_.estimate_w1);
                    theta = fit.theta;
                    *clamp_events += fit.clamp_events;
                } else {
                    // Constant-weight baseline: tau = ilr(w1), Phi = Psi = 0
                    // freezes the weights at w1.
                    theta.tau = ilr(w1);
                }
                state_.theta = theta;
                // Recurse the weights through the window to the forecast step.
                SimplexWeights w = theta.w1;
                for (std::size_t t = 0; t < n; ++t)
                    w = clamp_interior(step_weights(theta, w, y[t]), weight_floor,
                                       clamp_events);
                state_.w_cur = w;
            } else {
                state_.w_cur = clamp_interior(
                    step_weights(*state_.theta, *state_.w_cur, y.back()),
                    weight_floor, clamp_events);
            }
            return make_record(*state_.w_cur, var_next, es_next);
        }

        throw std::runtime_error("unknown model '" + mc_.name + "'");
    }

private:
    ForecastRecord make_record(const SimplexWeights& w, double var,
                               double es) const {
        ForecastRecord rec;
        rec.alpha = cfg_.alpha;
        rec.var = var;
        rec.es = es;
        rec.esc.resize(w.dim());
        for (std::size_t j = 0; j < w.dim(); ++j) rec.esc[j] = w[j] * es;
        return rec;
    }

    ModelConfig mc_;
    const RunConfig& cfg_;
    const SynthTruth* truth_;
    CrState state_;
};

} // namespace

RollResult rolling_run(const RunConfig& config, const LossPanel& panel,
                       const SynthTruth* truth) {
    config.validate();
    if (config.models.empty())
        throw std::runtime_error("rolling_run: no models configured");
    if (panel.rows() < config.n + config.T_out)
        throw std::runtime_error("rolling_run: panel has " +
                                 std::to_string(panel.rows()) +
                                 " rows, need n + T_out = " +
                                 std::to_string(config.n + config.T_out));
    if (truth != nullptr && truth->panel.rows() != panel.rows())
        throw std::runtime_error("rolling_run: truth length does not match panel");

    RollResult out;
    out.times.assign(panel.times().begin() + static_cast<std::ptrdiff_t>(config.n),
                     panel.times().begin() +
                         static_cast<std::ptrdiff_t>(config.n + config.T_out));

    for (const auto& mc : config.models) {
        out.model_names.push_back(mc.name);
        ModelDriver driver(mc, config, truth);
        std::vector<std::optional<ForecastRecord>> recs;
        recs.reserve(config.T_out);
        for (std::size_t i = 0; i < config.T_out; ++i) {
            try {
                recs.push_back(driver.step(panel, i, &out.clamp_events));
            } catch (const std::exception& e) {
                recs.push_back(std::nullopt);
                out.failures.push_back(mc.name + "@" +
                                       std::to_string(out.times[i]) + ": " +
                                       e.what());
            }
        }
        out.forecasts.push_back(std::move(recs));
    }
    return out;
}

} // namespace esalloc
