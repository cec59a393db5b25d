#include "esalloc/scoring.hpp"

#include <cmath>
#include <stdexcept>

#include "esalloc/mathx.hpp"
#include "esalloc/simd.hpp"

namespace esalloc {

namespace {

void check_table_sizes(const std::vector<double>& k, const std::vector<double>& v,
                       const char* what) {
    if (k.size() != v.size())
        throw std::invalid_argument(std::string(what) + ": knot/value size mismatch");
    if (k.size() < 2)
        throw std::invalid_argument(std::string(what) + ": need at least 2 knots");
    for (std::size_t i = 1; i < k.size(); ++i)
        if (!(k[i] > k[i - 1]))
            throw std::invalid_argument(std::string(what) +
                                        ": knots must be strictly increasing");
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1]))
            throw std::invalid_argument(std::string(what) +
                                        ": values must be strictly increasing");
}

// Segment index such that x lies in [knots[i], knots[i+1]); clamped to the
// boundary segments for extrapolation.
std::size_t segment_of(const std::vector<double>& knots, double x) {
    if (x <= knots.front()) return 0;
    if (x >= knots[knots.size() - 2]) return knots.size() - 2;
    std::size_t lo = 0, hi = knots.size() - 2;
    while (lo < hi) {
        const std::size_t mid = (lo + hi + 1) / 2;
        if (knots[mid] <= x)
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

} // namespace

MonotoneTable::MonotoneTable(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
    check_table_sizes(knots_, values_, "MonotoneTable");
}

double MonotoneTable::operator()(double x) const {
    const std::size_t i = segment_of(knots_, x);
    const double slope = (values_[i + 1] - values_[i]) / (knots_[i + 1] - knots_[i]);
    return values_[i] + slope * (x - knots_[i]);
}

ConvexTable::ConvexTable(std::vector<double> knots, std::vector<double> subgradient)
    : knots_(std::move(knots)), grad_(std::move(subgradient)) {
    check_table_sizes(knots_, grad_, "ConvexTable");
    cum_.resize(knots_.size(), 0.0);
    for (std::size_t i = 1; i < knots_.size(); ++i) {
        const double dx = knots_[i] - knots_[i - 1];
        cum_[i] = cum_[i - 1] + 0.5 * (grad_[i] + grad_[i - 1]) * dx;
    }
}

double ConvexTable::dphi(double x) const {
    const std::size_t i = segment_of(knots_, x);
    const double slope = (grad_[i + 1] - grad_[i]) / (knots_[i + 1] - knots_[i]);
    return grad_[i] + slope * (x - knots_[i]);
}

double ConvexTable::phi(double x) const {
    const std::size_t i = segment_of(knots_, x);
    const double slope = (grad_[i + 1] - grad_[i]) / (knots_[i + 1] - knots_[i]);
    const double dx = x - knots_[i];
    return cum_[i] + grad_[i] * dx + 0.5 * slope * dx * dx;
}

double score_var(double v, double s, const VarScoreSpec& spec) {
    const double ind = (s <= v) ? 1.0 : 0.0;
    if (!spec.h) return (ind - spec.alpha) * (v - s);
    return (ind - spec.alpha) * ((*spec.h)(v) - (*spec.h)(s));
}

double score_esc_component(double m, double v, double x_j, double s,
                           const EscScoreSpec& spec) {
    if (!(s > v)) return 0.0;
    if (!spec.phi) {
        const double d = x_j - m;
        return d * d;
    }
    const ConvexTable& phi = *spec.phi;
    return phi.dphi(m) * (m - x_j) - phi.phi(m) + phi.phi(x_j);
}

namespace {

double sum_left_to_right(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
}

} // namespace

ScorePair score_tuple(const ForecastRecord& f, std::span<const double> x,
                      const VarScoreSpec& vspec, const EscScoreSpec& espec) {
    if (f.esc.size() != x.size())
        throw std::invalid_argument("score_tuple: forecast has " +
                                    std::to_string(f.esc.size()) +
                                    " components, realization has " +
                                    std::to_string(x.size()));
    const double s = sum_left_to_right(x);
    ScorePair out;
    out.var_score = score_var(f.var, s, vspec);
    double esc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j)
        esc += score_esc_component(f.esc[j], f.var, x[j], s, espec);
    out.esc_score = esc;
    return out;
}

ScorePair score_tuple(const ForecastRecord& f, std::span<const double> x,
                      const VarScoreSpec& vspec,
                      std::span<const EscScoreSpec> especs) {
    if (f.esc.size() != x.size() || especs.size() != x.size())
        throw std::invalid_argument("score_tuple: dimension mismatch");
    const double s = sum_left_to_right(x);
    ScorePair out;
    out.var_score = score_var(f.var, s, vspec);
    double esc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j)
        esc += score_esc_component(f.esc[j], f.var, x[j], s, especs[j]);
    out.esc_score = esc;
    return out;
}

ScorePair score_tuple(const ForecastRecord& f, std::span<const double> x) {
    return score_tuple(f, x, VarScoreSpec{f.alpha, std::nullopt}, EscScoreSpec{});
}

double elementary_score_var(double eta, double v, double s, double alpha) {
    const double a = (s < v) ? 1.0 : 0.0;
    const double b = ((eta < v) ? 1.0 : 0.0) - ((eta < s) ? 1.0 : 0.0);
    return (a - alpha) * b;
}

double elementary_score_esc(double eta, double m, double v, double x_j, double s) {
    if (!(s > v)) return 0.0;
    if (m <= eta && eta < x_j) return x_j - eta;
    if (x_j <= eta && eta < m) return eta - x_j;
    return 0.0;
}

namespace {

void check_lengths(std::span<const ForecastRecord> forecasts,
                   const LossPanel& panel) {
    if (forecasts.empty())
        throw std::invalid_argument("empty forecast sequence");
    if (forecasts.size() != panel.rows())
        throw std::invalid_argument(
            "forecast/panel length mismatch: " + std::to_string(forecasts.size()) +
            " vs " + std::to_string(panel.rows()));
    for (const auto& f : forecasts)
        if (f.esc.size() != panel.cols())
            throw std::invalid_argument("forecast dimension mismatch");
}

struct SeriesView {
    std::vector<double> var, es; // per-time forecasts
    std::vector<std::vector<double>> esc; // per component
};

SeriesView collect(std::span<const ForecastRecord> forecasts, std::size_t d) {
    SeriesView sv;
    const std::size_t n = forecasts.size();
    sv.var.resize(n);
    sv.es.resize(n);
    sv.esc.assign(d, std::vector<double>(n));
    for (std::size_t t = 0; t < n; ++t) {
        sv.var[t] = forecasts[t].var;
        sv.es[t] = forecasts[t].es;
        for (std::size_t j = 0; j < d; ++j) sv.esc[j][t] = forecasts[t].esc[j];
    }
    return sv;
}

} // namespace

std::vector<double> score_var_series(std::span<const ForecastRecord> forecasts,
                                     const LossPanel& panel) {
    check_lengths(forecasts, panel);
    const std::size_t n = forecasts.size();
    std::vector<double> v(n), out(n);
    for (std::size_t t = 0; t < n; ++t) v[t] = forecasts[t].var;
    const auto& s = panel.aggregate();
    kernels::active().score_var_series(v.data(), s.data(), out.data(), n,
                                       forecasts.front().alpha);
    return out;
}

std::vector<double> score_esc_tuple_series(std::span<const ForecastRecord> forecasts,
                                           const LossPanel& panel) {
    check_lengths(forecasts, panel);
    const std::size_t n = forecasts.size();
    const std::size_t d = panel.cols();
    const auto sv = collect(forecasts, d);
    const auto& s = panel.aggregate();
    std::vector<double> total(n, 0.0), tmp(n);
    for (std::size_t j = 0; j < d; ++j) {
        const auto xj = panel.column(j);
        kernels::active().score_esc_sq_series(sv.esc[j].data(), sv.var.data(),
                                              xj.data(), s.data(), tmp.data(), n);
        for (std::size_t t = 0; t < n; ++t) total[t] += tmp[t];
    }
    return total;
}

std::vector<double> score_esc_component_series(
    std::span<const ForecastRecord> forecasts, const LossPanel& panel,
    std::size_t j) {
    check_lengths(forecasts, panel);
    if (j >= panel.cols())
        throw std::invalid_argument("score_esc_component_series: bad component");
    const std::size_t n = forecasts.size();
    std::vector<double> m(n), v(n), out(n);
    for (std::size_t t = 0; t < n; ++t) {
        m[t] = forecasts[t].esc[j];
        v[t] = forecasts[t].var;
    }
    const auto xj = panel.column(j);
    kernels::active().score_esc_sq_series(m.data(), v.data(), xj.data(),
                                          panel.aggregate().data(), out.data(), n);
    return out;
}

ScorePair average_scores(std::span<const ForecastRecord> forecasts,
                         const LossPanel& panel,
                         const std::optional<VarScoreSpec>& vspec,
                         const EscScoreSpec& espec) {
    check_lengths(forecasts, panel);
    const std::size_t n = forecasts.size();
    const bool defaults = !vspec || (!vspec->h && !espec.phi);
    if (defaults) {
        VarScoreSpec vs = vspec ? *vspec : VarScoreSpec{forecasts.front().alpha, {}};
        std::vector<double> v(n);
        for (std::size_t t = 0; t < n; ++t) v[t] = forecasts[t].var;
        std::vector<double> var_sc(n);
        kernels::active().score_var_series(v.data(), panel.aggregate().data(),
                                           var_sc.data(), n, vs.alpha);
        const auto esc_sc = score_esc_tuple_series(forecasts, panel);
        const auto& k = kernels::active();
        return {k.sum_comp(var_sc.data(), n) / static_cast<double>(n),
                k.sum_comp(esc_sc.data(), n) / static_cast<double>(n)};
    }
    std::vector<double> var_sc(n), esc_sc(n);
    for (std::size_t t = 0; t < n; ++t) {
        const ScorePair p = score_tuple(forecasts[t], panel.row(t), *vspec, espec);
        var_sc[t] = p.var_score;
        esc_sc[t] = p.esc_score;
    }
    return {mean_compensated(var_sc), mean_compensated(esc_sc)};
}

} // namespace esalloc
