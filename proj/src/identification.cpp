#include "esalloc/identification.hpp"

#include <stdexcept>

#include "esalloc/simd.hpp"

namespace esalloc {

double ident_var(double v, double s, double alpha) {
    return alpha - ((s <= v) ? 1.0 : 0.0);
}

double ident_esc(double m, double v, double x_j, double s) {
    return (s > v) ? (x_j - m) : 0.0;
}

double ident_es(double v, double e, double s, double alpha) {
    const double exc = (s > v) ? 1.0 : 0.0;
    return v - e - exc * (v - s) / (1.0 - alpha);
}

namespace {

void check_inputs(std::span<const ForecastRecord> forecasts,
                  const LossPanel& panel) {
    if (forecasts.empty())
        throw std::invalid_argument("ident_series: empty forecast sequence");
    if (forecasts.size() != panel.rows())
        throw std::invalid_argument("ident_series: forecast/panel length mismatch");
    for (const auto& f : forecasts)
        if (f.esc.size() != panel.cols())
            throw std::invalid_argument("ident_series: forecast dimension mismatch");
}

} // namespace

IdentSeries ident_series(std::span<const ForecastRecord> forecasts,
                         const LossPanel& panel, IdentKind kind, std::size_t j) {
    check_inputs(forecasts, panel);
    const std::size_t n = forecasts.size();
    const std::size_t d = panel.cols();
    const double alpha = forecasts.front().alpha;
    const auto& s = panel.aggregate();
    const auto& k = kernels::active();

    std::vector<double> v(n), e(n);
    for (std::size_t t = 0; t < n; ++t) {
        v[t] = forecasts[t].var;
        e[t] = forecasts[t].es;
    }

    IdentSeries out;
    out.kind = kind;
    switch (kind) {
    case IdentKind::var: {
        out.values = Matrix(n, 1);
        std::vector<double> col(n);
        k.ident_var_series(v.data(), s.data(), col.data(), n, alpha);
        for (std::size_t t = 0; t < n; ++t) out.values(t, 0) = col[t];
        out.columns = {"V_var"};
        break;
    }
    case IdentKind::es: {
        out.values = Matrix(n, 1);
        std::vector<double> col(n);
        k.ident_es_series(v.data(), e.data(), s.data(), col.data(), n, alpha);
        for (std::size_t t = 0; t < n; ++t) out.values(t, 0) = col[t];
        out.columns = {"V_es"};
        break;
    }
    case IdentKind::esc: {
        if (j >= d) throw std::invalid_argument("ident_series: bad component index");
        out.values = Matrix(n, 1);
        std::vector<double> m(n), col(n);
        for (std::size_t t = 0; t < n; ++t) m[t] = forecasts[t].esc[j];
        const auto xj = panel.column(j);
        k.ident_esc_series(m.data(), v.data(), xj.data(), s.data(), col.data(), n);
        for (std::size_t t = 0; t < n; ++t) out.values(t, 0) = col[t];
        out.columns = {"V_esc_" + std::to_string(j + 1)};
        break;
    }
    case IdentKind::tuple: {
        out.values = Matrix(n, d + 1);
        std::vector<double> col(n);
        k.ident_var_series(v.data(), s.data(), col.data(), n, alpha);
        for (std::size_t t = 0; t < n; ++t) out.values(t, 0) = col[t];
        out.columns = {"V_var"};
        std::vector<double> m(n);
        for (std::size_t c = 0; c < d; ++c) {
            for (std::size_t t = 0; t < n; ++t) m[t] = forecasts[t].esc[c];
            const auto xc = panel.column(c);
            k.ident_esc_series(m.data(), v.data(), xc.data(), s.data(),
                               col.data(), n);
            for (std::size_t t = 0; t < n; ++t) out.values(t, c + 1) = col[t];
            out.columns.push_back("V_esc_" + std::to_string(c + 1));
        }
        break;
    }
    }
    return out;
}

std::vector<double> average_ident(std::span<const ForecastRecord> forecasts,
                                  const LossPanel& panel, IdentKind kind,
                                  std::size_t j) {
    const IdentSeries series = ident_series(forecasts, panel, kind, j);
    const std::size_t n = series.values.rows();
    const std::size_t cols = series.values.cols();
    const auto& k = kernels::active();
    std::vector<double> col(n), means(cols);
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t t = 0; t < n; ++t) col[t] = series.values(t, c);
        means[c] = k.sum_comp(col.data(), n) / static_cast<double>(n);
    }
    return means;
}

} // namespace esalloc
