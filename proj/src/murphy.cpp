#include "esalloc/murphy.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "esalloc/simd.hpp"

namespace esalloc {

namespace {

std::uint64_t fnv_bytes(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ull;
    }
    return h;
}

std::uint64_t fingerprint_of(const LossPanel& panel, const std::string& target) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    h = fnv_bytes(h, panel.times().data(),
                  panel.times().size() * sizeof(std::int64_t));
    h = fnv_bytes(h, panel.aggregate().data(),
                  panel.aggregate().size() * sizeof(double));
    h = fnv_bytes(h, target.data(), target.size());
    return h;
}

void check_period(std::span<const ForecastRecord> forecasts,
                  const LossPanel& panel) {
    if (forecasts.empty())
        throw std::invalid_argument("murphy: empty out-of-sample period");
    if (forecasts.size() != panel.rows())
        throw std::invalid_argument("murphy: forecast/panel length mismatch");
    for (const auto& f : forecasts)
        if (f.esc.size() != panel.cols())
            throw std::invalid_argument("murphy: forecast dimension mismatch");
}

std::vector<double> dedup_sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// Knot vector with one sentinel beyond each extreme of the generating set.
std::vector<double> with_sentinels(const std::vector<double>& d) {
    const double lo = d.front(), hi = d.back();
    const double delta = (hi > lo) ? 0.05 * (hi - lo) : 1.0;
    std::vector<double> knots;
    knots.reserve(d.size() + 2);
    knots.push_back(lo - delta);
    knots.insert(knots.end(), d.begin(), d.end());
    knots.push_back(hi + delta);
    return knots;
}

struct Arrays {
    std::vector<double> m, v; // per-time forecasts (m unused for VaR curves)
    const std::vector<double>* s = nullptr;
    std::vector<double> x;
};

MurphyCurve build_curve(const std::vector<double>& generating,
                        std::size_t n_obs, const std::string& label,
                        const std::string& target, std::uint64_t fp,
                        const auto& eval) {
    MurphyCurve curve;
    curve.label = label;
    curve.target = target;
    curve.fingerprint = fp;
    curve.knots = with_sentinels(generating);
    curve.value.resize(curve.knots.size());
    curve.value_left.resize(curve.knots.size());
    const double inv_n = 1.0 / static_cast<double>(n_obs);
    for (std::size_t i = 0; i < curve.knots.size(); ++i) {
        curve.value[i] = eval(curve.knots[i], false) * inv_n;
        curve.value_left[i] = eval(curve.knots[i], true) * inv_n;
    }
    return curve;
}

} // namespace

double MurphyCurve::value_at(double eta) const {
    if (knots.empty() || eta < knots.front() || eta > knots.back()) return 0.0;
    const auto it = std::lower_bound(knots.begin(), knots.end(), eta);
    const std::size_t i = static_cast<std::size_t>(it - knots.begin());
    if (i < knots.size() && knots[i] == eta) return value[i];
    // knots[i-1] < eta < knots[i]
    const double x0 = knots[i - 1], x1 = knots[i];
    const double y0 = value[i - 1], y1 = value_left[i];
    return y0 + (y1 - y0) * (eta - x0) / (x1 - x0);
}

double MurphyCurve::left_limit_at(double eta) const {
    if (knots.empty() || eta <= knots.front() || eta > knots.back()) return 0.0;
    const auto it = std::lower_bound(knots.begin(), knots.end(), eta);
    const std::size_t i = static_cast<std::size_t>(it - knots.begin());
    if (i < knots.size() && knots[i] == eta) return value_left[i];
    const double x0 = knots[i - 1], x1 = knots[i];
    const double y0 = value[i - 1], y1 = value_left[i];
    return y0 + (y1 - y0) * (eta - x0) / (x1 - x0);
}

double MurphyCurve::integral() const {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
        acc += 0.5 * (value[i] + value_left[i + 1]) * (knots[i + 1] - knots[i]);
    return acc;
}

std::vector<double> esc_knots(std::span<const ForecastRecord> forecasts,
                              const LossPanel& panel, std::size_t j) {
    check_period(forecasts, panel);
    if (j >= panel.cols())
        throw std::invalid_argument("esc_knots: bad component index");
    std::vector<double> pts;
    pts.reserve(2 * forecasts.size());
    for (std::size_t t = 0; t < forecasts.size(); ++t) {
        pts.push_back(panel.at(t, j));
        pts.push_back(forecasts[t].esc[j]);
    }
    return dedup_sorted(std::move(pts));
}

MurphyCurve murphy_curve_esc(std::span<const ForecastRecord> forecasts,
                             const LossPanel& panel, std::size_t j,
                             const std::string& label) {
    const auto generating = esc_knots(forecasts, panel, j);
    const std::size_t n = forecasts.size();
    std::vector<double> m(n), v(n);
    for (std::size_t t = 0; t < n; ++t) {
        m[t] = forecasts[t].esc[j];
        v[t] = forecasts[t].var;
    }
    const auto xj = panel.column(j);
    const auto& s = panel.aggregate();
    const auto& k = kernels::active();
    const std::string target = "esc_" + std::to_string(j + 1);
    return build_curve(generating, n, label, target,
                       fingerprint_of(panel, target),
                       [&](double eta, bool left) {
                           return k.murphy_esc_sum(eta, m.data(), v.data(),
                                                   xj.data(), s.data(), n, left);
                       });
}

MurphyCurve murphy_curve_var(std::span<const ForecastRecord> forecasts,
                             const LossPanel& panel, const std::string& label) {
    check_period(forecasts, panel);
    const std::size_t n = forecasts.size();
    const double alpha = forecasts.front().alpha;
    std::vector<double> v(n);
    std::vector<double> pts;
    pts.reserve(2 * n);
    for (std::size_t t = 0; t < n; ++t) {
        v[t] = forecasts[t].var;
        pts.push_back(v[t]);
        pts.push_back(panel.aggregate()[t]);
    }
    const auto generating = dedup_sorted(std::move(pts));
    const auto& s = panel.aggregate();
    const auto& k = kernels::active();
    return build_curve(generating, n, label, "var", fingerprint_of(panel, "var"),
                       [&](double eta, bool left) {
                           return k.murphy_var_sum(eta, v.data(), s.data(), n,
                                                   alpha, left);
                       });
}

MurphyCurve murphy_curve_tuple(std::span<const ForecastRecord> forecasts,
                               const LossPanel& panel, const std::string& label) {
    check_period(forecasts, panel);
    const std::size_t n = forecasts.size();
    const std::size_t d = panel.cols();
    std::vector<double> generating;
    for (std::size_t j = 0; j < d; ++j) {
        const auto kj = esc_knots(forecasts, panel, j);
        generating.insert(generating.end(), kj.begin(), kj.end());
    }
    generating = dedup_sorted(std::move(generating));

    std::vector<double> v(n);
    std::vector<std::vector<double>> m(d, std::vector<double>(n));
    std::vector<std::vector<double>> x(d);
    for (std::size_t t = 0; t < n; ++t) v[t] = forecasts[t].var;
    for (std::size_t j = 0; j < d; ++j) {
        x[j] = panel.column(j);
        for (std::size_t t = 0; t < n; ++t) m[j][t] = forecasts[t].esc[j];
    }
    const auto& s = panel.aggregate();
    const auto& k = kernels::active();
    return build_curve(generating, n, label, "esc_tuple",
                       fingerprint_of(panel, "esc_tuple"),
                       [&](double eta, bool left) {
                           double acc = 0.0;
                           for (std::size_t j = 0; j < d; ++j)
                               acc += k.murphy_esc_sum(eta, m[j].data(), v.data(),
                                                       x[j].data(), s.data(), n,
                                                       left);
                           return acc;
                       });
}

MurphyCurve murphy_difference(const MurphyCurve& a, const MurphyCurve& b) {
    if (a.fingerprint != b.fingerprint)
        throw std::invalid_argument(
            "murphy_difference: curves come from different panels or targets");
    std::vector<double> merged = a.knots;
    merged.insert(merged.end(), b.knots.begin(), b.knots.end());
    merged = dedup_sorted(std::move(merged));

    MurphyCurve out;
    out.label = a.label + "-" + b.label;
    out.target = a.target;
    out.fingerprint = a.fingerprint;
    out.knots = merged;
    out.value.resize(merged.size());
    out.value_left.resize(merged.size());
    for (std::size_t i = 0; i < merged.size(); ++i) {
        out.value[i] = a.value_at(merged[i]) - b.value_at(merged[i]);
        out.value_left[i] = a.left_limit_at(merged[i]) - b.left_limit_at(merged[i]);
    }
    return out;
}

double dominance_fraction(const MurphyCurve& a, const MurphyCurve& b) {
    const MurphyCurve diff = murphy_difference(a, b);
    std::size_t at_or_below = 0, total = 0;
    for (std::size_t i = 0; i < diff.knots.size(); ++i) {
        total += 2;
        if (diff.value[i] <= 0.0) ++at_or_below;
        if (diff.value_left[i] <= 0.0) ++at_or_below;
    }
    return total == 0 ? 1.0
                      : static_cast<double>(at_or_below) / static_cast<double>(total);
}

void write_murphy_csv(const std::string& path,
                      std::span<const MurphyCurve> curves) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write murphy file: " + path);
    out << "eta,value,model,target\n";
    for (const auto& c : curves) {
        for (std::size_t i = 0; i < c.knots.size(); ++i) {
            if (c.value_left[i] != c.value[i])
                out << format_double(c.knots[i]) << ','
                    << format_double(c.value_left[i]) << ',' << c.label << ','
                    << c.target << '\n';
            out << format_double(c.knots[i]) << ',' << format_double(c.value[i])
                << ',' << c.label << ',' << c.target << '\n';
        }
    }
}

} // namespace esalloc
