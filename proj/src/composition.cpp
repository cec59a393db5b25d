#include "esalloc/composition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace esalloc {

ContrastMatrix::ContrastMatrix(std::size_t d) : d_(d) {
    if (d < 2)
        throw std::invalid_argument("ContrastMatrix: need d >= 2, got " +
                                    std::to_string(d));
}

double ContrastMatrix::at(std::size_t row, std::size_t col) const {
    // 1-based balance formula: column k has sqrt((d-k)/(d-k+1)) at row k,
    // -1/sqrt((d-k)(d-k+1)) at rows k+1..d, zero above.
    const double dk = static_cast<double>(d_ - (col + 1));
    if (row < col) return 0.0;
    if (row == col) return std::sqrt(dk / (dk + 1.0));
    return -1.0 / std::sqrt(dk * (dk + 1.0));
}

Matrix ContrastMatrix::dense() const {
    Matrix m(d_, d_ - 1);
    for (std::size_t r = 0; r < d_; ++r)
        for (std::size_t c = 0; c + 1 < d_; ++c) m(r, c) = at(r, c);
    return m;
}

ContrastMatrix contrast_matrix(std::size_t d) { return ContrastMatrix(d); }

namespace {

// Normalized shares can round onto the simplex boundary (a dominant
// component to exactly 1, an underflowed one to 0). Nudge to the nearest
// representable interior point; the sum stays within the simplex tolerance.
SimplexWeights to_interior(std::vector<double> w) {
    constexpr double lo = 1e-300;
    const double hi = 1.0 - std::numeric_limits<double>::epsilon();
    for (double& v : w) v = std::clamp(v, lo, hi);
    return SimplexWeights(std::move(w));
}

} // namespace

SimplexWeights closing(std::span<const double> x) {
    if (x.size() < 2)
        throw std::invalid_argument("closing: need at least 2 components");
    double sum = 0.0;
    for (double v : x) {
        if (!(v > 0.0))
            throw std::invalid_argument("closing: nonpositive component " +
                                        std::to_string(v));
        sum += v;
    }
    if (!(sum > 0.0)) throw std::invalid_argument("closing: zero sum");
    std::vector<double> w(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) w[j] = x[j] / sum;
    return to_interior(std::move(w));
}

std::vector<double> ilr(const SimplexWeights& w) {
    const std::size_t d = w.dim();
    std::vector<double> logw(d);
    for (std::size_t j = 0; j < d; ++j) logw[j] = std::log(w[j]);

    // Balance form with suffix log-sums: ilr_k = sqrt((d-k)/(d-k+1)) *
    // (ln w_k - mean of ln w over components k+1..d).
    std::vector<double> out(d - 1);
    double suffix = 0.0;
    for (std::size_t j = d; j-- > 1;) {
        suffix += logw[j];
        const double dk = static_cast<double>(d - j); // # of terms in suffix
        out[j - 1] = std::sqrt(dk / (dk + 1.0)) * (logw[j - 1] - suffix / dk);
    }
    return out;
}

SimplexWeights ilr_inv(std::span<const double> z) {
    const std::size_t d = z.size() + 1;
    if (z.empty()) throw std::invalid_argument("ilr_inv: empty input");
    for (double v : z)
        if (!std::isfinite(v))
            throw std::invalid_argument("ilr_inv: non-finite coordinate");

    // y = V z through the sparse column structure: row r picks up the
    // diagonal term of column r plus the negative tail of columns < r.
    std::vector<double> y(d, 0.0);
    double prefix = 0.0; // sum over k<r of z_k / sqrt((d-k)(d-k+1))
    for (std::size_t r = 0; r < d; ++r) {
        double v = -prefix;
        if (r + 1 < d) {
            const double dk = static_cast<double>(d - (r + 1));
            v += std::sqrt(dk / (dk + 1.0)) * z[r];
            prefix += z[r] / std::sqrt(dk * (dk + 1.0));
        }
        y[r] = v;
    }

    const double shift = *std::max_element(y.begin(), y.end());
    std::vector<double> ex(d);
    double sum = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
        ex[r] = std::exp(y[r] - shift);
        sum += ex[r];
    }
    for (double& v : ex) v /= sum;
    return to_interior(std::move(ex));
}

std::vector<double> build_covariates(std::span<const double> x, double s,
                                     double eps) {
    if (!(eps > 0.0))
        throw std::invalid_argument("build_covariates: eps must be positive");
    const std::size_t d = x.size();
    std::vector<double> pos(d), neg(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double u = x[j] * s;
        pos[j] = std::max(u, eps);
        neg[j] = std::max(-u, eps); // -min(u, -eps)
    }
    const auto zp = ilr(closing(pos));
    const auto zn = ilr(closing(neg));
    std::vector<double> out;
    out.reserve(zp.size() + zn.size());
    out.insert(out.end(), zp.begin(), zp.end());
    out.insert(out.end(), zn.begin(), zn.end());
    return out;
}

ThetaParams zero_theta(const SimplexWeights& w1, std::size_t q) {
    const std::size_t k = w1.dim() - 1;
    return ThetaParams{std::vector<double>(k, 0.0), Matrix(k, k), Matrix(k, q), w1};
}

SimplexWeights step_weights(const ThetaParams& theta, const SimplexWeights& w,
                            std::span<const double> y) {
    const std::size_t k = theta.tau.size();
    if (w.dim() != k + 1)
        throw std::invalid_argument("step_weights: weight dimension mismatch");
    if (theta.phi.rows() != k || theta.phi.cols() != k)
        throw std::invalid_argument("step_weights: Phi dimension mismatch");
    if (theta.psi.rows() != k || theta.psi.cols() != y.size())
        throw std::invalid_argument("step_weights: Psi/covariate dimension mismatch");

    const auto zw = ilr(w);
    std::vector<double> z(k);
    for (std::size_t r = 0; r < k; ++r) {
        double acc = theta.tau[r];
        for (std::size_t c = 0; c < k; ++c) acc += theta.phi(r, c) * zw[c];
        for (std::size_t c = 0; c < y.size(); ++c) acc += theta.psi(r, c) * y[c];
        z[r] = acc;
    }
    return ilr_inv(z);
}

SimplexWeights clamp_interior(const SimplexWeights& w, double floor_value,
                              std::size_t* clamp_count) {
    bool clamped = false;
    std::vector<double> v = w.values();
    for (double& c : v) {
        if (c < floor_value) {
            c = floor_value;
            clamped = true;
        }
    }
    if (!clamped) return w;
    if (clamp_count != nullptr) ++*clamp_count;
    return closing(v);
}

} // namespace esalloc
