#include "esalloc/simd.hpp"

#include <cmath>

namespace esalloc::kernels {
namespace scalar {

double sum_comp(const double* x, std::size_t n) {
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = x[i];
        const double t = s + v;
        if (std::fabs(s) >= std::fabs(v))
            c += (s - t) + v;
        else
            c += (v - t) + s;
        s = t;
    }
    return s + c;
}

double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void score_var_series(const double* v, const double* s, double* out,
                      std::size_t n, double alpha) {
    for (std::size_t i = 0; i < n; ++i) {
        const double ind = (s[i] <= v[i]) ? 1.0 : 0.0;
        out[i] = (ind - alpha) * (v[i] - s[i]);
    }
}

double score_var_sum_const(double v, const double* s, std::size_t n,
                           double alpha) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ind = (s[i] <= v) ? 1.0 : 0.0;
        acc += (ind - alpha) * (v - s[i]);
    }
    return acc;
}

void score_esc_sq_series(const double* m, const double* v, const double* x,
                         const double* s, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - m[i];
        out[i] = (s[i] > v[i]) ? d * d : 0.0;
    }
}

double score_esc_sq_sum_const(double m, double v, const double* x,
                              const double* s, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - m;
        acc += (s[i] > v) ? d * d : 0.0;
    }
    return acc;
}

void ident_var_series(const double* v, const double* s, double* out,
                      std::size_t n, double alpha) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = alpha - ((s[i] <= v[i]) ? 1.0 : 0.0);
}

double ident_var_sum_const(double v, const double* s, std::size_t n,
                           double alpha) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += alpha - ((s[i] <= v) ? 1.0 : 0.0);
    return acc;
}

void ident_esc_series(const double* m, const double* v, const double* x,
                      const double* s, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = (s[i] > v[i]) ? (x[i] - m[i]) : 0.0;
}

double ident_esc_sum_const(double m, double v, const double* x,
                           const double* s, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += (s[i] > v) ? (x[i] - m) : 0.0;
    return acc;
}

void ident_es_series(const double* v, const double* e, const double* s,
                     double* out, std::size_t n, double alpha) {
    const double w = 1.0 / (1.0 - alpha);
    for (std::size_t i = 0; i < n; ++i) {
        const double exc = (s[i] > v[i]) ? 1.0 : 0.0;
        out[i] = v[i] - e[i] - w * exc * (v[i] - s[i]);
    }
}

double ident_es_sum_const(double v, double e, const double* s, std::size_t n,
                          double alpha) {
    const double w = 1.0 / (1.0 - alpha);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double exc = (s[i] > v) ? 1.0 : 0.0;
        acc += v - e - w * exc * (v - s[i]);
    }
    return acc;
}

double murphy_var_sum(double eta, const double* v, const double* s,
                      std::size_t n, double alpha, bool left) {
    double acc = 0.0;
    if (!left) {
        for (std::size_t i = 0; i < n; ++i) {
            const double a = (s[i] < v[i]) ? 1.0 : 0.0;
            const double b = ((eta < v[i]) ? 1.0 : 0.0) - ((eta < s[i]) ? 1.0 : 0.0);
            acc += (a - alpha) * b;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double a = (s[i] < v[i]) ? 1.0 : 0.0;
            const double b = ((eta <= v[i]) ? 1.0 : 0.0) - ((eta <= s[i]) ? 1.0 : 0.0);
            acc += (a - alpha) * b;
        }
    }
    return acc;
}

double murphy_esc_sum(double eta, const double* m, const double* v,
                      const double* x, const double* s, std::size_t n,
                      bool left) {
    double acc = 0.0;
    if (!left) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!(s[i] > v[i])) continue;
            if (m[i] <= eta && eta < x[i])
                acc += x[i] - eta;
            else if (x[i] <= eta && eta < m[i])
                acc += eta - x[i];
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            if (!(s[i] > v[i])) continue;
            if (m[i] < eta && eta <= x[i])
                acc += x[i] - eta;
            else if (x[i] < eta && eta <= m[i])
                acc += eta - x[i];
        }
    }
    return acc;
}

} // namespace scalar

const Ops& scalar_ops() {
    static const Ops ops = {
        &scalar::sum_comp,
        &scalar::dot,
        &scalar::score_var_series,
        &scalar::score_var_sum_const,
        &scalar::score_esc_sq_series,
        &scalar::score_esc_sq_sum_const,
        &scalar::ident_var_series,
        &scalar::ident_var_sum_const,
        &scalar::ident_esc_series,
        &scalar::ident_esc_sum_const,
        &scalar::ident_es_series,
        &scalar::ident_es_sum_const,
        &scalar::murphy_var_sum,
        &scalar::murphy_esc_sum,
    };
    return ops;
}

} // namespace esalloc::kernels
