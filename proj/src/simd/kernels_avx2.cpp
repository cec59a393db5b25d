// AVX2 variants of the batch kernels. Elementwise arithmetic mirrors the
// scalar reference exactly (mul/add/sub only, no FMA contraction); only the
// reduction order differs, which the equivalence tests bound.

#include "esalloc/simd.hpp"

#if defined(__x86_64__)

#include <cmath>
#include <immintrin.h>

namespace esalloc::kernels {
namespace avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline __m256d mask_to_one(__m256d mask) {
    return _mm256_and_pd(mask, _mm256_set1_pd(1.0));
}

inline __m256d vabs(__m256d v) {
    return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

} // namespace

double sum_comp(const double* x, std::size_t n) {
    const std::size_t nv = n & ~std::size_t(3);
    __m256d s = _mm256_setzero_pd();
    __m256d c = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        const __m256d t = _mm256_add_pd(s, v);
        const __m256d big_s = _mm256_cmp_pd(vabs(s), vabs(v), _CMP_GE_OQ);
        const __m256d corr_a = _mm256_add_pd(_mm256_sub_pd(s, t), v);
        const __m256d corr_b = _mm256_add_pd(_mm256_sub_pd(v, t), s);
        c = _mm256_add_pd(c, _mm256_blendv_pd(corr_b, corr_a, big_s));
        s = t;
    }
    // Combine lanes, then the tail, with the scalar recurrence.
    alignas(32) double sl[4], cl[4];
    _mm256_store_pd(sl, s);
    _mm256_store_pd(cl, c);
    double acc = 0.0, comp = cl[0] + cl[1] + cl[2] + cl[3];
    auto add = [&](double v) {
        const double t = acc + v;
        if (std::fabs(acc) >= std::fabs(v))
            comp += (acc - t) + v;
        else
            comp += (v - t) + acc;
        acc = t;
    };
    for (double v : sl) add(v);
    for (std::size_t i = nv; i < n; ++i) add(x[i]);
    return acc + comp;
}

double dot(const double* x, const double* y, std::size_t n) {
    const std::size_t nv = n & ~std::size_t(3);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d a = _mm256_loadu_pd(x + i);
        const __m256d b = _mm256_loadu_pd(y + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(a, b));
    }
    double s = hsum(acc);
    for (std::size_t i = nv; i < n; ++i) s += x[i] * y[i];
    return s;
}

void score_var_series(const double* v, const double* s, double* out,
                      std::size_t n, double alpha) {
    const std::size_t nv = n & ~std::size_t(3);
    const __m256d va = _mm256_set1_pd(alpha);
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d vv = _mm256_loadu_pd(v + i);
        const __m256d vs = _mm256_loadu_pd(s + i);
        const __m256d ind = mask_to_one(_mm256_cmp_pd(vs, vv, _CMP_LE_OQ));
        const __m256d res =
            _mm256_mul_pd(_mm256_sub_pd(ind, va), _mm256_sub_pd(vv, vs));
        _mm256_storeu_pd(out + i, res);
    }
    for (std::size_t i = nv; i < n; ++i) {
        const double ind = (s[i] <= v[i]) ? 1.0 : 0.0;
        out[i] = (ind - alpha) * (v[i] - s[i]);
    }
}

double score_var_sum_const(double v, const double* s, std::size_t n,
                           double alpha) {
    const std::size_t nv = n & ~std::size_t(3);
    const __m256d vv = _mm256_set1_pd(v);
    const __m256d va = _mm256_set1_pd(alpha);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d vs = _mm256_loadu_pd(s + i);
        const __m256d ind = mask_to_one(_mm256_cmp_pd(vs, vv, _CMP_LE_OQ));
        acc = _mm256_add_pd(
            acc, _mm256_mul_pd(_mm256_sub_pd(ind, va), _mm256_sub_pd(vv, vs)));
    }
    double r = hsum(acc);
    for (std::size_t i = nv; i < n; ++i) {
        const double ind = (s[i] <= v) ? 1.0 : 0.0;
        r += (ind - alpha) * (v - s[i]);
    }
    return r;
}

void score_esc_sq_series(const double* m, const double* v, const double* x,
                         const double* s, double* out, std::size_t n) {
    const std::size_t nv = n & ~std::size_t(3);
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d vm = _mm256_loadu_pd(m + i);
        const __m256d vv = _mm256_loadu_pd(v + i);
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vs = _mm256_loadu_pd(s + i);
        const __m256d gate = _mm256_cmp_pd(vs, vv, _CMP_GT_OQ);
        const __m256d d = _mm256_sub_pd(vx, vm);
        _mm256_storeu_pd(out + i, _mm256_and_pd(gate, _mm256_mul_pd(d, d)));
    }
    for (std::size_t i = nv; i < n; ++i) {
        const double d = x[i] - m[i];
        out[i] = (s[i] > v[i]) ? d * d : 0.0;
    }
}

double score_esc_sq_sum_const(double m, double v, const double* x,
                              const double* s, std::size_t n) {
    const std::size_t nv = n & ~std::size_t(3);
    const __m256d vm = _mm256_set1_pd(m);
    const __m256d vv = _mm256_set1_pd(v);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vs = _mm256_loadu_pd(s + i);
        const __m256d gate = _mm256_cmp_pd(vs, vv, _CMP_GT_OQ);
        const __m256d d = _mm256_sub_pd(vx, vm);
        acc = _mm256_add_pd(acc, _mm256_and_pd(gate, _mm256_mul_pd(d, d)));
    }
    double r = hsum(acc);
    for (std::size_t i = nv; i < n; ++i) {
        const double d = x[i] - m;
        r += (s[i] > v) ? d * d : 0.0;
    }
    return r;
}

void ident_var_series(const double* v, const double* s, double* out,
                      std::size_t n, double alpha) {
    const std::size_t nv = n & ~std::size_t(3);
    const __m256d va = _mm256_set1_pd(alpha);
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d vv = _mm256_loadu_pd(v + i);
        const __m256d vs = _mm256_loadu_pd(s + i);
        const __m256d ind = mask_to_one(_mm256_cmp_pd(vs, vv, _CMP_LE_OQ));
        _mm256_storeu_pd(out + i, _mm256_sub_pd(va, ind));
    }
    for (std::size_t i = nv; i < n; ++i)
        out[i] = alpha - ((s[i] <= v[i]) ? 1.0 : 0.0);
}

double ident_var_sum_const(double v, const double* s, std::size_t n,
                           double alpha) {
    const std::size_t nv = n & ~std::size_t(3);
    const __m256d vv = _mm256_set1_pd(v);
    const __m256d va = _mm256_set1_pd(alpha);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d vs = _mm256_loadu_pd(s + i);
        const __m256d ind = mask_to_one(_mm256_cmp_pd(vs, vv, _CMP_LE_OQ));
        acc = _mm256_add_pd(acc, _mm256_sub_pd(va, ind));
    }
    double r = hsum(acc);
    for (std::size_t i = nv; i < n; ++i)
        r += alpha - ((s[i] <= v) ? 1.0 : 0.0);
    return r;
}

void ident_esc_series(const double* m, const double* v, const double* x,
                      const double* s, double* out, std::size_t n) {
    const std::size_t nv = n & ~std::size_t(3);
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d vm = _mm256_loadu_pd(m + i);
        const __m256d vv = _mm256_loadu_pd(v + i);
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vs = _mm256_loadu_pd(s + i);
        const __m256d gate = _mm256_cmp_pd(vs, vv, _CMP_GT_OQ);
        _mm256_storeu_pd(out + i, _mm256_and_pd(gate, _mm256_sub_pd(vx, vm)));
    }
    for (std::size_t i = nv; i < n; ++i)
        out[i] = (s[i] > v[i]) ? (x[i] - m[i]) : 0.0;
}

double ident_esc_sum_const(double m, double v, const double* x,
                           const double* s, std::size_t n) {
    const std::size_t nv = n & ~std::size_t(3);
    const __m256d vm = _mm256_set1_pd(m);
    const __m256d vv = _mm256_set1_pd(v);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vs = _mm256_loadu_pd(s + i);
        const __m256d gate = _mm256_cmp_pd(vs, vv, _CMP_GT_OQ);
        acc = _mm256_add_pd(acc, _mm256_and_pd(gate, _mm256_sub_pd(vx, vm)));
    }
    double r = hsum(acc);
    for (std::size_t i = nv; i < n; ++i)
        r += (s[i] > v) ? (x[i] - m) : 0.0;
    return r;
}

void ident_es_series(const double* v, const double* e, const double* s,
                     double* out, std::size_t n, double alpha) {
    const std::size_t nv = n & ~std::size_t(3);
    const double w = 1.0 / (1.0 - alpha);
    const __m256d vw = _mm256_set1_pd(w);
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d vv = _mm256_loadu_pd(v + i);
        const __m256d ve = _mm256_loadu_pd(e + i);
        const __m256d vs = _mm256_loadu_pd(s + i);
        const __m256d exc = mask_to_one(_mm256_cmp_pd(vs, vv, _CMP_GT_OQ));
        const __m256d tail =
            _mm256_mul_pd(_mm256_mul_pd(vw, exc), _mm256_sub_pd(vv, vs));
        _mm256_storeu_pd(out + i,
                         _mm256_sub_pd(_mm256_sub_pd(vv, ve), tail));
    }
    for (std::size_t i = nv; i < n; ++i) {
        const double exc = (s[i] > v[i]) ? 1.0 : 0.0;
        out[i] = v[i] - e[i] - w * exc * (v[i] - s[i]);
    }
}

double ident_es_sum_const(double v, double e, const double* s, std::size_t n,
                          double alpha) {
    const std::size_t nv = n & ~std::size_t(3);
    const double w = 1.0 / (1.0 - alpha);
    const __m256d vv = _mm256_set1_pd(v);
    const __m256d vd = _mm256_set1_pd(v - e);
    const __m256d vw = _mm256_set1_pd(w);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d vs = _mm256_loadu_pd(s + i);
        const __m256d exc = mask_to_one(_mm256_cmp_pd(vs, vv, _CMP_GT_OQ));
        const __m256d tail =
            _mm256_mul_pd(_mm256_mul_pd(vw, exc), _mm256_sub_pd(vv, vs));
        acc = _mm256_add_pd(acc, _mm256_sub_pd(vd, tail));
    }
    double r = hsum(acc);
    for (std::size_t i = nv; i < n; ++i) {
        const double exc = (s[i] > v) ? 1.0 : 0.0;
        r += v - e - w * exc * (v - s[i]);
    }
    return r;
}

// The cmp predicate must be an immediate, hence the compile-time split on
// the left-limit flag.
template <bool Left>
double murphy_var_sum_impl(double eta, const double* v, const double* s,
                           std::size_t n, double alpha) {
    constexpr int cmp_eta = Left ? _CMP_LE_OQ : _CMP_LT_OQ;
    const std::size_t nv = n & ~std::size_t(3);
    const __m256d veta = _mm256_set1_pd(eta);
    const __m256d va = _mm256_set1_pd(alpha);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d vv = _mm256_loadu_pd(v + i);
        const __m256d vs = _mm256_loadu_pd(s + i);
        const __m256d a = mask_to_one(_mm256_cmp_pd(vs, vv, _CMP_LT_OQ));
        const __m256d bv = mask_to_one(_mm256_cmp_pd(veta, vv, cmp_eta));
        const __m256d bs = mask_to_one(_mm256_cmp_pd(veta, vs, cmp_eta));
        acc = _mm256_add_pd(
            acc, _mm256_mul_pd(_mm256_sub_pd(a, va), _mm256_sub_pd(bv, bs)));
    }
    double r = hsum(acc);
    for (std::size_t i = nv; i < n; ++i) {
        const double a = (s[i] < v[i]) ? 1.0 : 0.0;
        double b;
        if constexpr (!Left)
            b = ((eta < v[i]) ? 1.0 : 0.0) - ((eta < s[i]) ? 1.0 : 0.0);
        else
            b = ((eta <= v[i]) ? 1.0 : 0.0) - ((eta <= s[i]) ? 1.0 : 0.0);
        r += (a - alpha) * b;
    }
    return r;
}

double murphy_var_sum(double eta, const double* v, const double* s,
                      std::size_t n, double alpha, bool left) {
    return left ? murphy_var_sum_impl<true>(eta, v, s, n, alpha)
                : murphy_var_sum_impl<false>(eta, v, s, n, alpha);
}

template <bool Left>
double murphy_esc_sum_impl(double eta, const double* m, const double* v,
                           const double* x, const double* s, std::size_t n) {
    constexpr int cmp_lo = Left ? _CMP_LT_OQ : _CMP_LE_OQ; // m ? eta
    constexpr int cmp_hi = Left ? _CMP_LE_OQ : _CMP_LT_OQ; // eta ? x
    const std::size_t nv = n & ~std::size_t(3);
    const __m256d veta = _mm256_set1_pd(eta);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d vm = _mm256_loadu_pd(m + i);
        const __m256d vv = _mm256_loadu_pd(v + i);
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vs = _mm256_loadu_pd(s + i);
        const __m256d gate = _mm256_cmp_pd(vs, vv, _CMP_GT_OQ);
        const __m256d b1 = _mm256_and_pd(_mm256_cmp_pd(vm, veta, cmp_lo),
                                         _mm256_cmp_pd(veta, vx, cmp_hi));
        const __m256d b2 = _mm256_and_pd(_mm256_cmp_pd(vx, veta, cmp_lo),
                                         _mm256_cmp_pd(veta, vm, cmp_hi));
        const __m256d up = _mm256_and_pd(b1, _mm256_sub_pd(vx, veta));
        const __m256d dn = _mm256_and_pd(b2, _mm256_sub_pd(veta, vx));
        acc = _mm256_add_pd(acc,
                            _mm256_and_pd(gate, _mm256_add_pd(up, dn)));
    }
    double r = hsum(acc);
    for (std::size_t i = nv; i < n; ++i) {
        if (!(s[i] > v[i])) continue;
        if constexpr (!Left) {
            if (m[i] <= eta && eta < x[i])
                r += x[i] - eta;
            else if (x[i] <= eta && eta < m[i])
                r += eta - x[i];
        } else {
            if (m[i] < eta && eta <= x[i])
                r += x[i] - eta;
            else if (x[i] < eta && eta <= m[i])
                r += eta - x[i];
        }
    }
    return r;
}

double murphy_esc_sum(double eta, const double* m, const double* v,
                      const double* x, const double* s, std::size_t n,
                      bool left) {
    return left ? murphy_esc_sum_impl<true>(eta, m, v, x, s, n)
                : murphy_esc_sum_impl<false>(eta, m, v, x, s, n);
}

} // namespace avx2

const Ops* avx2_ops() {
    static const Ops ops = {
        &avx2::sum_comp,
        &avx2::dot,
        &avx2::score_var_series,
        &avx2::score_var_sum_const,
        &avx2::score_esc_sq_series,
        &avx2::score_esc_sq_sum_const,
        &avx2::ident_var_series,
        &avx2::ident_var_sum_const,
        &avx2::ident_esc_series,
        &avx2::ident_esc_sum_const,
        &avx2::ident_es_series,
        &avx2::ident_es_sum_const,
        &avx2::murphy_var_sum,
        &avx2::murphy_esc_sum,
    };
    if (__builtin_cpu_supports("avx2")) return &ops;
    return nullptr;
}

} // namespace esalloc::kernels

#else

namespace esalloc::kernels {
const Ops* avx2_ops() { return nullptr; }
} // namespace esalloc::kernels

#endif
