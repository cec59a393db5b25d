// Batch kernels for the arithmetic inner loops: per-observation scores,
// identification values, elementary (Murphy) scores, dot products and
// compensated sums. A scalar reference implementation always exists; an
// AVX2 variant is selected at runtime on capable x86-64 hosts and is
// equivalence-tested against the reference.
//
// Indicator conventions are fixed bit-exactly across all kernels:
// {s <= v} closed, {s > v} strict, and the elementary VaR kernel uses the
// strict {s < v}. The `left` flag on the Murphy kernels evaluates the left
// limit in eta instead of the value at eta (swapped strict/closed bounds).

#pragma once

#include <cstddef>
#include <string_view>

namespace esalloc::kernels {

struct Ops {
    double (*sum_comp)(const double* x, std::size_t n);
    double (*dot)(const double* x, const double* y, std::size_t n);

    // (1{s<=v} - alpha) * (v - s), elementwise / reduced with constant v.
    void (*score_var_series)(const double* v, const double* s, double* out,
                             std::size_t n, double alpha);
    double (*score_var_sum_const)(double v, const double* s, std::size_t n,
                                  double alpha);

    // 1{s>v} * (x - m)^2.
    void (*score_esc_sq_series)(const double* m, const double* v,
                                const double* x, const double* s, double* out,
                                std::size_t n);
    double (*score_esc_sq_sum_const)(double m, double v, const double* x,
                                     const double* s, std::size_t n);

    // alpha - 1{s<=v}.
    void (*ident_var_series)(const double* v, const double* s, double* out,
                             std::size_t n, double alpha);
    double (*ident_var_sum_const)(double v, const double* s, std::size_t n,
                                  double alpha);

    // 1{s>v} * (x - m).
    void (*ident_esc_series)(const double* m, const double* v, const double* x,
                             const double* s, double* out, std::size_t n);
    double (*ident_esc_sum_const)(double m, double v, const double* x,
                                  const double* s, std::size_t n);

    // v - e - 1{s>v} * (v - s) / (1 - alpha).
    void (*ident_es_series)(const double* v, const double* e, const double* s,
                            double* out, std::size_t n, double alpha);
    double (*ident_es_sum_const)(double v, double e, const double* s,
                                 std::size_t n, double alpha);

    // Sum over observations of the elementary VaR / ESC scores at eta.
    double (*murphy_var_sum)(double eta, const double* v, const double* s,
                             std::size_t n, double alpha, bool left);
    double (*murphy_esc_sum)(double eta, const double* m, const double* v,
                             const double* x, const double* s, std::size_t n,
                             bool left);
};

/// Kernel table picked at startup (env ESALLOC_SIMD=scalar|avx2 overrides).
const Ops& active();
std::string_view active_name();

/// Scalar reference kernels, always available.
const Ops& scalar_ops();

/// AVX2 kernels, or nullptr when the build or host lacks them.
const Ops* avx2_ops();

} // namespace esalloc::kernels
