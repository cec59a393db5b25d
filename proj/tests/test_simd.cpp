// Equivalence of the AVX2 kernels against the scalar reference on random
// inputs, including ragged tails and boundary-tie cases.

#include <doctest.h>

#include <cmath>
#include <vector>

#include "esalloc/rng.hpp"
#include "esalloc/simd.hpp"

using namespace esalloc;

namespace {

struct Inputs {
    std::vector<double> m, v, x, s, e;
};

Inputs make_inputs(std::size_t n, std::uint64_t seed) {
    CounterRng rng(seed);
    Inputs in;
    in.m.resize(n);
    in.v.resize(n);
    in.x.resize(n);
    in.s.resize(n);
    in.e.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        in.m[i] = rng.uniform(-2, 2);
        in.v[i] = rng.uniform(-1, 3);
        in.x[i] = rng.uniform(-2, 2);
        // force exact ties with positive probability
        const double u = rng.next_double();
        in.s[i] = (u < 0.1) ? in.v[i] : rng.uniform(-1, 5);
        in.e[i] = rng.uniform(0, 4);
    }
    return in;
}

void check_close(double a, double b) {
    CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));
}

void check_series(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

} // namespace

TEST_CASE("avx2 kernels match the scalar reference") {
    const kernels::Ops* simd = kernels::avx2_ops();
    if (simd == nullptr) {
        MESSAGE("avx2 unavailable on this host; dispatch falls back to scalar");
        CHECK(kernels::active_name() == "scalar");
        return;
    }
    const kernels::Ops& ref = kernels::scalar_ops();
    const double alpha = 0.975;

    for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{3},
                          std::size_t{4}, std::size_t{8}, std::size_t{17},
                          std::size_t{1000}}) {
        const Inputs in = make_inputs(n, 1000 + n);
        const double* m = in.m.data();
        const double* v = in.v.data();
        const double* x = in.x.data();
        const double* s = in.s.data();
        const double* e = in.e.data();

        check_close(ref.sum_comp(x, n), simd->sum_comp(x, n));
        check_close(ref.dot(x, s, n), simd->dot(x, s, n));

        std::vector<double> a(n), b(n);
        ref.score_var_series(v, s, a.data(), n, alpha);
        simd->score_var_series(v, s, b.data(), n, alpha);
        check_series(a, b);

        ref.score_esc_sq_series(m, v, x, s, a.data(), n);
        simd->score_esc_sq_series(m, v, x, s, b.data(), n);
        check_series(a, b);

        ref.ident_var_series(v, s, a.data(), n, alpha);
        simd->ident_var_series(v, s, b.data(), n, alpha);
        check_series(a, b);

        ref.ident_esc_series(m, v, x, s, a.data(), n);
        simd->ident_esc_series(m, v, x, s, b.data(), n);
        check_series(a, b);

        ref.ident_es_series(v, e, s, a.data(), n, alpha);
        simd->ident_es_series(v, e, s, b.data(), n, alpha);
        check_series(a, b);

        check_close(ref.score_var_sum_const(0.5, s, n, alpha),
                    simd->score_var_sum_const(0.5, s, n, alpha));
        check_close(ref.score_esc_sq_sum_const(0.25, 0.5, x, s, n),
                    simd->score_esc_sq_sum_const(0.25, 0.5, x, s, n));
        check_close(ref.ident_var_sum_const(0.5, s, n, alpha),
                    simd->ident_var_sum_const(0.5, s, n, alpha));
        check_close(ref.ident_esc_sum_const(0.25, 0.5, x, s, n),
                    simd->ident_esc_sum_const(0.25, 0.5, x, s, n));
        check_close(ref.ident_es_sum_const(0.5, 1.0, s, n, alpha),
                    simd->ident_es_sum_const(0.5, 1.0, s, n, alpha));

        // Murphy kernels: probe at data points themselves so every tie
        // branch is exercised, both one-sided variants.
        for (bool left : {false, true}) {
            for (std::size_t i = 0; i < std::min<std::size_t>(n, 16); ++i) {
                for (double eta : {in.m[i], in.x[i], in.v[i], 0.123}) {
                    check_close(ref.murphy_var_sum(eta, v, s, n, alpha, left),
                                simd->murphy_var_sum(eta, v, s, n, alpha, left));
                    check_close(ref.murphy_esc_sum(eta, m, v, x, s, n, left),
                                simd->murphy_esc_sum(eta, m, v, x, s, n, left));
                }
            }
        }
    }
}

TEST_CASE("dispatch honors the environment override") {
    // The active table is one of the two implementations.
    const auto name = kernels::active_name();
    CHECK((name == "scalar" || name == "avx2"));
}
