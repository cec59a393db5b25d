#include <doctest.h>

#include <cmath>
#include <vector>

#include "esalloc/rng.hpp"
#include "esalloc/stattests.hpp"

using namespace esalloc;

namespace {

std::vector<double> ar1(double rho, double innov_sd, std::size_t T,
                        CounterRng& rng) {
    std::vector<double> x(T);
    double prev = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        prev = rho * prev + innov_sd * rng.next_gaussian();
        x[t] = prev;
    }
    return x;
}

} // namespace

TEST_CASE("hac on degenerate and iid series") {
    const std::vector<double> zeros(100, 0.0);
    auto [v0, b0] = hac_lrv(zeros);
    CHECK(v0 == 1e-300); // floored
    CHECK(b0 == 0.0);

    CounterRng rng(12);
    std::vector<double> x(100000);
    for (double& v : x) v = rng.next_gaussian();
    auto [v1, b1] = hac_lrv(x);
    CHECK(std::abs(v1 - 1.0) < 0.05);

    const std::vector<double> tiny(5, 1.0);
    CHECK_THROWS_AS((void)hac_lrv(tiny), std::invalid_argument);
}

TEST_CASE("hac matches the analytic ar(1) long-run variance") {
    CounterRng rng(13);
    const double rho = 0.5;
    // unit marginal variance: innovation sd = sqrt(1 - rho^2)
    const auto x = ar1(rho, std::sqrt(1.0 - rho * rho), 100000, rng);
    auto [lrv, bw] = hac_lrv(x);
    CHECK(std::abs(lrv - 3.0) < 0.3); // (1+rho)/(1-rho) = 3
    CHECK(bw > 1.0);
}

TEST_CASE("hac is shift invariant and nonnegative") {
    CounterRng rng(14);
    std::vector<double> x(500), y(500);
    for (std::size_t i = 0; i < 500; ++i) {
        x[i] = rng.uniform(-1, 1);
        y[i] = x[i] + 1234.5;
    }
    auto [vx, bx] = hac_lrv(x);
    auto [vy, by] = hac_lrv(y);
    CHECK(vx >= 0.0);
    CHECK(std::abs(vx - vy) < 1e-10 * (1.0 + vx));
    CHECK(bx == doctest::Approx(by).epsilon(1e-10));
}

TEST_CASE("dm test basics") {
    const std::vector<double> zeros(50, 0.0);
    const TestResult degen = dm_test(zeros, 0.05);
    CHECK(degen.degenerate);
    CHECK(degen.p_equal == 1.0);
    CHECK(degen.zone == Zone::none);

    CounterRng rng(15);
    std::vector<double> shifted(10000);
    for (double& v : shifted) v = 0.5 + rng.next_gaussian();
    const TestResult strong = dm_test(shifted, 0.05);
    CHECK(strong.p_equal < 1e-6);
    CHECK(strong.zone == Zone::red); // model with larger scores is worse

    // sign flip swaps the one-sided p-values exactly
    std::vector<double> flipped = shifted;
    for (double& v : flipped) v = -v;
    const TestResult mirror = dm_test(flipped, 0.05);
    CHECK(mirror.p_leq == doctest::Approx(strong.p_geq).epsilon(1e-12));
    CHECK(mirror.p_geq == doctest::Approx(strong.p_leq).epsilon(1e-12));
    CHECK(mirror.zone == Zone::green);
}

TEST_CASE("dm size under iid zero-mean differences") {
    std::size_t rejections = 0;
    const std::size_t reps = 1000, T = 500;
    for (std::size_t r = 0; r < reps; ++r) {
        CounterRng rng(10000 + r);
        std::vector<double> d(T);
        for (double& v : d) v = rng.next_gaussian();
        if (dm_test(d, 0.05).p_equal < 0.05) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / reps;
    CHECK(rate >= 0.03);
    CHECK(rate <= 0.07);
}

TEST_CASE("calibration zones follow the sign logic") {
    const std::vector<double> zeros(100, 0.0);
    CHECK(calibration_test(zeros, 0.05).zone == Zone::none); // degenerate

    CounterRng rng(16);
    std::vector<double> centered(5000);
    for (double& v : centered) v = rng.next_gaussian();
    CHECK(calibration_test(centered, 0.05).zone == Zone::yellow);

    // positive mean identification = under-estimation = red
    std::vector<double> positive = centered;
    for (double& v : positive) v += 0.2;
    CHECK(calibration_test(positive, 0.05).zone == Zone::red);

    // negative mean = over-estimation = green
    std::vector<double> negative = centered;
    for (double& v : negative) v -= 0.2;
    CHECK(calibration_test(negative, 0.05).zone == Zone::green);

    // monotone in a location shift: zones move green -> yellow -> red
    int last = -1;
    for (double shift : {-0.2, 0.0, 0.2}) {
        std::vector<double> s = centered;
        for (double& v : s) v += shift;
        const Zone z = calibration_test(s, 0.05).zone;
        const int ord = (z == Zone::green) ? 0 : (z == Zone::yellow ? 1 : 2);
        CHECK(ord >= last);
        last = ord;
    }
}

TEST_CASE("wald joint test at the null point and under shifts") {
    // exact zero mean vector: statistic 0, p = 1
    Matrix zero(40, 2);
    for (std::size_t t = 0; t < 40; ++t) {
        zero(t, 0) = (t % 2 == 0) ? 1.0 : -1.0;
        zero(t, 1) = (t % 2 == 0) ? -2.0 : 2.0;
    }
    const TestResult at_null = wald_joint(zero, 0.05, WaldMode::two_sided);
    CHECK(at_null.statistic == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(at_null.p_equal == doctest::Approx(1.0));

    // var at truth, secondary shifted +0.5: the <=lex null must reject
    CounterRng rng(17);
    const std::size_t T = 10000;
    Matrix shifted(T, 2);
    for (std::size_t t = 0; t < T; ++t) {
        shifted(t, 0) = rng.next_gaussian();
        shifted(t, 1) = 0.5 + rng.next_gaussian();
    }
    const TestResult lex = wald_joint(shifted, 0.05, WaldMode::leq_lex);
    CHECK(lex.p_geq < 0.01); // p of the <=lex null
    CHECK(lex.zone == Zone::red);
    const TestResult other = wald_joint(shifted, 0.05, WaldMode::geq_lex);
    CHECK(other.p_leq > 0.2); // >=lex null is compatible with the shift

    CHECK_THROWS_AS((void)wald_joint(Matrix(5, 2), 0.05), std::invalid_argument);
    CHECK_THROWS_AS((void)wald_joint(Matrix(100, 1), 0.05), std::invalid_argument);
}

TEST_CASE("wald two-sided size under the joint null") {
    std::size_t rejections = 0;
    const std::size_t reps = 1000, T = 500;
    for (std::size_t r = 0; r < reps; ++r) {
        CounterRng rng(50000 + r);
        Matrix m(T, 2);
        for (std::size_t t = 0; t < T; ++t) {
            m(t, 0) = rng.next_gaussian();
            m(t, 1) = rng.next_gaussian();
        }
        if (wald_joint(m, 0.05).p_equal < 0.05) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / reps;
    CHECK(rate >= 0.03);
    CHECK(rate <= 0.08);
}

TEST_CASE("wald ridge flag on a singular covariance") {
    const std::size_t T = 60;
    CounterRng rng(19);
    Matrix m(T, 2);
    for (std::size_t t = 0; t < T; ++t) {
        const double v = rng.next_gaussian();
        m(t, 0) = v;
        m(t, 1) = 2.0 * v; // perfectly collinear
    }
    const TestResult res = wald_joint(m, 0.05);
    bool flagged = false;
    for (const auto& f : res.flags)
        if (f == "ridge_regularized") flagged = true;
    CHECK(flagged);
}
