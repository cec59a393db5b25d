#include <doctest.h>

#include <cmath>
#include <vector>

#include "esalloc/murphy.hpp"
#include "esalloc/rng.hpp"
#include "esalloc/scoring.hpp"

using namespace esalloc;

namespace {

std::vector<ForecastRecord> wrap(std::vector<double> var,
                                 std::vector<std::vector<double>> esc,
                                 double alpha = 0.975) {
    std::vector<ForecastRecord> out;
    for (std::size_t t = 0; t < var.size(); ++t) {
        ForecastRecord f;
        f.alpha = alpha;
        f.var = var[t];
        f.esc = esc[t];
        double es = 0.0;
        for (double m : f.esc) es += m;
        f.es = es;
        out.push_back(f);
    }
    return out;
}

LossPanel panel_of(std::vector<std::vector<double>> rows) {
    const std::size_t d = rows.front().size();
    std::vector<double> vals;
    std::vector<std::int64_t> times;
    for (std::size_t t = 0; t < rows.size(); ++t) {
        times.push_back(static_cast<std::int64_t>(t + 1));
        for (double v : rows[t]) vals.push_back(v);
    }
    std::vector<std::string> names;
    for (std::size_t j = 1; j <= d; ++j) names.push_back("a" + std::to_string(j));
    return LossPanel(std::move(vals), std::move(times), std::move(names));
}

} // namespace

TEST_CASE("esc knots form the deduplicated union") {
    LossPanel p = panel_of({{3.0, 0.0}});
    auto fs = wrap({0.0}, {{1.0, 0.0}});
    CHECK(esc_knots(fs, p, 0) == std::vector<double>{1.0, 3.0});

    LossPanel p2 = panel_of({{2.0, 0.0}, {4.0, 0.0}});
    auto fs2 = wrap({0.0, 0.0}, {{1.0, 0.0}, {2.0, 0.0}});
    CHECK(esc_knots(fs2, p2, 0) == std::vector<double>{1.0, 2.0, 4.0});

    // duplicates collapse
    auto fs3 = wrap({0.0, 0.0}, {{2.0, 0.0}, {2.0, 0.0}});
    CHECK(esc_knots(fs3, p2, 0) == std::vector<double>{2.0, 4.0});
}

TEST_CASE("single-step esc curve: (x - eta) on [m, x)") {
    LossPanel p = panel_of({{3.0, 2.0}}); // s = 5 > v = 0
    auto fs = wrap({0.0}, {{1.0, 0.0}});
    const MurphyCurve c = murphy_curve_esc(fs, p, 0, "m");
    CHECK(c.value_at(2.0) == doctest::Approx(1.0));
    CHECK(c.value_at(1.0) == doctest::Approx(2.0));
    CHECK(c.value_at(3.0) == doctest::Approx(0.0));
    CHECK(c.value_at(0.99) == doctest::Approx(0.0));
    CHECK(c.value_at(3.01) == doctest::Approx(0.0));
    CHECK(c.left_limit_at(1.0) == doctest::Approx(0.0)); // jump at the forecast

    // m = x collapses to zero
    auto fs_eq = wrap({0.0}, {{3.0, 0.0}});
    const MurphyCurve z = murphy_curve_esc(fs_eq, p, 0, "m");
    for (double eta : {2.0, 3.0, 3.5})
        CHECK(z.value_at(eta) == doctest::Approx(0.0));

    // gate closed everywhere
    auto fs_gate = wrap({9.0}, {{1.0, 0.0}});
    const MurphyCurve g = murphy_curve_esc(fs_gate, p, 0, "m");
    for (std::size_t i = 0; i < g.knots.size(); ++i) CHECK(g.value[i] == 0.0);
}

TEST_CASE("single-step var curve is the flat step 0.975 on [1, 3)") {
    LossPanel p = panel_of({{2.0, 1.0}}); // s = 3
    auto fs = wrap({1.0}, {{1.0, 1.0}});
    const MurphyCurve c = murphy_curve_var(fs, p, "m");
    CHECK(c.value_at(1.0) == doctest::Approx(0.975));
    CHECK(c.value_at(2.0) == doctest::Approx(0.975));
    CHECK(c.left_limit_at(3.0) == doctest::Approx(0.975));
    CHECK(c.value_at(3.0) == doctest::Approx(0.0));
    CHECK(c.value_at(0.5) == doctest::Approx(0.0));

    // v = s at every step → identically zero
    auto fs_eq = wrap({3.0}, {{1.0, 1.0}});
    const MurphyCurve z = murphy_curve_var(fs_eq, p, "m");
    for (std::size_t i = 0; i < z.knots.size(); ++i) CHECK(z.value[i] == 0.0);

    // duplicated step changes nothing
    LossPanel p2 = panel_of({{2.0, 1.0}, {2.0, 1.0}});
    auto fs2 = wrap({1.0, 1.0}, {{1.0, 1.0}, {1.0, 1.0}});
    const MurphyCurve c2 = murphy_curve_var(fs2, p2, "m");
    CHECK(c2.value_at(2.0) == doctest::Approx(0.975));
}

TEST_CASE("tuple curve sums the component curves") {
    LossPanel p = panel_of({{3.0, 2.0}});
    auto fs = wrap({0.0}, {{1.0, 1.0}});
    const MurphyCurve c = murphy_curve_tuple(fs, p, "m");
    CHECK(c.value_at(1.5) == doctest::Approx((3.0 - 1.5) + (2.0 - 1.5)));

    // disjoint supports act independently
    LossPanel p2 = panel_of({{2.0, 20.0}});
    auto fs2 = wrap({0.0}, {{1.0, 10.0}});
    const MurphyCurve t2 = murphy_curve_tuple(fs2, p2, "m");
    const MurphyCurve e0 = murphy_curve_esc(fs2, p2, 0, "m");
    const MurphyCurve e1 = murphy_curve_esc(fs2, p2, 1, "m");
    for (double eta : {1.2, 1.9, 10.5, 19.0})
        CHECK(t2.value_at(eta) ==
              doctest::Approx(e0.value_at(eta) + e1.value_at(eta)));
}

TEST_CASE("murphy difference against a dense-grid oracle") {
    CounterRng rng(77);
    const std::size_t T = 40;
    std::vector<std::vector<double>> rows(T, std::vector<double>(2));
    std::vector<double> var_a(T), var_b(T);
    std::vector<std::vector<double>> esc_a(T, std::vector<double>(2)),
        esc_b(T, std::vector<double>(2));
    for (std::size_t t = 0; t < T; ++t) {
        rows[t][0] = rng.uniform(-2, 2);
        rows[t][1] = rng.uniform(-2, 2);
        var_a[t] = rng.uniform(-1, 1);
        var_b[t] = rng.uniform(-1, 1);
        for (std::size_t j = 0; j < 2; ++j) {
            esc_a[t][j] = rng.uniform(-2, 2);
            esc_b[t][j] = rng.uniform(-2, 2);
        }
    }
    LossPanel p = panel_of(rows);
    const MurphyCurve a = murphy_curve_esc(wrap(var_a, esc_a), p, 0, "a");
    const MurphyCurve b = murphy_curve_esc(wrap(var_b, esc_b), p, 0, "b");
    const MurphyCurve diff = murphy_difference(a, b);

    const double lo = diff.knots.front() - 0.5, hi = diff.knots.back() + 0.5;
    for (int i = 0; i < 10000; ++i) {
        const double eta = lo + (hi - lo) * i / 9999.0;
        const double expect = a.value_at(eta) - b.value_at(eta);
        CHECK(std::abs(diff.value_at(eta) - expect) <= 1e-12);
    }

    // identical curves difference to zero
    const MurphyCurve self = murphy_difference(a, a);
    for (std::size_t i = 0; i < self.knots.size(); ++i)
        CHECK(self.value[i] == doctest::Approx(0.0));

    // mismatched fingerprints are rejected
    LossPanel other = panel_of({{1.0, 0.5}, {0.2, 0.1}});
    const MurphyCurve c =
        murphy_curve_esc(wrap({0.0, 0.0}, {{1.0, 0.0}, {1.0, 0.0}}), other, 0, "c");
    CHECK_THROWS_AS((void)murphy_difference(a, c), std::invalid_argument);
}

TEST_CASE("dominance fraction is 1 against a dominated curve") {
    LossPanel p = panel_of({{3.0, 2.0}});
    auto good = wrap({0.0}, {{2.9, 0.0}}); // close forecast
    auto bad = wrap({0.0}, {{0.0, 0.0}});  // far forecast
    const MurphyCurve a = murphy_curve_esc(good, p, 0, "good");
    const MurphyCurve b = murphy_curve_esc(bad, p, 0, "bad");
    CHECK(dominance_fraction(a, b) == doctest::Approx(1.0));
    CHECK(dominance_fraction(b, a) < 1.0);
    CHECK(dominance_fraction(a, a) == doctest::Approx(1.0));
}

TEST_CASE("curve structure: support, piecewise linearity, mixture integral") {
    CounterRng rng(78);
    for (int instance = 0; instance < 20; ++instance) {
        const std::size_t T = 10 + static_cast<std::size_t>(rng.uniform(0, 40));
        std::vector<std::vector<double>> rows(T, std::vector<double>(2));
        std::vector<double> var(T);
        std::vector<std::vector<double>> esc(T, std::vector<double>(2));
        for (std::size_t t = 0; t < T; ++t) {
            rows[t][0] = rng.uniform(-2, 2);
            rows[t][1] = rng.uniform(-2, 2);
            var[t] = rng.uniform(-2, 2);
            esc[t][0] = rng.uniform(-2, 2);
            esc[t][1] = rng.uniform(-2, 2);
        }
        LossPanel p = panel_of(rows);
        auto fs = wrap(var, esc);
        const MurphyCurve c = murphy_curve_esc(fs, p, 0, "m");

        // vanishes at and beyond the sentinels
        CHECK(c.value.front() == 0.0);
        CHECK(c.value.back() == 0.0);
        CHECK(c.value_at(c.knots.front() - 1.0) == 0.0);
        CHECK(c.value_at(c.knots.back() + 1.0) == 0.0);

        // midpoints: interpolation equals direct evaluation
        std::vector<double> m(T), v(T);
        auto x = p.column(0);
        const auto& s = p.aggregate();
        for (std::size_t t = 0; t < T; ++t) {
            m[t] = fs[t].esc[0];
            v[t] = fs[t].var;
        }
        for (std::size_t i = 0; i + 1 < c.knots.size(); ++i) {
            const double mid = 0.5 * (c.knots[i] + c.knots[i + 1]);
            double direct = 0.0;
            for (std::size_t t = 0; t < T; ++t)
                direct += elementary_score_esc(mid, m[t], v[t], x[t], s[t]);
            direct /= static_cast<double>(T);
            CHECK(std::abs(c.value_at(mid) - direct) <= 1e-12);
            CHECK(c.value_at(mid) >= 0.0);
        }
        for (std::size_t i = 0; i < c.knots.size(); ++i) {
            CHECK(c.value[i] >= 0.0);
            CHECK(c.value_left[i] >= 0.0);
        }

        // twice the curve integral equals the mean square-loss esc score
        const auto series = score_esc_component_series(fs, p, 0);
        double mean_score = 0.0;
        for (double q : series) mean_score += q;
        mean_score /= static_cast<double>(T);
        CHECK(std::abs(2.0 * c.integral() - mean_score) <=
              1e-10 * (1.0 + mean_score));
    }
}
