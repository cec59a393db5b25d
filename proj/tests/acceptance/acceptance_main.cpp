// Acceptance suite: every criterion prints one [PASS]/[FAIL] line and the
// binary exits with the number of failed criteria. Criteria with stated
// runtime budgets fail when the budget is exceeded.
//
// Usage: acceptance [--criterion N] [--cli PATH]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "esalloc/composition.hpp"
#include "esalloc/harness.hpp"
#include "esalloc/identification.hpp"
#include "esalloc/mathx.hpp"
#include "esalloc/models.hpp"
#include "esalloc/murphy.hpp"
#include "esalloc/rng.hpp"
#include "esalloc/scoring.hpp"
#include "esalloc/simd.hpp"
#include "esalloc/stattests.hpp"

using namespace esalloc;

namespace {

std::string g_cli_path;

struct Draws {
    std::vector<double> x1, s; // component of interest and the aggregate
};

// Bivariate pair (X_1, S) from a correlated Gaussian couple.
Draws gaussian_pair_draws(std::size_t n, double rho, std::uint64_t seed) {
    CounterRng rng(seed);
    Draws d;
    d.x1.resize(n);
    d.s.resize(n);
    const double mix = std::sqrt(1.0 - rho * rho);
    for (std::size_t i = 0; i < n; ++i) {
        const double z1 = rng.next_gaussian();
        const double z2 = rng.next_gaussian();
        d.x1[i] = z1;
        d.s[i] = z1 + (rho * z1 + mix * z2);
    }
    return d;
}

struct PairedStats {
    double mean = 0.0;
    double se = 0.0;
};

PairedStats paired(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double m = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        m += d;
        m2 += d * d;
    }
    m /= static_cast<double>(n);
    const double var = m2 / static_cast<double>(n) - m * m;
    return {m, std::sqrt(std::max(var, 0.0) / static_cast<double>(n))};
}

bool criterion_1(std::string& detail) {
    const double alpha = 0.975;
    const double rho = 0.3;
    const std::size_t N = 1000000;
    const Draws d = gaussian_pair_draws(N, rho, 20240101);

    const double sd_s = std::sqrt(2.0 + 2.0 * rho);
    const double z_a = normal_icdf(alpha);
    const double var_true = sd_s * z_a;
    const double esc_true = (1.0 + rho) / sd_s * normal_pdf(z_a) / (1.0 - alpha);

    const int half = 10;
    const double step = 0.05;
    const auto& k = kernels::active();

    // mean scores over the grid
    std::vector<double> mean_var(2 * half + 1);
    for (int vi = -half; vi <= half; ++vi)
        mean_var[vi + half] = k.score_var_sum_const(var_true + vi * step,
                                                    d.s.data(), N, alpha) /
                              static_cast<double>(N);
    std::vector<std::vector<double>> mean_esc(
        2 * half + 1, std::vector<double>(2 * half + 1));
    for (int mi = -half; mi <= half; ++mi)
        for (int vi = -half; vi <= half; ++vi)
            mean_esc[mi + half][vi + half] =
                k.score_esc_sq_sum_const(esc_true + mi * step,
                                         var_true + vi * step, d.x1.data(),
                                         d.s.data(), N) /
                static_cast<double>(N);

    // lexicographic argmin over the whole grid
    int best_m = -half, best_v = -half;
    for (int mi = -half; mi <= half; ++mi)
        for (int vi = -half; vi <= half; ++vi) {
            const ScorePair cand{mean_var[vi + half], mean_esc[mi + half][vi + half]};
            const ScorePair best{mean_var[best_v + half],
                                 mean_esc[best_m + half][best_v + half]};
            if (lex_less(cand, best)) {
                best_m = mi;
                best_v = vi;
            }
        }
    if (best_m != 0 || best_v != 0) {
        detail = "argmin off truth: m offset " + std::to_string(best_m) +
                 ", v offset " + std::to_string(best_v);
        return false;
    }

    // neighbor separation at >= 3 MC standard errors (paired differences)
    std::vector<double> base(N), alt(N);
    double min_ratio = 1e300;
    for (int dv : {-1, 1}) {
        std::vector<double> vv(N, var_true);
        k.score_var_series(vv.data(), d.s.data(), base.data(), N, alpha);
        std::vector<double> vn(N, var_true + dv * step);
        k.score_var_series(vn.data(), d.s.data(), alt.data(), N, alpha);
        const PairedStats ps = paired(alt, base);
        min_ratio = std::min(min_ratio, ps.mean / ps.se);
    }
    for (int dm : {-1, 1}) {
        std::vector<double> m0(N, esc_true), v0(N, var_true);
        std::vector<double> mn(N, esc_true + dm * step);
        k.score_esc_sq_series(m0.data(), v0.data(), d.x1.data(), d.s.data(),
                              base.data(), N);
        k.score_esc_sq_series(mn.data(), v0.data(), d.x1.data(), d.s.data(),
                              alt.data(), N);
        const PairedStats ps = paired(alt, base);
        min_ratio = std::min(min_ratio, ps.mean / ps.se);
    }
    detail = "argmin at truth; min neighbor separation " +
             std::to_string(min_ratio) + " se";
    return min_ratio >= 3.0;
}

bool criterion_2(std::string& detail) {
    const double alpha = 0.975;
    const std::size_t N = 1000000;
    SimConfig sim;
    sim.d = 3;
    sim.T = N;
    sim.rho = 0.3;
    sim.garch = {SimGarch{0.05, 0.0, 0.0}}; // constant volatility
    const SynthTruth t = synth_ccc_gaussian(sim, alpha, 97);

    std::vector<ForecastRecord> fs(N);
    for (std::size_t i = 0; i < N; ++i) {
        fs[i].alpha = alpha;
        fs[i].var = t.true_var[i];
        fs[i].es = t.true_es[i];
        fs[i].esc = {t.true_esc(i, 0), t.true_esc(i, 1), t.true_esc(i, 2)};
    }

    double worst = 0.0;
    auto check = [&](const IdentSeries& series) {
        for (std::size_t c = 0; c < series.values.cols(); ++c) {
            double m = 0.0, m2 = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const double v = series.values(i, c);
                m += v;
                m2 += v * v;
            }
            m /= static_cast<double>(N);
            const double se =
                std::sqrt((m2 / static_cast<double>(N) - m * m) /
                          static_cast<double>(N));
            worst = std::max(worst, std::abs(m) / se);
        }
    };
    check(ident_series(fs, t.panel, IdentKind::var));
    check(ident_series(fs, t.panel, IdentKind::es));
    for (std::size_t j = 0; j < 3; ++j)
        check(ident_series(fs, t.panel, IdentKind::esc, j));

    detail = "max |mean|/se over d+2 components: " + std::to_string(worst);
    return worst < 3.0;
}

bool criterion_3(std::string& detail) {
    CounterRng rng(303);
    double worst_sq = 0.0, worst_table = 0.0;
    const ConvexTable table({-4.0, -1.5, 0.0, 1.5, 4.0},
                            {-6.0, -2.0, 0.5, 2.5, 7.0});
    const EscScoreSpec table_spec{table};
    for (int i = 0; i < 100; ++i) {
        const double m = rng.uniform(-3, 3), x = rng.uniform(-3, 3);
        const double v = rng.uniform(-1, 1), s = rng.uniform(-1, 4);
        const double lo = std::min(m, x), hi = std::max(m, x);

        // square loss: dH = 2 d eta, exact trapezoid over the two knots
        const double f_lo = elementary_score_esc(lo, m, v, x, s);
        const double f_hi =
            (hi > lo) ? elementary_score_esc(std::nexttoward(hi, lo), m, v, x, s)
                      : 0.0;
        const double mix_sq = 2.0 * 0.5 * (f_lo + f_hi) * (hi - lo);
        worst_sq = std::max(worst_sq,
                            std::abs(mix_sq - score_esc_component(m, v, x, s)));

        // knot-table phi: piecewise-constant density of dH over segments
        if (hi > lo) {
            std::vector<double> cuts = {lo, hi};
            for (double c : table.knots())
                if (c > lo && c < hi) cuts.push_back(c);
            std::sort(cuts.begin(), cuts.end());
            auto slope_at = [&](double pt) {
                const auto& kn = table.knots();
                const auto& g = table.subgradient();
                std::size_t idx = 0;
                while (idx + 2 < kn.size() && pt >= kn[idx + 1]) ++idx;
                return (g[idx + 1] - g[idx]) / (kn[idx + 1] - kn[idx]);
            };
            double mix = 0.0;
            for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
                const double a = cuts[c], b = cuts[c + 1];
                const double slope = slope_at(0.5 * (a + b));
                const double fa = elementary_score_esc(a, m, v, x, s);
                const double fb =
                    elementary_score_esc(std::nexttoward(b, a), m, v, x, s);
                mix += slope * 0.5 * (fa + fb) * (b - a);
            }
            worst_table = std::max(
                worst_table,
                std::abs(mix - score_esc_component(m, v, x, s, table_spec)));
        }
    }
    detail = "square-loss gap " + std::to_string(worst_sq) + ", knot-table gap " +
             std::to_string(worst_table);
    return worst_sq <= 1e-10 && worst_table <= 1e-8;
}

bool criterion_4(std::string& detail) {
    CounterRng rng(404);
    double worst_mid = 0.0;
    for (int instance = 0; instance < 20; ++instance) {
        const std::size_t T = 20 + static_cast<std::size_t>(rng.uniform(0, 60));
        const std::size_t d = 2 + static_cast<std::size_t>(rng.uniform(0, 2));
        std::vector<double> vals(T * d);
        std::vector<std::int64_t> times(T);
        std::vector<ForecastRecord> fs(T);
        for (std::size_t t = 0; t < T; ++t) {
            times[t] = static_cast<std::int64_t>(t + 1);
            fs[t].alpha = 0.975;
            fs[t].var = rng.uniform(-2, 2);
            fs[t].esc.resize(d);
            double es = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                vals[t * d + j] = rng.uniform(-2, 2);
                fs[t].esc[j] = rng.uniform(-2, 2);
                es += fs[t].esc[j];
            }
            fs[t].es = es;
        }
        std::vector<std::string> names;
        for (std::size_t j = 1; j <= d; ++j) names.push_back("a" + std::to_string(j));
        LossPanel panel(std::move(vals), std::move(times), std::move(names));

        std::vector<MurphyCurve> curves = {murphy_curve_var(fs, panel, "m"),
                                           murphy_curve_tuple(fs, panel, "m")};
        for (std::size_t j = 0; j < d; ++j)
            curves.push_back(murphy_curve_esc(fs, panel, j, "m"));

        for (const auto& c : curves) {
            if (c.value.front() != 0.0 || c.value.back() != 0.0 ||
                c.value_at(c.knots.front() - 1.0) != 0.0 ||
                c.value_at(c.knots.back() + 1.0) != 0.0) {
                detail = "curve does not vanish at/beyond extreme knots";
                return false;
            }
            for (std::size_t i = 0; i < c.knots.size(); ++i)
                if (c.value[i] < 0.0 || c.value_left[i] < 0.0) {
                    detail = "negative curve value";
                    return false;
                }
        }

        // direct midpoint evaluation for each target
        auto direct_esc = [&](double eta, std::size_t j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < T; ++t)
                acc += elementary_score_esc(eta, fs[t].esc[j], fs[t].var,
                                            panel.at(t, j), panel.aggregate()[t]);
            return acc / static_cast<double>(T);
        };
        auto direct_var = [&](double eta) {
            double acc = 0.0;
            for (std::size_t t = 0; t < T; ++t)
                acc += elementary_score_var(eta, fs[t].var, panel.aggregate()[t],
                                            0.975);
            return acc / static_cast<double>(T);
        };
        for (std::size_t j = 0; j < d; ++j) {
            const MurphyCurve& c = curves[2 + j];
            for (std::size_t i = 0; i + 1 < c.knots.size(); ++i) {
                const double mid = 0.5 * (c.knots[i] + c.knots[i + 1]);
                worst_mid = std::max(
                    worst_mid, std::abs(c.value_at(mid) - direct_esc(mid, j)));
                if (c.value_at(mid) < 0.0) {
                    detail = "negative interpolated value";
                    return false;
                }
            }
        }
        const MurphyCurve& cv = curves[0];
        for (std::size_t i = 0; i + 1 < cv.knots.size(); ++i) {
            const double mid = 0.5 * (cv.knots[i] + cv.knots[i + 1]);
            worst_mid =
                std::max(worst_mid, std::abs(cv.value_at(mid) - direct_var(mid)));
        }
    }
    detail = "max midpoint deviation " + std::to_string(worst_mid);
    return worst_mid <= 1e-12;
}

bool criterion_5(std::string& detail) {
    const double alpha = 0.95;
    const std::size_t N = 1000000;
    // trivariate: X1 the component of interest, S the total
    CounterRng rng(505);
    std::vector<double> x1(N), s(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double z1 = rng.next_gaussian();
        const double z2 = rng.next_gaussian();
        const double z3 = rng.next_gaussian();
        x1[i] = z1;
        const double x2 = 0.4 * z1 + std::sqrt(1.0 - 0.16) * z2;
        const double x3 = 0.2 * z1 + 0.3 * z2 + std::sqrt(1.0 - 0.04 - 0.09) * z3;
        s[i] = x1[i] + x2 + x3;
    }
    // cov(X1, S) = 1 + 0.4 + 0.2; var(S) via the loadings
    const double cov_1s = 1.6;
    double var_s = 0.0;
    {
        const double l2 = std::sqrt(1.0 - 0.16), l3 = std::sqrt(1.0 - 0.04 - 0.09);
        const double a1 = 1.0 + 0.4 + 0.2, a2 = l2 + 0.3, a3 = l3;
        var_s = a1 * a1 + a2 * a2 + a3 * a3;
    }
    const double sd_s = std::sqrt(var_s);
    const double z_a = normal_icdf(alpha);
    const double var_true = sd_s * z_a;

    const auto& k = kernels::active();
    auto mean_se_var_diff = [&](double v_good, double v_bad) {
        std::vector<double> a(N), b(N);
        std::vector<double> vg(N, v_good), vb(N, v_bad);
        k.score_var_series(vb.data(), s.data(), a.data(), N, alpha);
        k.score_var_series(vg.data(), s.data(), b.data(), N, alpha);
        return paired(a, b); // bad minus good
    };
    auto mean_se_esc_diff = [&](double m_good, double m_bad, double v) {
        std::vector<double> a(N), b(N);
        std::vector<double> vg(N, v), mg(N, m_good), mb(N, m_bad);
        k.score_esc_sq_series(mb.data(), vg.data(), x1.data(), s.data(), a.data(), N);
        k.score_esc_sq_series(mg.data(), vg.data(), x1.data(), s.data(), b.data(), N);
        return paired(a, b);
    };

    double min_ratio = 1e300;
    // (i) v* < v <= VaR
    {
        const PairedStats ps = mean_se_var_diff(var_true - 0.2, var_true - 0.5);
        min_ratio = std::min(min_ratio, ps.mean / ps.se);
    }
    // (ii) VaR <= v < v*
    {
        const PairedStats ps = mean_se_var_diff(var_true + 0.2, var_true + 0.5);
        min_ratio = std::min(min_ratio, ps.mean / ps.se);
    }
    // (iii)/(iv): v = v* misspecified; the interval I_1(v) has endpoints
    // E[X1 | S > v] and the true ESC
    const double v_mis = var_true - 0.3;
    const double tail_mean_v =
        cov_1s / sd_s * normal_pdf(v_mis / sd_s) / (1.0 - normal_cdf(v_mis / sd_s));
    const double esc_true = cov_1s / sd_s * normal_pdf(z_a) / (1.0 - alpha);
    const double lo = std::min(tail_mean_v, esc_true);
    const double hi = std::max(tail_mean_v, esc_true);
    {
        const PairedStats ps = mean_se_esc_diff(lo - 0.2, lo - 0.5, v_mis);
        min_ratio = std::min(min_ratio, ps.mean / ps.se);
    }
    {
        const PairedStats ps = mean_se_esc_diff(hi + 0.2, hi + 0.5, v_mis);
        min_ratio = std::min(min_ratio, ps.mean / ps.se);
    }
    detail = "min ordering separation " + std::to_string(min_ratio) + " se";
    return min_ratio >= 3.0;
}

bool criterion_6(std::string& detail) {
    CounterRng rng(606);
    double worst = 0.0;
    for (std::size_t d : {2, 3, 5, 10, 50}) {
        const ContrastMatrix V(d);
        for (std::size_t i = 0; i + 1 < d; ++i)
            for (std::size_t j = 0; j + 1 < d; ++j) {
                double acc = 0.0;
                for (std::size_t r = 0; r < d; ++r) acc += V.at(r, i) * V.at(r, j);
                worst = std::max(worst, std::abs(acc - (i == j ? 1.0 : 0.0)));
            }
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c) {
                double acc = 0.0;
                for (std::size_t kk = 0; kk + 1 < d; ++kk)
                    acc += V.at(r, kk) * V.at(c, kk);
                const double expect =
                    (r == c ? 1.0 : 0.0) - 1.0 / static_cast<double>(d);
                worst = std::max(worst, std::abs(acc - expect));
            }

        for (int i = 0; i < 10000; ++i) {
            std::vector<double> raw(d);
            for (double& v : raw) v = -std::log(rng.next_open());
            const SimplexWeights w = closing(raw);
            const SimplexWeights back = ilr_inv(ilr(w));
            for (std::size_t j = 0; j < d; ++j)
                worst = std::max(worst, std::abs(back[j] - w[j]));
        }
    }

    // step_weights always lands on the simplex
    for (int i = 0; i < 2000; ++i) {
        const std::size_t d = 3;
        std::vector<double> raw(d);
        for (double& v : raw) v = -std::log(rng.next_open());
        const SimplexWeights w = closing(raw);
        ThetaParams theta = zero_theta(w, 4);
        for (auto& v : theta.tau) v = rng.uniform(-3, 3);
        for (auto& v : theta.phi.data()) v = rng.uniform(-3, 3);
        for (auto& v : theta.psi.data()) v = rng.uniform(-3, 3);
        std::vector<double> y(4);
        for (double& v : y) v = rng.uniform(-3, 3);
        const SimplexWeights next = step_weights(theta, w, y);
        double sum = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (!(next[j] > 0.0 && next[j] < 1.0)) {
                detail = "step_weights left the open simplex";
                return false;
            }
            sum += next[j];
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            detail = "step_weights sum off by " + std::to_string(sum - 1.0);
            return false;
        }
    }
    detail = "max round-trip / invariant deviation " + std::to_string(worst);
    return worst <= 1e-12;
}

bool criterion_7(std::string& detail) {
    SimConfig sim;
    sim.d = 3;
    sim.T = 550;
    sim.rho = 0.3;
    const SynthTruth truth = synth_ccc_gaussian(sim, 0.975, 707);

    RunConfig cfg;
    cfg.n = 500;
    cfg.T_out = 50;
    cfg.seed = 707;
    cfg.models = {ModelConfig{"hs"}, ModelConfig{"elliptical"},
                  ModelConfig{"cr_lse"}, ModelConfig{"cr_opt"}};
    const RollResult roll = rolling_run(cfg, truth.panel, &truth);
    if (!roll.failures.empty()) {
        detail = "model step failed: " + roll.failures.front();
        return false;
    }
    double worst = 0.0;
    for (std::size_t m = 0; m < roll.model_names.size(); ++m)
        for (const auto& rec : roll.forecasts[m])
            worst = std::max(worst, rec->allocation_gap());
    detail = "max |sum esc - es| = " + std::to_string(worst);
    return worst <= 1e-10;
}

bool criterion_8(std::string& detail) {
    std::size_t dm_rej = 0, wald_rej = 0;
    const std::size_t reps = 1000, T = 500;
    for (std::size_t r = 0; r < reps; ++r) {
        CounterRng rng(808000 + r);
        std::vector<double> diff(T);
        for (double& v : diff) v = rng.next_gaussian();
        if (dm_test(diff, 0.05).p_equal < 0.05) ++dm_rej;

        Matrix m(T, 2);
        for (std::size_t t = 0; t < T; ++t) {
            m(t, 0) = rng.next_gaussian();
            m(t, 1) = rng.next_gaussian();
        }
        if (wald_joint(m, 0.05).p_equal < 0.05) ++wald_rej;
    }
    const double dm_rate = static_cast<double>(dm_rej) / reps;
    const double wald_rate = static_cast<double>(wald_rej) / reps;
    detail = "dm size " + std::to_string(dm_rate) + ", wald size " +
             std::to_string(wald_rate);
    return dm_rate >= 0.03 && dm_rate <= 0.07 && wald_rate >= 0.03 &&
           wald_rate <= 0.08;
}

bool criterion_9(std::string& detail) {
    const std::size_t seeds = 20;
    // Level 0.9 keeps the comparisons statistically meaningful at this
    // scale: T_out = 250 gives ~25 scored exceedance days per seed, against
    // ~6 at 0.975.
    const double alpha = 0.9;

    // (a) analytic truth weakly lex-better than HS on CCC panels
    std::size_t truth_wins = 0;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        SimConfig sim;
        sim.d = 3;
        sim.T = 750;
        sim.rho = 0.3;
        sim.garch = {SimGarch{0.05, 0.15, 0.82}};
        const SynthTruth truth = synth_ccc_gaussian(sim, alpha, 900 + seed);
        RunConfig cfg;
        cfg.alpha = alpha;
        cfg.n = 500;
        cfg.T_out = 250;
        cfg.seed = 900 + seed;
        cfg.models = {ModelConfig{"truth"}, ModelConfig{"hs"}};
        const RollResult roll = rolling_run(cfg, truth.panel, &truth);
        if (!roll.failures.empty()) continue;
        const LossPanel oos = truth.panel.slice(cfg.n, cfg.T_out);
        std::vector<ForecastRecord> truth_recs, hs_recs;
        for (const auto& r : roll.forecasts[0]) truth_recs.push_back(*r);
        for (const auto& r : roll.forecasts[1]) hs_recs.push_back(*r);
        const ScorePair sp_truth = average_scores(truth_recs, oos);
        const ScorePair sp_hs = average_scores(hs_recs, oos);
        if (lex_leq(sp_truth, sp_hs)) ++truth_wins;
    }

    // (b) CR.OPT vs the constant-weight baseline when the weights truly
    // follow the compositional dynamics (shared first-stage truth)
    std::size_t cr_wins = 0;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        SimConfig sim;
        sim.d = 3;
        sim.T = 750;
        sim.kind = "weights";
        sim.noise_scale = 0.15;
        sim.phi_diag = 0.9;
        sim.phi_angle = 0.16;
        sim.tau_scale = 0.05;
        sim.psi_scale = 0.10;
        const SynthTruth truth = synth_weight_dynamics(sim, alpha, 7100 + seed, 0.01);
        RunConfig cfg;
        cfg.alpha = alpha;
        cfg.n = 500;
        cfg.T_out = 250;
        cfg.seed = 7100 + seed;
        ModelConfig cr{"cr_opt"};
        cr.first_stage = "truth";
        ModelConfig base{"const_w"};
        base.first_stage = "truth";
        cfg.models = {cr, base};
        const RollResult roll = rolling_run(cfg, truth.panel, &truth);
        if (!roll.failures.empty()) continue;
        const LossPanel oos = truth.panel.slice(cfg.n, cfg.T_out);
        std::vector<ForecastRecord> cr_recs, base_recs;
        for (const auto& r : roll.forecasts[0]) cr_recs.push_back(*r);
        for (const auto& r : roll.forecasts[1]) base_recs.push_back(*r);
        const auto cr_series = score_esc_tuple_series(cr_recs, oos);
        const auto base_series = score_esc_tuple_series(base_recs, oos);
        if (mean_compensated(cr_series) <= mean_compensated(base_series))
            ++cr_wins;
    }

    detail = "truth<=hs in " + std::to_string(truth_wins) + "/20, cr_opt<=const in " +
             std::to_string(cr_wins) + "/20";
    return truth_wins >= 18 && cr_wins >= 16;
}

bool criterion_10(std::string& detail) {
    if (g_cli_path.empty()) {
        detail = "no --cli path given";
        return false;
    }
    namespace fs = std::filesystem;
    const fs::path work = fs::temp_directory_path() / "esalloc_determinism";
    fs::remove_all(work);
    fs::create_directories(work);

    const std::string config = R"({
  "alpha": 0.975, "n": 250, "T_out": 50, "seed": 31415,
  "models": ["hs", "elliptical"], "benchmark": "hs",
  "sim": {"kind": "ccc", "d": 2, "T": 320, "rho": 0.25}
})";
    std::ofstream(work / "config.json") << config;

    auto run = [&](const std::string& cmd) {
        const int rc = std::system(cmd.c_str());
        return rc == 0;
    };
    const std::string cfg_path = (work / "config.json").string();
    if (!run(g_cli_path + " simulate --config " + cfg_path + " --out " +
             (work / "data").string() + " > /dev/null")) {
        detail = "simulate failed";
        return false;
    }
    for (const char* tag : {"run1", "run2"}) {
        if (!run(g_cli_path + " backtest --config " + cfg_path + " --panel " +
                 (work / "data" / "panel.csv").string() + " --out " +
                 (work / tag).string() + " > /dev/null")) {
            detail = std::string("backtest failed for ") + tag;
            return false;
        }
    }

    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(work / "run1")) {
        const auto name = entry.path().filename();
        std::ifstream a(entry.path(), std::ios::binary);
        std::ifstream b(work / "run2" / name, std::ios::binary);
        if (!b) {
            detail = "missing file in second run: " + name.string();
            return false;
        }
        std::ostringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        if (sa.str() != sb.str()) {
            detail = "byte mismatch in " + name.string();
            return false;
        }
        ++compared;
    }
    detail = std::to_string(compared) + " files byte-identical";
    return compared >= 5;
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds; // 0 = no stated budget
    std::function<bool(std::string&)> run;
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc)
            only = std::atoi(argv[++i]);
        else if (arg == "--cli" && i + 1 < argc)
            g_cli_path = argv[++i];
    }

    const std::vector<Criterion> criteria = {
        {1, "strict consistency: grid argmin at truth", 60.0, criterion_1},
        {2, "identification means vanish at truth", 30.0, criterion_2},
        {3, "mixture representation of the esc score", 0.0, criterion_3},
        {4, "murphy curve structure", 0.0, criterion_4},
        {5, "order sensitivity of misspecified forecasts", 120.0, criterion_5},
        {6, "composition algebra round trips", 0.0, criterion_6},
        {7, "full allocation in a rolling run", 0.0, criterion_7},
        {8, "dm and wald size control", 240.0, criterion_8},
        {9, "end-to-end ranking sanity", 600.0, criterion_9},
        {10, "byte-identical backtest reports", 0.0, criterion_10},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only) continue;
        std::string detail;
        const auto start = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            ok = false;
            detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        if (c.budget_seconds > 0.0 && elapsed > c.budget_seconds) {
            ok = false;
            detail += " [over budget " + std::to_string(c.budget_seconds) + "s]";
        }
        std::printf("[%s] criterion %d: %s — %s (%.1fs)\n", ok ? "PASS" : "FAIL",
                    c.id, c.name, detail.c_str(), elapsed);
        if (!ok) ++failures;
    }
    return failures;
}
