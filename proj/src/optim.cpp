#include "esalloc/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace esalloc {

OptimResult nelder_mead(const Objective& f, std::span<const double> x0,
                        const NelderMeadOptions& opts) {
    const std::size_t n = x0.size();
    if (n == 0) throw std::invalid_argument("nelder_mead: empty start point");

    // dimension-adaptive coefficients (Gao-Han)
    const double dn = static_cast<double>(n);
    const double refl = 1.0;
    const double expa = 1.0 + 2.0 / dn;
    const double contr = 0.75 - 0.5 / dn;
    const double shrink = 1.0 - 1.0 / dn;

    std::size_t evals = 0;
    auto eval = [&](std::span<const double> x) {
        ++evals;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    };

    std::vector<std::vector<double>> pts(n + 1, std::vector<double>(x0.begin(), x0.end()));
    std::vector<double> fv(n + 1);
    for (std::size_t i = 1; i <= n; ++i) pts[i][i - 1] += opts.init_step;
    for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(pts[i]);

    std::vector<std::size_t> order(n + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    };

    double cycle_best = std::numeric_limits<double>::infinity();
    bool converged = false;

    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    while (evals < opts.max_evals) {
        sort_simplex();
        const std::size_t best = order[0], worst = order[n];
        const std::size_t second_worst = order[n - 1];

        for (std::size_t j = 0; j < n; ++j) {
            double c = 0.0;
            for (std::size_t i = 0; i <= n; ++i)
                if (i != worst) c += pts[i][j];
            centroid[j] = c / static_cast<double>(n);
        }

        for (std::size_t j = 0; j < n; ++j)
            xr[j] = centroid[j] + refl * (centroid[j] - pts[worst][j]);
        const double fr = eval(xr);

        bool contracted = false;
        if (fr < fv[best]) {
            for (std::size_t j = 0; j < n; ++j)
                xe[j] = centroid[j] + expa * (xr[j] - centroid[j]);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                fv[worst] = fe;
            } else {
                pts[worst] = xr;
                fv[worst] = fr;
            }
        } else if (fr < fv[second_worst]) {
            pts[worst] = xr;
            fv[worst] = fr;
        } else {
            contracted = true;
            if (fr < fv[worst]) {
                // outside contraction
                for (std::size_t j = 0; j < n; ++j)
                    xc[j] = centroid[j] + contr * (xr[j] - centroid[j]);
                const double fc = eval(xc);
                if (fc <= fr) {
                    pts[worst] = xc;
                    fv[worst] = fc;
                } else {
                    for (std::size_t i = 0; i <= n; ++i) {
                        if (i == best) continue;
                        for (std::size_t j = 0; j < n; ++j)
                            pts[i][j] = pts[best][j] +
                                        shrink * (pts[i][j] - pts[best][j]);
                        fv[i] = eval(pts[i]);
                    }
                }
            } else {
                // inside contraction
                for (std::size_t j = 0; j < n; ++j)
                    xc[j] = centroid[j] - contr * (centroid[j] - pts[worst][j]);
                const double fc = eval(xc);
                if (fc < fv[worst]) {
                    pts[worst] = xc;
                    fv[worst] = fc;
                } else {
                    for (std::size_t i = 0; i <= n; ++i) {
                        if (i == best) continue;
                        for (std::size_t j = 0; j < n; ++j)
                            pts[i][j] = pts[best][j] +
                                        shrink * (pts[i][j] - pts[best][j]);
                        fv[i] = eval(pts[i]);
                    }
                }
            }
        }

        if (contracted) {
            const double fb = *std::min_element(fv.begin(), fv.end());
            if (cycle_best - fb < opts.tol) {
                converged = true;
                break;
            }
            cycle_best = fb;
        }
    }

    sort_simplex();
    return {pts[order[0]], fv[order[0]], converged, evals};
}

namespace {

// One restart: repeated simplex rounds from the incumbent. The step is
// kept while rounds improve and shrunk on stagnation; stops once the step
// bottoms out or the evaluation cap is spent. Guards against premature
// simplex collapse in flat valleys.
OptimResult polished_run(const Objective& f, std::span<const double> x0,
                         const NelderMeadOptions& opts) {
    NelderMeadOptions round = opts;
    std::size_t remaining = opts.max_evals;
    std::vector<double> x(x0.begin(), x0.end());
    OptimResult best;
    best.value = std::numeric_limits<double>::infinity();
    double step = opts.init_step;
    while (remaining > 0 && step >= 1e-9) {
        round.max_evals = remaining;
        round.init_step = step;
        OptimResult res = nelder_mead(f, x, round);
        remaining -= std::min(remaining, res.evals);
        best.evals += res.evals;
        const bool improved = res.value < best.value - opts.tol;
        if (res.value < best.value) {
            best.x = res.x;
            best.value = res.value;
            best.converged = res.converged;
        }
        x = best.x;
        if (!improved) step *= 0.125;
    }
    return best;
}

} // namespace

OptimResult restarted_nelder_mead(const Objective& f, std::span<const double> x0,
                                  const NelderMeadOptions& opts,
                                  std::size_t n_perturbations, CounterRng rng) {
    OptimResult best = polished_run(f, x0, opts);
    for (std::size_t r = 0; r < n_perturbations; ++r) {
        std::vector<double> start(x0.begin(), x0.end());
        for (double& v : start) v += opts.init_step * rng.next_gaussian();
        OptimResult res = polished_run(f, start, opts);
        if (res.value < best.value) best = std::move(res);
    }
    return best;
}

} // namespace esalloc
