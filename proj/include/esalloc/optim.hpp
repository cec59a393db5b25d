// Restarted direct-search simplex (Nelder-Mead) minimizer used by the
// model-fitting routines. Deterministic given the start points.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "esalloc/rng.hpp"

namespace esalloc {

struct NelderMeadOptions {
    // Converged once a full contraction cycle improves the best objective
    // by less than `tol`.
    double tol = 1e-10;
    std::size_t max_evals = 20000;
    double init_step = 0.25;
};

struct OptimResult {
    std::vector<double> x;
    double value = 0.0;
    bool converged = false;
    std::size_t evals = 0;
};

using Objective = std::function<double(std::span<const double>)>;

OptimResult nelder_mead(const Objective& f, std::span<const double> x0,
                        const NelderMeadOptions& opts);

/// Runs Nelder-Mead from `x0` and from `n_perturbations` seeded Gaussian
/// perturbations of it; returns the best result found.
OptimResult restarted_nelder_mead(const Objective& f, std::span<const double> x0,
                                  const NelderMeadOptions& opts,
                                  std::size_t n_perturbations, CounterRng rng);

} // namespace esalloc
