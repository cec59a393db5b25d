// Simplex algebra: closing operator, contrast matrix, isometric log-ratio
// transform and its inverse, covariate construction, and the allocation
// weight dynamics map. Everything here is what keeps forecast weights on
// the open simplex, and with them the full allocation property.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "esalloc/core.hpp"

namespace esalloc {

/// d x (d-1) contrast matrix in the balance form: column k carries
/// sqrt((d-k)/(d-k+1)) at row k and -1/sqrt((d-k)(d-k+1)) below it.
/// Satisfies V'V = I_{d-1}, VV' = I_d - (1/d)11', V'1 = 0.
class ContrastMatrix {
public:
    explicit ContrastMatrix(std::size_t d);

    std::size_t dim() const { return d_; }
    double at(std::size_t row, std::size_t col) const; // 0-based
    Matrix dense() const;

private:
    std::size_t d_;
};

ContrastMatrix contrast_matrix(std::size_t d);

/// x / sum(x) for strictly positive x.
SimplexWeights closing(std::span<const double> x);

/// ilr(w) = V' ln(w), evaluated through the closed-form balances.
std::vector<double> ilr(const SimplexWeights& w);

/// ilr_inv(z) = C(exp(V z)); the exponent is shifted by its maximum before
/// exponentiation so the map stays total on R^{d-1}.
SimplexWeights ilr_inv(std::span<const double> z);

/// Covariates (ilr(C(max(x*s, eps))), ilr(C(max(-x*s, eps)))) stacked into
/// a 2(d-1) vector; eps > 0 keeps both halves strictly positive.
std::vector<double> build_covariates(std::span<const double> x, double s,
                                     double eps);

/// Parameters of the weight dynamics w_{t+1} = ilr_inv(tau + Phi ilr(w_t)
/// + Psi y_t), plus the initial weight.
struct ThetaParams {
    std::vector<double> tau;   // d-1
    Matrix phi;                // (d-1) x (d-1)
    Matrix psi;                // (d-1) x q
    SimplexWeights w1;

    std::size_t dim() const { return tau.size() + 1; }
    std::size_t covariate_dim() const { return psi.cols(); }
};

ThetaParams zero_theta(const SimplexWeights& w1, std::size_t q);

SimplexWeights step_weights(const ThetaParams& theta, const SimplexWeights& w,
                            std::span<const double> y);

/// Pull components off the simplex boundary: anything below `floor_value`
/// is raised to it and the vector re-closed. Bumps `clamp_count` when a
/// clamp fired.
SimplexWeights clamp_interior(const SimplexWeights& w, double floor_value,
                              std::size_t* clamp_count);

constexpr double weight_floor = 1e-9;

} // namespace esalloc
