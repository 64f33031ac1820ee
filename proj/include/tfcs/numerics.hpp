#pragma once

#include <cstdint>
#include <utility>

#include "tfcs/types.hpp"

// Dense kernels shared by every module. All functions are pure.
namespace tfcs::numerics {

/// Relative rank cutoff used wherever a numerical rank decision is made.
inline constexpr double kRankTol = 1e-10;

struct EigExtremes {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

/// Smallest and largest eigenvalue of a symmetric matrix. Throws
/// ContractViolation for non-square input or asymmetry above tol * max(1, |M|max).
EigExtremes sym_eig_extremes(const Matrix& m, double tol = kRankTol);

/// Orthonormal basis of range(M). Directions whose singular value is at most
/// tol * sigma_max are dropped; an all-zero M yields a rows x 0 matrix.
Matrix orthonormal_range_basis(const Matrix& m, double tol = kRankTol);

struct LeastSquares {
  Vector x;
  double residual_norm = 0.0;
};

/// Minimum-norm least-squares solution of M x ~ b (pseudo-inverse with a
/// relative singular-value cutoff tol).
LeastSquares least_squares_min_norm(const Matrix& m, const Vector& b, double tol = kRankTol);

/// Power iteration on M^T M from a seeded Gaussian start. The Rayleigh quotient
/// never exceeds sigma_max^2, so the estimate is a lower bound up to rounding.
double operator_norm(const Matrix& m, int iters = 200, std::uint64_t seed = 0);

/// Spectral norm computed from the singular values (reference route).
double spectral_norm(const Matrix& m);

/// Orthonormal basis of the null space of M (columns), same cutoff rule.
Matrix null_space_basis(const Matrix& m, double tol = kRankTol);

bool all_finite(const Matrix& m);

}  // namespace tfcs::numerics
