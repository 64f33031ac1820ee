#pragma once

#include <cstdint>
#include <filesystem>

#include "tfcs/types.hpp"

namespace tfcs {

/// Acceptance tolerance on the spectral defect ||D D^T - I||.
inline constexpr double kTightTol = 1e-8;

struct FrameCheck {
  double defect = 0.0;          ///< ||D D^T - I_n|| (spectral norm)
  bool columns_nonzero = true;  ///< no identically zero frame vector
  bool tight(double tol = kTightTol) const { return defect <= tol && columns_nonzero; }
};

FrameCheck verify_tight(const Matrix& d);

/// n x d matrix whose columns form a tight (Parseval) frame for R^n.
/// Immutable once constructed; construction validates tightness.
class TightFrame {
 public:
  explicit TightFrame(Matrix d, double tol = kTightTol);

  const Matrix& matrix() const { return d_; }
  int n() const { return static_cast<int>(d_.rows()); }
  int d() const { return static_cast<int>(d_.cols()); }
  double redundancy() const { return static_cast<double>(d()) / n(); }

  /// Analysis coefficients D^T f.
  Vector analysis(const Vector& f) const;
  /// Synthesis D v.
  Vector synthesize(const Vector& v) const;

  /// Columns indexed by `cols` as an n x |cols| matrix.
  Matrix columns(const Support& cols) const;

  bool is_orthobasis() const { return n() == d(); }

 private:
  Matrix d_;
};

double verify_tight(const TightFrame& f);

TightFrame make_identity_frame(int n);
/// Orthonormal DCT-II basis as columns.
TightFrame make_dct_frame(int n);
/// [B1 B2] / sqrt(2) for orthonormal B1, B2.
TightFrame make_union_frame(const Matrix& b1, const Matrix& b2);
/// First n rows of a seeded random orthogonal d x d matrix.
TightFrame make_random_tight_frame(int n, int d, std::uint64_t seed);

/// max_{i != j} |<D_i, D_j>| / (|D_i| |D_j|) over the columns of a matrix.
double coherence(const Matrix& d);
double coherence(const TightFrame& f);

struct SparseApprox {
  int s = 0;
  double q = 1.0;
  Vector x_best;
  Support support;     ///< kept indices, ascending
  double tail_l1 = 0;  ///< ||x - x_best||_1
  double tail_lq = 0;  ///< (sum |x_i - x_best_i|^q)^(1/q)
};

/// Indices of the s largest-magnitude entries; ties go to the lowest index.
/// Returned in selection order (largest first).
Support largest_indices(const Vector& x, int s);

SparseApprox best_s_term(const Vector& x, int s, double q = 1.0);

/// sum |x_i|^q (the q-th power of the l_q quasi-norm).
double lq_power(const Vector& x, double q);

TightFrame load_frame(const std::filesystem::path& path);
void save_frame(const std::filesystem::path& path, const TightFrame& f);

}  // namespace tfcs
