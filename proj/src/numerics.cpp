#include "tfcs/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tfcs/errors.hpp"
#include "tfcs/rng.hpp"

namespace tfcs::numerics {

namespace {

Eigen::JacobiSVD<Matrix> full_svd(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

int rank_from(const Vector& sv, double tol) {
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  const double cut = tol * sv(0);
  int r = 0;
  while (r < sv.size() && sv(r) > cut) ++r;
  return r;
}

}  // namespace

bool all_finite(const Matrix& m) { return m.allFinite(); }

EigExtremes sym_eig_extremes(const Matrix& m, double tol) {
  require(m.rows() == m.cols(), "sym_eig_extremes: matrix is not square");
  require(m.rows() > 0, "sym_eig_extremes: empty matrix");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  require((m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale,
          "sym_eig_extremes: matrix is not symmetric");
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

Matrix orthonormal_range_basis(const Matrix& m, double tol) {
  if (m.size() == 0) return Matrix(m.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const int r = rank_from(svd.singularValues(), tol);
  return svd.matrixU().leftCols(r);
}

Matrix null_space_basis(const Matrix& m, double tol) {
  if (m.rows() == 0) return Matrix::Identity(m.cols(), m.cols());
  const auto svd = full_svd(m);
  const int r = rank_from(svd.singularValues(), tol);
  return svd.matrixV().rightCols(m.cols() - r);
}

LeastSquares least_squares_min_norm(const Matrix& m, const Vector& b, double tol) {
  require(b.size() == m.rows(), "least_squares_min_norm: rhs length does not match rows");
  if (m.cols() == 0) return {Vector(0), b.norm()};
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const int r = rank_from(sv, tol);
  const Vector coeff = svd.matrixU().leftCols(r).transpose() * b;
  Vector x = svd.matrixV().leftCols(r) * coeff.cwiseQuotient(sv.head(r));
  const double res = (m * x - b).norm();
  return {std::move(x), res};
}

double operator_norm(const Matrix& m, int iters, std::uint64_t seed) {
  require(iters >= 1, "operator_norm: iters must be positive");
  if (m.size() == 0) return 0.0;
  auto rng = make_rng(seed, {0x6f706e6fULL});
  std::normal_distribution<double> normal;
  Vector v(m.cols());
  for (auto& e : v) e = normal(rng);
  v.normalize();
  double est = 0.0;
  for (int k = 0; k < iters; ++k) {
    const Vector w = m.transpose() * (m * v);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    est = (m * v).norm();
  }
  return est;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace tfcs::numerics
