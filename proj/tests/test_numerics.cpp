#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tfcs/errors.hpp"
#include "tfcs/numerics.hpp"
#include "tfcs/rng.hpp"

using namespace tfcs;
using namespace tfcs::numerics;

namespace {

Matrix random_matrix(int r, int c, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

}  // namespace

TEST(SymEigExtremes, SmallCases) {
  auto e = sym_eig_extremes(Matrix::Identity(2, 2));
  EXPECT_NEAR(e.lambda_min, 1.0, 1e-14);
  EXPECT_NEAR(e.lambda_max, 1.0, 1e-14);

  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 0.25, 4.0;
  e = sym_eig_extremes(d);
  EXPECT_NEAR(e.lambda_min, 0.25, 1e-14);
  EXPECT_NEAR(e.lambda_max, 4.0, 1e-14);

  Matrix m(2, 2);
  m << 2, 1, 1, 2;
  e = sym_eig_extremes(m);
  EXPECT_NEAR(e.lambda_min, 1.0, 1e-14);
  EXPECT_NEAR(e.lambda_max, 3.0, 1e-14);
}

TEST(SymEigExtremes, RejectsBadInput) {
  EXPECT_THROW(sym_eig_extremes(Matrix::Zero(2, 3)), ContractViolation);
  Matrix m(2, 2);
  m << 1, 2, 0, 1;
  EXPECT_THROW(sym_eig_extremes(m), ContractViolation);
}

TEST(SymEigExtremes, RayleighQuotientsStayInside) {
  for (int c = 0; c < 5; ++c) {
    const Matrix b = random_matrix(6, 6, 10 + c);
    const Matrix m = b + b.transpose();
    const auto e = sym_eig_extremes(m);
    Rng rng = make_rng(99, {static_cast<std::uint64_t>(c)});
    std::normal_distribution<double> g;
    for (int t = 0; t < 1000; ++t) {
      Vector v(6);
      for (auto& x : v) x = g(rng);
      const double rq = v.dot(m * v) / v.squaredNorm();
      EXPECT_GE(rq, e.lambda_min - 1e-8);
      EXPECT_LE(rq, e.lambda_max + 1e-8);
    }
  }
}

TEST(OrthonormalRangeBasis, Examples) {
  Matrix m(2, 2);
  m << 1, 2, 0, 0;
  Matrix b = orthonormal_range_basis(m);
  ASSERT_EQ(b.cols(), 1);
  EXPECT_NEAR(std::abs(b(0, 0)), 1.0, 1e-14);
  EXPECT_NEAR(b(1, 0), 0.0, 1e-14);

  b = orthonormal_range_basis(Matrix::Identity(3, 3));
  EXPECT_EQ(b.cols(), 3);
  EXPECT_LE((b.transpose() * b - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-14);

  m << 1, 1, 1, 1;
  b = orthonormal_range_basis(m);
  ASSERT_EQ(b.cols(), 1);
  EXPECT_NEAR(std::abs(b(0, 0)), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(std::abs(b(1, 0)), 1.0 / std::sqrt(2.0), 1e-14);

  EXPECT_EQ(orthonormal_range_basis(Matrix::Zero(3, 2)).cols(), 0);
}

TEST(OrthonormalRangeBasis, OrthonormalAndSpanning) {
  for (int c = 0; c < 10; ++c) {
    // rank-deficient: 8x6 product of 8x3 and 3x6
    const Matrix m = random_matrix(8, 3, 20 + c) * random_matrix(3, 6, 40 + c);
    const Matrix b = orthonormal_range_basis(m);
    EXPECT_EQ(b.cols(), 3);
    EXPECT_LE((b.transpose() * b - Matrix::Identity(b.cols(), b.cols())).cwiseAbs().maxCoeff(), 10 * kRankTol);
    EXPECT_LE((m - b * b.transpose() * m).norm(), 10 * kRankTol * m.norm());
  }
}

TEST(LeastSquaresMinNorm, Examples) {
  Vector b(3);
  b << 1, -2, 5;
  auto ls = least_squares_min_norm(Matrix::Identity(3, 3), b);
  EXPECT_LE((ls.x - b).norm(), 1e-14);
  EXPECT_NEAR(ls.residual_norm, 0.0, 1e-14);

  Matrix m(2, 2);
  m << 1, 0, 0, 0;
  ls = least_squares_min_norm(m, Vector::Ones(2));
  EXPECT_NEAR(ls.x(0), 1.0, 1e-14);
  EXPECT_NEAR(ls.x(1), 0.0, 1e-14);
  EXPECT_NEAR(ls.residual_norm, 1.0, 1e-14);

  Matrix row(1, 2);
  row << 1, 1;
  ls = least_squares_min_norm(row, Vector::Constant(1, 2.0));
  EXPECT_NEAR(ls.x(0), 1.0, 1e-14);
  EXPECT_NEAR(ls.x(1), 1.0, 1e-14);
  EXPECT_NEAR(ls.residual_norm, 0.0, 1e-14);

  EXPECT_THROW(least_squares_min_norm(row, Vector::Ones(2)), ContractViolation);
}

TEST(LeastSquaresMinNorm, LocallyOptimal) {
  const Matrix m = random_matrix(10, 4, 7);
  Vector b(10);
  for (int i = 0; i < 10; ++i) b(i) = std::sin(i + 1.0);
  const auto ls = least_squares_min_norm(m, b);
  Rng rng = make_rng(8);
  std::normal_distribution<double> g(0.0, 1e-3);
  for (int t = 0; t < 1000; ++t) {
    Vector dx(4);
    for (auto& x : dx) x = g(rng);
    EXPECT_LE(ls.residual_norm, (m * (ls.x + dx) - b).norm());
  }
}

TEST(LeastSquaresMinNorm, MinimalNormAmongMinimizers) {
  const Matrix m = random_matrix(3, 7, 11);
  Vector b(3);
  b << 1, 2, 3;
  const auto ls = least_squares_min_norm(m, b);
  // x must lie in range(M^T): no component in the null space.
  const Matrix n = null_space_basis(m);
  EXPECT_EQ(n.cols(), 4);
  EXPECT_LE((n.transpose() * ls.x).norm(), 1e-12);
  EXPECT_LE(ls.residual_norm, 1e-12);
}

TEST(OperatorNorm, Examples) {
  EXPECT_NEAR(operator_norm(Matrix::Identity(4, 4)), 1.0, 1e-6);
  Matrix m = Matrix::Zero(2, 2);
  m.diagonal() << 3, 1;
  EXPECT_NEAR(operator_norm(m), 3.0, 1e-6);
  m << 0, 2, 0, 0;
  EXPECT_NEAR(operator_norm(m), 2.0, 1e-6);
}

TEST(OperatorNorm, MatchesEigenvalueRoute) {
  for (int c = 0; c < 10; ++c) {
    const Matrix m = random_matrix(12, 9, 60 + c);
    const double est = operator_norm(m, 200, c);
    const double ref = std::sqrt(sym_eig_extremes(m.transpose() * m).lambda_max);
    EXPECT_NEAR(est, ref, 1e-5 * ref);
    EXPECT_LE(est, ref * (1 + 1e-6));
    EXPECT_EQ(est, operator_norm(m, 200, c));
  }
}

TEST(NullSpaceBasis, Dimensions) {
  const Matrix m = random_matrix(3, 5, 3);
  const Matrix n = null_space_basis(m);
  EXPECT_EQ(n.cols(), 2);
  EXPECT_LE((m * n).norm(), 1e-12);
  EXPECT_EQ(null_space_basis(Matrix::Identity(3, 3)).cols(), 0);
}
