#include "tfcs/frames.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "tfcs/errors.hpp"
#include "tfcs/matrix_io.hpp"
#include "tfcs/numerics.hpp"
#include "tfcs/rng.hpp"

namespace tfcs {

FrameCheck verify_tight(const Matrix& d) {
  FrameCheck check;
  const Matrix gram = d * d.transpose() - Matrix::Identity(d.rows(), d.rows());
  check.defect = numerics::spectral_norm(gram);
  for (Eigen::Index j = 0; j < d.cols(); ++j)
    if (d.col(j).cwiseAbs().maxCoeff() == 0.0) check.columns_nonzero = false;
  return check;
}

double verify_tight(const TightFrame& f) { return verify_tight(f.matrix()).defect; }

TightFrame::TightFrame(Matrix d, double tol) : d_(std::move(d)) {
  require(d_.rows() >= 1 && d_.cols() >= d_.rows(), "TightFrame: need d >= n >= 1");
  require(numerics::all_finite(d_), "TightFrame: non-finite entry");
  const FrameCheck check = verify_tight(d_);
  require(check.columns_nonzero, "TightFrame: frame has a zero column");
  require(check.defect <= tol, "TightFrame: ||DD^T - I|| = " + io::format_real(check.defect) +
                                   " exceeds tolerance");
}

Vector TightFrame::analysis(const Vector& f) const {
  require(f.size() == n(), "analysis: signal length must equal n");
  return d_.transpose() * f;
}

Vector TightFrame::synthesize(const Vector& v) const {
  require(v.size() == d(), "synthesize: coefficient length must equal d");
  return d_ * v;
}

Matrix TightFrame::columns(const Support& cols) const {
  Matrix out(n(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(k) = d_.col(cols[k]);
  return out;
}

TightFrame make_identity_frame(int n) {
  require(n >= 1, "make_identity_frame: n must be positive");
  return TightFrame(Matrix::Identity(n, n));
}

TightFrame make_dct_frame(int n) {
  require(n >= 1, "make_dct_frame: n must be positive");
  Matrix d(n, n);
  for (int k = 0; k < n; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
    for (int i = 0; i < n; ++i) d(i, k) = scale * std::cos(std::numbers::pi * (i + 0.5) * k / n);
  }
  return TightFrame(std::move(d));
}

TightFrame make_union_frame(const Matrix& b1, const Matrix& b2) {
  require(b1.rows() == b1.cols() && b2.rows() == b2.cols() && b1.rows() == b2.rows(),
          "make_union_frame: bases must be square of equal size");
  const auto n = b1.rows();
  const Matrix eye = Matrix::Identity(n, n);
  require(numerics::spectral_norm(b1.transpose() * b1 - eye) <= kTightTol &&
              numerics::spectral_norm(b2.transpose() * b2 - eye) <= kTightTol,
          "make_union_frame: inputs must be orthonormal");
  Matrix d(n, 2 * n);
  d << b1, b2;
  return TightFrame(d / std::numbers::sqrt2);
}

TightFrame make_random_tight_frame(int n, int d, std::uint64_t seed) {
  require(n >= 1 && d >= n, "make_random_tight_frame: need d >= n >= 1");
  auto rng = make_rng(seed, {0x6672616dULL});
  std::normal_distribution<double> normal;
  Matrix g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  return TightFrame(q.topRows(n));
}

double coherence(const Matrix& d) {
  require(d.cols() >= 2, "coherence: need at least two columns");
  const Vector norms = d.colwise().norm().transpose();
  require(norms.minCoeff() > 0.0, "coherence: zero column");
  double mu = 0.0;
  for (Eigen::Index i = 0; i < d.cols(); ++i)
    for (Eigen::Index j = i + 1; j < d.cols(); ++j)
      mu = std::max(mu, std::abs(d.col(i).dot(d.col(j))) / (norms(i) * norms(j)));
  return std::min(mu, 1.0);
}

double coherence(const TightFrame& f) { return coherence(f.matrix()); }

Support largest_indices(const Vector& x, int s) {
  require(s >= 0 && s <= x.size(), "largest_indices: need 0 <= s <= length");
  Support idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return std::abs(x(a)) > std::abs(x(b)); });
  idx.resize(s);
  return idx;
}

double lq_power(const Vector& x, double q) {
  double acc = 0.0;
  for (double v : x)
    if (v != 0.0) acc += std::pow(std::abs(v), q);
  return acc;
}

SparseApprox best_s_term(const Vector& x, int s, double q) {
  require(q > 0.0 && q <= 1.0, "best_s_term: q must lie in (0, 1]");
  SparseApprox out;
  out.s = s;
  out.q = q;
  out.support = largest_indices(x, s);
  std::sort(out.support.begin(), out.support.end());
  out.x_best = Vector::Zero(x.size());
  for (int i : out.support) out.x_best(i) = x(i);
  const Vector rest = x - out.x_best;
  out.tail_l1 = rest.lpNorm<1>();
  out.tail_lq = q == 1.0 ? out.tail_l1 : std::pow(lq_power(rest, q), 1.0 / q);
  return out;
}

TightFrame load_frame(const std::filesystem::path& path) { return TightFrame(io::load_matrix(path)); }

void save_frame(const std::filesystem::path& path, const TightFrame& f) {
  io::save_matrix(path, f.matrix());
}

}  // namespace tfcs
