#include "tfcs/sensing.hpp"

#include <cmath>
#include <random>

#include "tfcs/errors.hpp"
#include "tfcs/rng.hpp"

namespace tfcs {

MatrixKind parse_matrix_kind(const std::string& s) {
  if (s == "gaussian") return MatrixKind::gaussian;
  if (s == "bernoulli") return MatrixKind::bernoulli;
  throw ContractViolation("unknown matrix kind '" + s + "' (expected gaussian|bernoulli)");
}

std::string to_string(MatrixKind k) { return k == MatrixKind::gaussian ? "gaussian" : "bernoulli"; }

Matrix gen_gaussian(int m, int n, std::uint64_t seed) {
  require(m >= 1 && n >= 1, "gen_gaussian: dimensions must be positive");
  auto rng = make_rng(seed, {0x67617573ULL});
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
  Matrix a(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) a(i, j) = normal(rng);
  return a;
}

Matrix gen_bernoulli(int m, int n, std::uint64_t seed) {
  require(m >= 1 && n >= 1, "gen_bernoulli: dimensions must be positive");
  auto rng = make_rng(seed, {0x6265726eULL});
  const double v = 1.0 / std::sqrt(static_cast<double>(m));
  Matrix a(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) a(i, j) = (rng() >> 63) ? v : -v;
  return a;
}

Matrix gen_matrix(MatrixKind kind, int m, int n, std::uint64_t seed) {
  return kind == MatrixKind::gaussian ? gen_gaussian(m, n, seed) : gen_bernoulli(m, n, seed);
}

SensingModel measure(const Matrix& a, const Vector& f, NoiseMode noise, std::uint64_t seed) {
  require(f.size() == a.cols(), "measure: signal length must equal the number of columns of A");
  require(noise.level >= 0.0 && std::isfinite(noise.level), "measure: noise level must be >= 0");
  SensingModel model;
  model.a = a;
  model.f_true = f;
  Vector z = Vector::Zero(a.rows());
  if (noise.kind != NoiseMode::Kind::none && noise.level > 0.0) {
    auto rng = make_rng(seed, {0x6e6f6973ULL});
    std::normal_distribution<double> normal;
    for (auto& e : z) e = normal(rng);
    if (noise.kind == NoiseMode::Kind::gaussian) {
      z *= noise.level;
    } else {
      const double nz = z.norm();
      z *= noise.level / nz;
    }
  }
  model.y = a * f + z;
  switch (noise.kind) {
    case NoiseMode::Kind::none: model.epsilon = 0.0; break;
    case NoiseMode::Kind::gaussian: model.epsilon = z.norm(); break;
    case NoiseMode::Kind::bounded: model.epsilon = noise.level; break;
  }
  // Bounded rescaling can land one ulp above eps; keep the budget honest.
  if (z.norm() > model.epsilon) model.epsilon = z.norm();
  model.z = std::move(z);
  return model;
}

double concentration_probe(MatrixKind kind, int m, int n, const Vector& nu, double delta, int trials,
                           std::uint64_t seed) {
  require(trials >= 1, "concentration_probe: trials must be positive");
  require(nu.size() == n, "concentration_probe: nu length must equal n");
  require(delta > 0.0 && delta < 1.0, "concentration_probe: delta must lie in (0, 1)");
  const double nn = nu.squaredNorm();
  require(nn > 0.0, "concentration_probe: nu must be nonzero");
  int hits = 0;
  for (int t = 0; t < trials; ++t) {
    const Matrix a = gen_matrix(kind, m, n, derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    if (std::abs((a * nu).squaredNorm() - nn) >= delta * nn) ++hits;
  }
  return static_cast<double>(hits) / trials;
}

}  // namespace tfcs
