#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "tfcs/types.hpp"

namespace tfcs {

enum class MatrixKind { gaussian, bernoulli };

MatrixKind parse_matrix_kind(const std::string& s);
std::string to_string(MatrixKind k);

/// i.i.d. N(0, 1/m) entries.
Matrix gen_gaussian(int m, int n, std::uint64_t seed);
/// i.i.d. +-1/sqrt(m) entries.
Matrix gen_bernoulli(int m, int n, std::uint64_t seed);
Matrix gen_matrix(MatrixKind kind, int m, int n, std::uint64_t seed);

struct NoiseMode {
  enum class Kind { none, gaussian, bounded };
  Kind kind = Kind::none;
  double level = 0.0;  ///< sigma for gaussian, eps for bounded

  static NoiseMode none() { return {}; }
  static NoiseMode gaussian(double sigma) { return {Kind::gaussian, sigma}; }
  static NoiseMode bounded(double eps) { return {Kind::bounded, eps}; }
};

/// y = A f + z together with the noise budget epsilon.
struct SensingModel {
  Matrix a;
  Vector y;
  double epsilon = 0.0;
  std::optional<Vector> f_true;
  std::optional<Vector> z;

  int m() const { return static_cast<int>(a.rows()); }
  int n() const { return static_cast<int>(a.cols()); }
};

SensingModel measure(const Matrix& a, const Vector& f, NoiseMode noise, std::uint64_t seed);

/// Fraction of seeded trials in which | |A nu|^2 - |nu|^2 | >= delta |nu|^2.
double concentration_probe(MatrixKind kind, int m, int n, const Vector& nu, double delta, int trials,
                           std::uint64_t seed);

}  // namespace tfcs
