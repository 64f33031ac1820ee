#pragma once

#include <cstdint>
#include <string>

#include "tfcs/frames.hpp"
#include "tfcs/types.hpp"

namespace tfcs {

/// Largest number of supports the exact routines will enumerate.
inline constexpr double kEnumerationBudget = 1e7;

enum class RipMethod { exact, random_lower_bound };
std::string to_string(RipMethod m);

struct RipReport {
  int s = 0;
  double delta = 0.0;
  Support witness_support;  ///< sorted; empty when no support was kept
  RipMethod method = RipMethod::exact;
  long long supports_examined = 0;
  /// Extreme Rayleigh quotients of ||A D v||^2 / ||D v||^2 over all examined
  /// supports; delta = max(lambda_max - 1, 1 - lambda_min).
  double lambda_min = 1.0;
  double lambda_max = 1.0;
};

/// Binomial coefficient as a double (saturates rather than overflowing).
double binomial(int n, int k);

/// Rayleigh-quotient extremes of A^T A on range(D_T). Returns (1, 1) when the
/// range is trivial, which contributes zero to delta.
struct SupportExtremes {
  double lambda_min = 1.0;
  double lambda_max = 1.0;
  int rank = 0;
  double delta() const;
};
SupportExtremes support_extremes(const Matrix& ata, const TightFrame& frame, const Support& t);

/// D-RIP constant of order s by enumerating every support of size min(s, d).
/// `workers` > 1 splits the enumeration across threads; the result does not
/// depend on the worker count. Throws EnumerationTooLarge past the budget.
RipReport exact_drip(const Matrix& a, const TightFrame& frame, int s, int workers = 1);

/// Classical RIP constant max_T ||A_T^T A_T - I|| over |T| = min(s, n).
RipReport exact_rip(const Matrix& a, int s, int workers = 1);

/// Max of the per-support extreme over `trials` seeded random supports.
RipReport random_lower_bound(const Matrix& a, const TightFrame& frame, int s, int trials,
                             std::uint64_t seed);

/// Lexicographic successor of a k-subset of {0..n-1}; false when exhausted.
bool next_combination(Support& c, int n);
/// The r-th k-subset of {0..n-1} in lexicographic order.
Support unrank_combination(long long r, int n, int k);

}  // namespace tfcs
