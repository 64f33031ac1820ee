#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tfcs/types.hpp"

// Contraction factors, recovery constants and applicability tests for the
// analysis l1 / l_q recovery guarantees under the D-RIP.
namespace tfcs {

struct RecoveryConstants {
  double rho = 0.0;
  double c0 = 0.0;
  double c1 = 0.0;
};

/// General l1 regime, defined for delta in [0, 2/3).
double rho_general(double delta);
/// (77 - sqrt(1337)) / 82, the root of rho_general = 1.
double threshold_general();
RecoveryConstants constants_general(double delta);

/// Regime with at most four blocks, defined for delta in [0, 1).
double rho_special(double delta);
/// 4 sqrt(2) - 5, the root of rho_special = 1.
double threshold_special();
RecoveryConstants constants_special(double delta);

/// l_q contraction factor for delta in [0, 1), q in (0, 1]. Evaluated in log
/// space so that tiny q does not overflow 2^(2/q).
double rho_q(double delta, double q);

/// Largest admissible q for the l_q guarantee: 1 if rho_q(delta, 1) < 1,
/// otherwise the smallest root of rho_q(delta, .) = 1 on (1e-6, 1).
double q_zero(double delta);

/// True when (delta, q) satisfies delta < 1/2 and q < q_zero(delta); a
/// clamped q_zero of 1 admits q = 1 as well.
bool lq_admissible(double delta, double q);

RecoveryConstants constants_q(double delta, double q);

/// C0 * tail / s^(1/q - 1/2) + C1 * eps.
double error_bound(double c0, double c1, double tail, int s, double eps, double q = 1.0);

enum class Regime { general_l1, special_n_le_4s, lq };
std::string to_string(Regime r);

struct GuaranteeCertificate {
  Regime regime = Regime::general_l1;
  double delta_2s = 0.0;
  int s = 1;
  double q = 1.0;
  double rho = 0.0;   ///< NaN outside the formula's domain
  double c0 = 0.0;    ///< NaN when inapplicable
  double c1 = 0.0;    ///< NaN when inapplicable
  double q0 = 0.0;    ///< NaN except in the l_q regime
  bool applicable = false;
  std::string precondition_text;
};

/// One certificate per regime (general l1, special, and l_q when q is given).
/// `d` is the number of frame vectors; the special regime needs both n <= 4s
/// and d <= 4s so that at most four blocks of size s exist. Defaults to n.
std::vector<GuaranteeCertificate> certify(double delta_2s, int n, int s,
                                          std::optional<double> q = std::nullopt,
                                          std::optional<int> d = std::nullopt);

/// Index blocks T0, T1, ..., Tl over the analysis coefficients.
struct BlockPartition {
  int s = 1;
  double q = 1.0;  ///< 1 selects the l1 weighting of omega, q < 1 the l_q^q one
  std::vector<Support> blocks;
  double omega = 0.0;
  int l() const { return static_cast<int>(blocks.size()) - 1; }
};

/// T0 holds the s largest |x_f|; the rest is sorted by |x_h| descending and cut
/// into consecutive blocks of size s (ties go to the lower index). omega is the
/// share of block T1 in the off-T0 mass, 0 when that mass vanishes.
BlockPartition block_partition(const Vector& x_f, const Vector& x_h, int s, double q = 1.0);

}  // namespace tfcs
