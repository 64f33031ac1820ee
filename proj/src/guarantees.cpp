#include "tfcs/guarantees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "tfcs/errors.hpp"
#include "tfcs/frames.hpp"
#include "tfcs/matrix_io.hpp"

namespace tfcs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double c1_from(double delta, double c0) {
  return 2.0 / std::sqrt(1.0 - delta) * (1.0 + c0 / std::numbers::sqrt2);
}

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

double rho_general(double delta) {
  if (!(delta >= 0.0 && delta < 2.0 / 3.0)) throw DomainError("rho_general: delta must lie in [0, 2/3)");
  const double num = 4.0 * (1.0 + 5.0 * delta - 4.0 * delta * delta);
  const double den = (1.0 - delta) * (32.0 - 25.0 * delta);
  return std::sqrt(num / den);
}

double threshold_general() { return (77.0 - std::sqrt(1337.0)) / 82.0; }

RecoveryConstants constants_general(double delta) {
  if (!(delta >= 0.0 && delta < threshold_general()))
    throw TheoremInapplicable("general l1 guarantee needs 0 <= delta_2s < " +
                              io::format_real(threshold_general()) + ", got " + io::format_real(delta));
  RecoveryConstants k;
  k.rho = rho_general(delta);
  k.c0 = 4.0 / (1.0 - k.rho) *
         std::sqrt(2.0 * (2.0 - delta) / ((1.0 - delta) * (32.0 - 25.0 * delta)));
  k.c1 = c1_from(delta, k.c0);
  return k;
}

double rho_special(double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("rho_special: delta must lie in [0, 1)");
  return (1.0 + delta) / std::sqrt(8.0 * (1.0 - delta));
}

double threshold_special() { return 4.0 * std::numbers::sqrt2 - 5.0; }

RecoveryConstants constants_special(double delta) {
  if (!(delta >= 0.0 && delta < threshold_special()))
    throw TheoremInapplicable("special l1 guarantee needs 0 <= delta_2s < 4*sqrt(2)-5, got " +
                              io::format_real(delta));
  RecoveryConstants k;
  k.rho = rho_special(delta);
  k.c0 = std::numbers::sqrt2 / ((1.0 - k.rho) * std::sqrt(1.0 - delta));
  k.c1 = c1_from(delta, k.c0);
  return k;
}

double rho_q(double delta, double q) {
  if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("rho_q: delta must lie in [0, 1)");
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("rho_q: q must lie in (0, 1]");
  const double log_term = std::log(q) - (2.0 / q) * std::numbers::ln2 +
                          (2.0 / q - 1.0) * std::log((2.0 - q) / (2.0 - delta));
  return std::sqrt((delta + std::exp(log_term)) / (1.0 - delta));
}

double q_zero(double delta) {
  if (!(delta >= 0.0 && delta < 0.5)) throw DomainError("q_zero: delta must lie in [0, 1/2)");
  if (rho_q(delta, 1.0) < 1.0) return 1.0;
  // Scan for the first sign change so that a non-monotone profile still
  // yields the smallest root, then bisect inside that cell.
  constexpr double q_lo = 1e-6;
  constexpr int grid = 1000;
  double lo = q_lo;
  double hi = 1.0;
  for (int k = 1; k <= grid; ++k) {
    const double qk = q_lo + (1.0 - q_lo) * k / grid;
    if (rho_q(delta, qk) >= 1.0) {
      hi = qk;
      break;
    }
    lo = qk;
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (rho_q(delta, mid) < 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

bool lq_admissible(double delta, double q) {
  if (!(delta >= 0.0 && delta < 0.5) || !(q > 0.0 && q <= 1.0)) return false;
  const double q0 = q_zero(delta);
  return q < q0 || (q0 == 1.0 && rho_q(delta, q) < 1.0);
}

RecoveryConstants constants_q(double delta, double q) {
  if (!(delta >= 0.0 && delta < 0.5))
    throw TheoremInapplicable("l_q guarantee needs 0 <= delta_2s < 1/2, got " + io::format_real(delta));
  if (!(q > 0.0 && q <= 1.0)) throw TheoremInapplicable("l_q guarantee needs q in (0, 1]");
  if (!lq_admissible(delta, q))
    throw TheoremInapplicable("l_q guarantee needs q < q0(delta_2s) = " + io::format_real(q_zero(delta)) +
                              ", got q = " + io::format_real(q));
  RecoveryConstants k;
  k.rho = rho_q(delta, q);
  const double one_minus_rq = -std::expm1(q * std::log(k.rho));
  const double log_a = std::log((2.0 - delta) * q) + ((2.0 - q) / q) * std::log(2.0 - q);
  const double log_b = delta > 0.0 ? (2.0 / q) * std::numbers::ln2 + std::log(delta)
                                   : -std::numeric_limits<double>::infinity();
  const double log_c0 = (1.0 / q - 1.0) * std::numbers::ln2 - std::log(one_minus_rq) / q +
                        0.5 * (log_add(log_a, log_b) - std::log1p(-delta));
  k.c0 = std::exp(log_c0);
  k.c1 = c1_from(delta, k.c0);
  return k;
}

double error_bound(double c0, double c1, double tail, int s, double eps, double q) {
  require(s >= 1, "error_bound: s must be positive");
  require(c0 >= 0.0 && c1 >= 0.0 && tail >= 0.0 && eps >= 0.0,
          "error_bound: inputs must be nonnegative");
  require(q > 0.0 && q <= 1.0, "error_bound: q must lie in (0, 1]");
  const double denom = q == 1.0 ? std::sqrt(static_cast<double>(s)) : std::pow(s, 1.0 / q - 0.5);
  return c0 * tail / denom + c1 * eps;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::general_l1: return "general_l1";
    case Regime::special_n_le_4s: return "special_n_le_4s";
    case Regime::lq: return "lq";
  }
  return "?";
}

std::vector<GuaranteeCertificate> certify(double delta_2s, int n, int s, std::optional<double> q,
                                          std::optional<int> d) {
  require(delta_2s >= 0.0 && std::isfinite(delta_2s), "certify: delta_2s must be finite and >= 0");
  require(n >= 1 && s >= 1, "certify: n and s must be positive");
  const int frame_size = d.value_or(n);
  std::vector<GuaranteeCertificate> out;

  GuaranteeCertificate gen;
  gen.regime = Regime::general_l1;
  gen.delta_2s = delta_2s;
  gen.s = s;
  gen.q0 = kNaN;
  gen.precondition_text = "general l1 recovery: delta_2s < (77-sqrt(1337))/82 ~ 0.4931";
  gen.rho = delta_2s < 2.0 / 3.0 ? rho_general(delta_2s) : kNaN;
  gen.applicable = delta_2s < threshold_general();
  gen.c0 = gen.c1 = kNaN;
  if (gen.applicable) {
    const auto k = constants_general(delta_2s);
    gen.c0 = k.c0;
    gen.c1 = k.c1;
  }
  out.push_back(gen);

  GuaranteeCertificate sp;
  sp.regime = Regime::special_n_le_4s;
  sp.delta_2s = delta_2s;
  sp.s = s;
  sp.q0 = kNaN;
  sp.precondition_text =
      "special l1 recovery: n <= 4s (and d <= 4s) and delta_2s < 4*sqrt(2)-5 ~ 0.656";
  sp.rho = delta_2s < 1.0 ? rho_special(delta_2s) : kNaN;
  sp.applicable = n <= 4 * s && frame_size <= 4 * s && delta_2s < threshold_special();
  sp.c0 = sp.c1 = kNaN;
  if (sp.applicable) {
    const auto k = constants_special(delta_2s);
    sp.c0 = k.c0;
    sp.c1 = k.c1;
  }
  out.push_back(sp);

  if (q) {
    require(*q > 0.0 && *q <= 1.0, "certify: q must lie in (0, 1]");
    GuaranteeCertificate lq;
    lq.regime = Regime::lq;
    lq.delta_2s = delta_2s;
    lq.s = s;
    lq.q = *q;
    lq.precondition_text = "l_q recovery: delta_2s < 1/2 and q < q0(delta_2s)";
    lq.rho = delta_2s < 1.0 ? rho_q(delta_2s, *q) : kNaN;
    lq.q0 = delta_2s < 0.5 ? q_zero(delta_2s) : kNaN;
    lq.applicable = lq_admissible(delta_2s, *q);
    lq.c0 = lq.c1 = kNaN;
    if (lq.applicable) {
      const auto k = constants_q(delta_2s, *q);
      lq.c0 = k.c0;
      lq.c1 = k.c1;
    }
    out.push_back(lq);
  }
  return out;
}

BlockPartition block_partition(const Vector& x_f, const Vector& x_h, int s, double q) {
  require(x_f.size() == x_h.size(), "block_partition: vectors must have equal length");
  const int d = static_cast<int>(x_f.size());
  require(s >= 1 && s <= d, "block_partition: need 1 <= s <= d");
  require(q > 0.0 && q <= 1.0, "block_partition: q must lie in (0, 1]");
  BlockPartition p;
  p.s = s;
  p.q = q;
  Support head = largest_indices(x_f, s);
  std::sort(head.begin(), head.end());
  std::vector<char> in_head(d, 0);
  for (int i : head) in_head[i] = 1;
  Support rest;
  for (int i = 0; i < d; ++i)
    if (!in_head[i]) rest.push_back(i);
  std::stable_sort(rest.begin(), rest.end(),
                   [&](int a, int b) { return std::abs(x_h(a)) > std::abs(x_h(b)); });
  p.blocks.push_back(head);
  for (std::size_t k = 0; k < rest.size(); k += s)
    p.blocks.emplace_back(rest.begin() + k, rest.begin() + std::min(rest.size(), k + s));

  auto mass = [&](const Support& t) {
    double acc = 0.0;
    for (int i : t) acc += q == 1.0 ? std::abs(x_h(i)) : (x_h(i) == 0.0 ? 0.0 : std::pow(std::abs(x_h(i)), q));
    return acc;
  };
  double total = 0.0;
  for (std::size_t j = 1; j < p.blocks.size(); ++j) total += mass(p.blocks[j]);
  p.omega = (p.blocks.size() > 1 && total > 0.0) ? std::clamp(mass(p.blocks[1]) / total, 0.0, 1.0) : 0.0;
  return p;
}

}  // namespace tfcs
