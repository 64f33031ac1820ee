#include "tfcs/drip.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include "tfcs/errors.hpp"
#include "tfcs/numerics.hpp"
#include "tfcs/rng.hpp"

namespace tfcs {

std::string to_string(RipMethod m) { return m == RipMethod::exact ? "exact" : "random_lower_bound"; }

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

double SupportExtremes::delta() const {
  if (rank == 0) return 0.0;
  return std::max({lambda_max - 1.0, 1.0 - lambda_min, 0.0});
}

SupportExtremes support_extremes(const Matrix& ata, const TightFrame& frame, const Support& t) {
  const Matrix basis = numerics::orthonormal_range_basis(frame.columns(t));
  SupportExtremes ext;
  ext.rank = static_cast<int>(basis.cols());
  if (ext.rank == 0) return ext;
  Matrix g = basis.transpose() * ata * basis;
  g = 0.5 * (g + g.transpose());
  const auto ev = numerics::sym_eig_extremes(g);
  ext.lambda_min = ev.lambda_min;
  ext.lambda_max = ev.lambda_max;
  return ext;
}

bool next_combination(Support& c, int n) {
  const int k = static_cast<int>(c.size());
  int i = k - 1;
  while (i >= 0 && c[i] == n - k + i) --i;
  if (i < 0) return false;
  ++c[i];
  for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  return true;
}

Support unrank_combination(long long r, int n, int k) {
  Support c;
  c.reserve(k);
  int x = 0;
  for (int slot = 0; slot < k; ++slot) {
    while (true) {
      const auto block = static_cast<long long>(binomial(n - x - 1, k - slot - 1));
      if (r < block) break;
      r -= block;
      ++x;
    }
    c.push_back(x++);
  }
  return c;
}

namespace {

struct Best {
  double delta = -1.0;
  Support witness;
  double lambda_min = std::numeric_limits<double>::infinity();
  double lambda_max = -std::numeric_limits<double>::infinity();
  long long examined = 0;

  void offer(double d, const Support& t) {
    // Ties keep the lexicographically smallest support.
    if (d > delta || (d == delta && (witness.empty() || t < witness))) {
      delta = d;
      witness = t;
    }
  }
  void merge(const Best& o) {
    if (o.delta >= 0.0) offer(o.delta, o.witness);
    lambda_min = std::min(lambda_min, o.lambda_min);
    lambda_max = std::max(lambda_max, o.lambda_max);
    examined += o.examined;
  }
};

// Evaluates every k-subset of {0..n-1} with `eval(support) -> (lmin, lmax, delta)`
// in contiguous rank ranges, one per worker, and reduces deterministically.
template <typename Eval>
Best enumerate(int n, int k, int workers, Eval eval) {
  const double total_d = binomial(n, k);
  if (total_d > kEnumerationBudget)
    throw EnumerationTooLarge("exact enumeration needs C(" + std::to_string(n) + "," +
                              std::to_string(k) + ") supports, above the 1e7 budget; use " +
                              "random_lower_bound instead");
  const auto total = static_cast<long long>(total_d);
  workers = std::max(1, std::min<int>(workers, static_cast<int>(std::max<long long>(1, total / 64))));
  std::vector<Best> partial(workers);
  auto run = [&](int w) {
    const long long lo = total * w / workers;
    const long long hi = total * (w + 1) / workers;
    if (lo >= hi) return;
    Support t = unrank_combination(lo, n, k);
    Best& b = partial[w];
    for (long long r = lo; r < hi; ++r) {
      const SupportExtremes e = eval(t);
      if (e.rank > 0) {
        b.lambda_min = std::min(b.lambda_min, e.lambda_min);
        b.lambda_max = std::max(b.lambda_max, e.lambda_max);
      }
      b.offer(e.delta(), t);
      ++b.examined;
      next_combination(t, n);
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }
  Best out;
  for (const auto& b : partial) out.merge(b);
  return out;
}

RipReport to_report(const Best& b, int s, RipMethod method) {
  RipReport r;
  r.s = s;
  r.delta = std::max(0.0, b.delta);
  r.witness_support = b.witness;
  r.method = method;
  r.supports_examined = b.examined;
  r.lambda_min = std::isfinite(b.lambda_min) ? b.lambda_min : 1.0;
  r.lambda_max = std::isfinite(b.lambda_max) ? b.lambda_max : 1.0;
  return r;
}

}  // namespace

RipReport exact_drip(const Matrix& a, const TightFrame& frame, int s, int workers) {
  require(s >= 1, "exact_drip: order s must be positive");
  require(a.cols() == frame.n(), "exact_drip: A must have n columns");
  const Matrix ata = a.transpose() * a;
  const int k = std::min(s, frame.d());
  const Best b = enumerate(frame.d(), k, workers,
                           [&](const Support& t) { return support_extremes(ata, frame, t); });
  return to_report(b, s, RipMethod::exact);
}

RipReport exact_rip(const Matrix& a, int s, int workers) {
  require(s >= 1, "exact_rip: order s must be positive");
  const int n = static_cast<int>(a.cols());
  const int k = std::min(s, n);
  const Best b = enumerate(n, k, workers, [&](const Support& t) {
    Matrix at(a.rows(), static_cast<Eigen::Index>(t.size()));
    for (std::size_t j = 0; j < t.size(); ++j) at.col(j) = a.col(t[j]);
    const Matrix g = at.transpose() * at;
    const auto ev = numerics::sym_eig_extremes(g);
    SupportExtremes e;
    e.rank = static_cast<int>(t.size());
    e.lambda_min = ev.lambda_min;
    e.lambda_max = ev.lambda_max;
    return e;
  });
  return to_report(b, s, RipMethod::exact);
}

RipReport random_lower_bound(const Matrix& a, const TightFrame& frame, int s, int trials,
                             std::uint64_t seed) {
  require(s >= 1, "random_lower_bound: order s must be positive");
  require(trials >= 1, "random_lower_bound: trials must be positive");
  require(a.cols() == frame.n(), "random_lower_bound: A must have n columns");
  const Matrix ata = a.transpose() * a;
  const int d = frame.d();
  const int k = std::min(s, d);
  Best b;
  Support pool(d);
  for (int t = 0; t < trials; ++t) {
    auto rng = make_rng(seed, {static_cast<std::uint64_t>(t), 0x73757070ULL});
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<int> pick(i, d - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    Support sup(pool.begin(), pool.begin() + k);
    std::sort(sup.begin(), sup.end());
    const SupportExtremes e = support_extremes(ata, frame, sup);
    if (e.rank > 0) {
      b.lambda_min = std::min(b.lambda_min, e.lambda_min);
      b.lambda_max = std::max(b.lambda_max, e.lambda_max);
    }
    b.offer(e.delta(), sup);
    ++b.examined;
  }
  return to_report(b, s, RipMethod::random_lower_bound);
}

}  // namespace tfcs
