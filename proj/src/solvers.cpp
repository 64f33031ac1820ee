#include "tfcs/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <tuple>

#include "tfcs/drip.hpp"
#include "tfcs/errors.hpp"
#include "tfcs/numerics.hpp"

namespace tfcs {

std::string to_string(Program p) {
  switch (p) {
    case Program::p1: return "P1";
    case Program::pq: return "Pq";
    case Program::p0: return "P0";
  }
  return "?";
}

int l0_count(const Vector& x) {
  if (x.size() == 0) return 0;
  const double cut = 1e-9 * std::max(1.0, x.cwiseAbs().maxCoeff());
  return static_cast<int>((x.array().abs() > cut).count());
}

double recovery_objective(const TightFrame& frame, const Vector& f, Program program, double q) {
  const Vector x = frame.analysis(f);
  switch (program) {
    case Program::p1: return x.lpNorm<1>();
    case Program::pq: return lq_power(x, q);
    case Program::p0: return l0_count(x);
  }
  return 0.0;
}

Vector soft_threshold(const Vector& v, double t) {
  require(t >= 0.0, "soft_threshold: t must be nonnegative");
  return v.unaryExpr([t](double a) { return a > t ? a - t : (a < -t ? a + t : 0.0); });
}

Vector project_l2_ball(const Vector& v, const Vector& center, double r) {
  require(r >= 0.0, "project_l2_ball: r must be nonnegative");
  require(v.size() == center.size(), "project_l2_ball: size mismatch");
  const Vector diff = v - center;
  const double nd = diff.norm();
  if (nd <= r) return v;
  return center + (r / nd) * diff;
}

Vector min_norm_feasible(const Matrix& a, const Vector& y, double eps) {
  require(eps >= 0.0, "min_norm_feasible: epsilon must be nonnegative");
  require(y.size() == a.rows(), "min_norm_feasible: y length does not match A");
  const auto ls = numerics::least_squares_min_norm(a, y);
  if (ls.residual_norm > eps * (1.0 + 1e-9) + 1e-10)
    throw ContractViolation("min_norm_feasible: no f satisfies ||A f - y|| <= eps");
  if (y.norm() <= eps) return Vector::Zero(a.cols());
  if (ls.residual_norm >= eps) return ls.x;

  // Tikhonov path f(lam) = sum s_i / (s_i^2 + lam) <u_i, y> v_i; the residual
  // grows with lam, so bisect in log lam for residual = eps.
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const Vector c = svd.matrixU().transpose() * y;
  const double perp2 = std::max(0.0, y.squaredNorm() - c.squaredNorm());
  auto residual = [&](double lam) {
    double r2 = perp2;
    for (int i = 0; i < sv.size(); ++i) {
      const double t = lam / (sv(i) * sv(i) + lam);
      r2 += t * t * c(i) * c(i);
    }
    return std::sqrt(r2);
  };
  auto point = [&](double lam) {
    Vector coef(sv.size());
    for (int i = 0; i < sv.size(); ++i) coef(i) = sv(i) > 0.0 ? sv(i) / (sv(i) * sv(i) + lam) * c(i) : 0.0;
    return Vector(svd.matrixV() * coef);
  };
  double lo = std::log(1e-30), hi = std::log(1e30);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (residual(std::exp(mid)) <= eps ? lo : hi) = mid;
  }
  return point(std::exp(lo));
}

namespace {

double residual_of(const SensingModel& model, const Vector& f) { return (model.a * f - model.y).norm(); }

/// Pulls an infeasible point back into the constraint set.
class FeasibilityRepair {
 public:
  FeasibilityRepair(const SensingModel& model, const Vector& anchor)
      : model_(model), anchor_(anchor), anchor_res_(model.a * anchor - model.y) {
    pinv_ = model.a.completeOrthogonalDecomposition().pseudoInverse();
    slack_ = 1e-13 * (1.0 + model.y.norm());
  }

  bool feasible(const Vector& f) const { return residual_of(model_, f) <= model_.epsilon + slack_; }

  Vector operator()(const Vector& f) const {
    const Vector r = model_.a * f - model_.y;
    const double nr = r.norm();
    if (nr <= model_.epsilon + slack_) return f;
    const Vector target = model_.y + (model_.epsilon * (1.0 - 1e-12) / nr) * r;
    Vector g = f + pinv_ * (target - model_.a * f);
    if (feasible(g)) return g;
    // Shrink towards the feasible anchor along the segment.
    const Vector rg = model_.a * g - model_.y;
    const Vector dr = rg - anchor_res_;
    const double qa = dr.squaredNorm();
    const double qb = anchor_res_.dot(dr);
    const double qc = anchor_res_.squaredNorm() - model_.epsilon * model_.epsilon;
    if (qa <= 0.0) return anchor_;
    const double disc = std::max(0.0, qb * qb - qa * qc);
    double t = std::clamp((-qb + std::sqrt(disc)) / qa, 0.0, 1.0) * (1.0 - 1e-12);
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      Vector h = anchor_ + t * (g - anchor_);
      if (feasible(h)) return h;
    }
    return anchor_;
  }

 private:
  const SensingModel& model_;
  Vector anchor_;
  Vector anchor_res_;
  Matrix pinv_;
  double slack_ = 0.0;
};

/// Solves min c^T f over {f : D_Z^T f = 0, ||A f - y|| <= eps} where c is the
/// subgradient of the l1 objective on the sign pattern of x off Z.
std::optional<Vector> active_set_candidate(const TightFrame& frame, const SensingModel& model, const Vector& x,
                                           double rel) {
  const double xmax = x.cwiseAbs().maxCoeff();
  Support zero, keep;
  for (int i = 0; i < x.size(); ++i) (std::abs(x(i)) <= rel * xmax ? zero : keep).push_back(i);
  const Matrix w = numerics::null_space_basis(frame.columns(zero).transpose());
  const int k = static_cast<int>(w.cols());
  if (k == 0) return Vector(Vector::Zero(frame.n()));
  Vector sgn = Vector::Zero(frame.d());
  for (int i : keep) sgn(i) = x(i) > 0 ? 1.0 : -1.0;
  const Vector g = w.transpose() * (frame.matrix() * sgn);
  const Matrix m = model.a * w;
  const auto ls = numerics::least_squares_min_norm(m, model.y);
  const double eps = model.epsilon;
  if (ls.residual_norm > eps + 1e-10 * (1.0 + model.y.norm())) return std::nullopt;
  Vector u = ls.x;
  const double room2 = eps * eps - ls.residual_norm * ls.residual_norm;
  if (room2 > 0.0) {
    const Matrix gram = m.transpose() * m;
    Eigen::LDLT<Matrix> ldlt(gram);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      const Vector z = ldlt.solve(g);
      const double gz = g.dot(z);
      if (gz > 0.0 && std::isfinite(gz)) u -= std::sqrt(room2 / gz) * z;
    }
  }
  return Vector(w * u);
}

/// Lower bound on the optimal l1 value from the dual pair (p, r): p is moved
/// onto {D p = -A^T r} and both are scaled back into the unit box, which keeps
/// -<r, y> - eps ||r|| a valid dual objective.
double dual_bound(const TightFrame& frame, const SensingModel& model, const Vector& p, const Vector& r) {
  const Matrix& d = frame.matrix();
  const Vector pf = p - d.transpose() * (d * p + model.a.transpose() * r);
  const double scale = std::max(1.0, pf.cwiseAbs().maxCoeff());
  return (-r.dot(model.y) - model.epsilon * r.norm()) / scale;
}

/// Dual pair read off the optimality conditions at f: p = sign(D^T f) on the
/// support, and the off-support entries of p together with r (a nonnegative
/// multiple of A f - y when eps > 0) solve D p + A^T r = 0 in least squares.
std::optional<std::pair<Vector, Vector>> kkt_dual(const TightFrame& frame, const SensingModel& model,
                                                  const Vector& f) {
  const Vector x = frame.analysis(f);
  const double cut = 1e-9 * std::max(1.0, x.cwiseAbs().maxCoeff());
  Support zero;
  Vector p = Vector::Zero(frame.d());
  for (int i = 0; i < x.size(); ++i) {
    if (std::abs(x(i)) <= cut)
      zero.push_back(i);
    else
      p(i) = x(i) > 0 ? 1.0 : -1.0;
  }
  const Vector rhs = -(frame.matrix() * p);
  const Vector res = model.a * f - model.y;
  const bool ball = model.epsilon > 0.0;
  if (ball && res.norm() == 0.0) return std::nullopt;
  const int extra = ball ? 1 : static_cast<int>(model.a.rows());
  Matrix m(frame.n(), static_cast<Eigen::Index>(zero.size()) + extra);
  m.leftCols(zero.size()) = frame.columns(zero);
  if (ball)
    m.rightCols(1) = model.a.transpose() * res;
  else
    m.rightCols(extra) = model.a.transpose();
  const Vector sol = numerics::least_squares_min_norm(m, rhs).x;
  for (std::size_t k = 0; k < zero.size(); ++k) p(zero[k]) = sol(static_cast<Eigen::Index>(k));
  if (ball) {
    const double mu = sol(sol.size() - 1);
    if (mu < 0.0) return std::nullopt;
    return std::make_pair(p, Vector(mu * res));
  }
  return std::make_pair(p, Vector(sol.tail(extra)));
}

RecoveryResult finish(const TightFrame& frame, const SensingModel& model, Vector f, Program program, double q) {
  RecoveryResult r;
  r.program = program;
  r.q = q;
  r.residual = residual_of(model, f);
  r.objective = recovery_objective(frame, f, program, q);
  r.f_hat = std::move(f);
  return r;
}

void check_model(const TightFrame& frame, const SensingModel& model) {
  require(model.a.cols() == frame.n(), "solver: A has the wrong number of columns for the frame");
  require(model.y.size() == model.a.rows(), "solver: y length does not match A");
  require(model.epsilon >= 0.0, "solver: epsilon must be nonnegative");
}

}  // namespace

RecoveryResult solve_p1(const TightFrame& frame, const SensingModel& model, const SolverOptions& opts) {
  check_model(frame, model);
  require(opts.max_iters > 0 && opts.tol > 0.0, "solve_p1: invalid solver options");
  const Matrix& a = model.a;
  const Matrix& d = frame.matrix();
  const double eps = model.epsilon;
  constexpr int kTraceStride = 10;
  constexpr int kPolishStride = 100;

  const Vector f0 = min_norm_feasible(a, model.y, eps);
  const FeasibilityRepair repair(model, f0);

  // ||K||^2 <= 1 + ||A||^2; the estimate is inflated by 1% since power
  // iteration approaches the norm from below.
  const double norm_a = numerics::operator_norm(a, 200, opts.seed);
  const double knorm = std::sqrt(1.0 + std::pow(1.01 * norm_a, 2));
  // The dual step dominates: the dual iterates live in a bounded box and
  // settle much faster than the primal ones.
  constexpr double kStepRatio = 0.03;
  const double tau = kStepRatio / knorm;
  const double sigma = 1.0 / (kStepRatio * knorm);

  Vector f = f0, fbar = f0;
  Vector p = Vector::Zero(frame.d());
  Vector r = Vector::Zero(model.m());
  Vector best = f0;
  double best_obj = frame.analysis(f0).lpNorm<1>();
  auto offer = [&](const Vector& cand) {
    const double obj = frame.analysis(cand).lpNorm<1>();
    if (obj < best_obj) {
      best_obj = obj;
      best = cand;
    }
  };
  // Guess the zero set of D^T f at several thresholds and offer every
  // candidate that is feasible.
  auto polish = [&](const Vector& at) {
    const Vector x = frame.analysis(at);
    if (!(x.cwiseAbs().maxCoeff() > 0.0)) return;
    for (double rel = 1e-2; rel >= 1e-9; rel *= 0.1) {
      auto cand = active_set_candidate(frame, model, x, rel);
      if (!cand) continue;
      const Vector fixed = repair(*cand);
      if (repair.feasible(fixed)) offer(fixed);
    }
  };

  RecoveryResult out;
  int it = 0;
  double change = 0.0, violation = 0.0, gap = std::numeric_limits<double>::infinity();
  bool converged = false;
  while (it < opts.max_iters) {
    ++it;
    p = (p + sigma * (d.transpose() * fbar)).cwiseMax(-1.0).cwiseMin(1.0);
    r += sigma * (a * fbar - model.y);
    const double nr = r.norm();
    r *= nr > sigma * eps ? 1.0 - sigma * eps / nr : 0.0;
    const Vector f_next = f - tau * (d * p + a.transpose() * r);
    fbar = 2.0 * f_next - f;
    change = (f_next - f).norm();
    f = f_next;
    violation = std::max(0.0, residual_of(model, f) - eps);
    bool stop = change <= opts.tol * (1.0 + f.norm()) && violation <= opts.tol;
    if (stop || it % kTraceStride == 0) {
      offer(repair(f));
      double lower = dual_bound(frame, model, p, r);
      if (it % kPolishStride == 0) {
        polish(f);
        if (auto kkt = kkt_dual(frame, model, best))
          lower = std::max(lower, dual_bound(frame, model, kkt->first, kkt->second));
      }
      out.trace.push_back(best_obj);
      // A certified gap also ends the run: best is then within tol of optimal.
      gap = best_obj - lower;
      stop = stop || gap <= opts.tol * (1.0 + best_obj);
    }
    if (stop) {
      converged = true;
      break;
    }
  }

  const double cp_obj = frame.analysis(repair(f)).lpNorm<1>();
  polish(f);

  out = [&] {
    auto trace = std::move(out.trace);
    RecoveryResult res = finish(frame, model, best, Program::p1, 1.0);
    res.trace = std::move(trace);
    return res;
  }();
  out.iterations = it;
  out.converged = converged;
  out.diagnostics = {{"tau", tau},
                     {"sigma", sigma},
                     {"norm_a", norm_a},
                     {"last_change", change},
                     {"last_violation", violation},
                     {"duality_gap", gap},
                     {"splitting_objective", cp_obj},
                     {"polish_gain", std::max(0.0, cp_obj - best_obj)}};
  return out;
}

RecoveryResult solve_pq(const TightFrame& frame, const SensingModel& model, double q, const SolverOptions& opts) {
  check_model(frame, model);
  require(q > 0.0 && q < 1.0, "solve_pq: q must lie in (0, 1)");
  require(opts.max_iters > 0 && opts.tol > 0.0, "solve_pq: invalid solver options");
  require(opts.continuation_factor > 0.0 && opts.continuation_factor < 1.0,
          "solve_pq: continuation_factor must lie in (0, 1)");
  require(opts.smoothing_floor > 0.0, "solve_pq: smoothing_floor must be positive");
  const Matrix& a = model.a;
  const Matrix dt = frame.matrix().transpose();
  const double eps = model.epsilon;

  const Vector f0 = min_norm_feasible(a, model.y, eps);
  double mu = frame.analysis(f0).cwiseAbs().maxCoeff();
  if (mu == 0.0) {
    RecoveryResult r = finish(frame, model, f0, Program::pq, q);
    r.iterations = 1;
    r.converged = true;
    r.diagnostics = {{"mu", 0.0}, {"max_descent_violation", 0.0}};
    return r;
  }

  // eps = 0: f = f_p + N u parametrizes {A f = y}.
  Vector f_p;
  Matrix null_a, dt_null;
  if (eps == 0.0) {
    f_p = numerics::least_squares_min_norm(a, model.y).x;
    null_a = numerics::null_space_basis(a);
    dt_null = dt * null_a;
  }

  double last_lambda = 0.0;
  auto weighted_solve = [&](const Vector& w) -> Vector {
    const Vector sw = (w / w.maxCoeff()).cwiseSqrt();
    if (eps == 0.0) {
      if (null_a.cols() == 0) return f_p;
      const Matrix b = sw.asDiagonal() * dt_null;
      const Vector rhs = -(sw.asDiagonal() * (dt * f_p));
      const Vector u = b.colPivHouseholderQr().solve(rhs);
      return f_p + null_a * u;
    }
    if (model.y.norm() <= eps) return Vector::Zero(frame.n());
    const Matrix top = sw.asDiagonal() * dt;
    Matrix stacked(top.rows() + a.rows(), a.cols());
    Vector rhs = Vector::Zero(stacked.rows());
    auto solve_at = [&](double lam) {
      const double s = std::sqrt(lam);
      stacked.topRows(top.rows()) = top;
      stacked.bottomRows(a.rows()) = s * a;
      rhs.tail(a.rows()) = s * model.y;
      Vector f = stacked.colPivHouseholderQr().solve(rhs);
      return std::pair{f, residual_of(model, f)};
    };
    // The residual is decreasing in lam. Aim for ||A f - y|| = eps to within
    // 1e-10 relative so every step minimizes the weighted objective over the
    // ball itself, well inside the accepted band [eps (1 - 1e-3), eps].
    const double band_lo = eps * (1.0 - 1e-10);
    double lo = last_lambda > 0.0 ? last_lambda : 1.0;
    auto [f, res] = solve_at(lo);
    if (res <= eps && res >= band_lo) {
      last_lambda = lo;
      return f;
    }
    double hi = lo;
    Vector f_hi = f;
    if (res > eps) {
      for (int k = 0; k < 60 && res > eps; ++k) {
        lo = hi;
        hi *= 4.0;
        std::tie(f, res) = solve_at(hi);
      }
      f_hi = f;
      if (res > eps) return f_hi;
    } else {
      for (int k = 0; k < 60 && res < band_lo; ++k) {
        hi = lo;
        f_hi = f;
        lo /= 4.0;
        std::tie(f, res) = solve_at(lo);
      }
      if (res <= eps) {
        last_lambda = lo;
        return f;
      }
    }
    for (int k = 0; k < 40; ++k) {
      const double mid = std::sqrt(lo * hi);
      auto [fm, rm] = solve_at(mid);
      if (rm <= eps) {
        hi = mid;
        f_hi = fm;
        if (rm >= band_lo) break;
      } else {
        lo = mid;
      }
    }
    last_lambda = hi;
    return f_hi;
  };

  auto smoothed = [&](const Vector& x, double m) { return (x.array().square() + m * m).pow(q / 2.0).sum(); };

  RecoveryResult out;
  Vector f = f0;
  double worst_rise = 0.0;
  bool converged = false;
  int it = 0;
  while (it < opts.max_iters) {
    ++it;
    const Vector x = dt * f;
    const Vector w = (x.array().square() + mu * mu).pow(q / 2.0 - 1.0).matrix();
    const Vector f_next = weighted_solve(w);
    const double j_old = smoothed(x, mu);
    const double j_new = smoothed(dt * f_next, mu);
    worst_rise = std::max(worst_rise, (j_new - j_old) / std::max(1.0, j_old));
    out.trace.push_back(j_new);
    const double change = (f_next - f).norm();
    const double scale = 1.0 + f.norm();
    f = f_next;
    mu = std::max(opts.continuation_factor * mu, opts.smoothing_floor);
    if (change <= opts.tol * scale) {
      converged = true;
      break;
    }
  }

  auto trace = std::move(out.trace);
  out = finish(frame, model, f, Program::pq, q);
  out.trace = std::move(trace);
  out.iterations = it;
  out.converged = converged;
  out.diagnostics = {{"mu", mu}, {"max_descent_violation", worst_rise}, {"lambda", last_lambda}};
  return out;
}

RecoveryResult solve_p0_oracle(const TightFrame& frame, const SensingModel& model, int s_max, double tol) {
  check_model(frame, model);
  require(model.epsilon == 0.0, "solve_p0_oracle: epsilon > 0 is not supported (noiseless oracle)");
  require(s_max >= 0 && s_max <= frame.d(), "solve_p0_oracle: need 0 <= s_max <= d");
  require(tol > 0.0, "solve_p0_oracle: tol must be positive");
  double total = 0.0;
  for (int k = 0; k <= s_max; ++k) total += binomial(frame.d(), k);
  if (total > kEnumerationBudget)
    throw EnumerationTooLarge("solve_p0_oracle: " + std::to_string(total) + " supports exceed the budget");

  const Matrix dt = frame.matrix().transpose();
  const int n = frame.n(), d = frame.d(), m = model.m();
  Vector rhs = Vector::Zero(d + m);
  long long examined = 0;
  for (int k = 0; k <= s_max; ++k) {
    Support t(k);
    for (int i = 0; i < k; ++i) t[i] = i;
    do {
      ++examined;
      std::vector<char> in(d, 0);
      for (int i : t) in[i] = 1;
      Matrix stacked(d - k + m, n);
      int row = 0;
      for (int i = 0; i < d; ++i)
        if (!in[i]) stacked.row(row++) = dt.row(i);
      stacked.bottomRows(m) = model.a;
      rhs.resize(d - k + m);
      rhs.head(d - k).setZero();
      rhs.tail(m) = model.y;
      const auto ls = numerics::least_squares_min_norm(stacked, rhs);
      if (ls.residual_norm <= tol) {
        RecoveryResult r = finish(frame, model, ls.x, Program::p0, 1.0);
        r.iterations = static_cast<int>(examined);
        r.converged = true;
        r.diagnostics = {{"supports_examined", static_cast<double>(examined)},
                         {"support_size", static_cast<double>(k)}};
        return r;
      }
    } while (k > 0 && next_combination(t, d));
  }
  RecoveryResult r = finish(frame, model, Vector::Zero(n), Program::p0, 1.0);
  r.iterations = static_cast<int>(examined);
  r.converged = false;
  r.diagnostics = {{"supports_examined", static_cast<double>(examined)}};
  return r;
}

}  // namespace tfcs
