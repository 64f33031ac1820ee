#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tfcs/frames.hpp"
#include "tfcs/sensing.hpp"
#include "tfcs/types.hpp"

namespace tfcs {

struct SolverOptions {
  int max_iters = 20000;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  double smoothing_floor = 1e-10;   ///< IRLS only
  double continuation_factor = 0.7; ///< IRLS only
};

enum class Program { p1, pq, p0 };
std::string to_string(Program p);

struct RecoveryResult {
  Vector f_hat;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;   ///< ||A f_hat - y||
  double objective = 0.0;  ///< ||D^T f_hat||_1, ||D^T f_hat||_q^q or ||D^T f_hat||_0
  Program program = Program::p1;
  double q = 1.0;
  std::map<std::string, double> diagnostics;
  /// P1: best feasible objective seen so far, sampled every `trace_stride`
  /// iterations. Pq: smoothed objective after each reweighting step.
  std::vector<double> trace;
};

/// Entries with |x_i| <= 1e-9 * max(1, |x|_inf) count as zero.
int l0_count(const Vector& x);

/// Objective of `program` at f, re-evaluated from the frame.
double recovery_objective(const TightFrame& frame, const Vector& f, Program program, double q = 1.0);

/// sign(v_i) max(|v_i| - t, 0).
Vector soft_threshold(const Vector& v, double t);
/// Euclidean projection onto the ball of radius r around center.
Vector project_l2_ball(const Vector& v, const Vector& center, double r);

/// min ||D^T f||_1 s.t. ||A f - y|| <= eps by primal-dual splitting over the
/// stacked map (D^T, A), followed by a feasibility repair and an active-set
/// polish that is accepted only when it lowers the objective.
RecoveryResult solve_p1(const TightFrame& frame, const SensingModel& model, const SolverOptions& opts = {});

/// Stationary point of min ||D^T f||_q^q s.t. ||A f - y|| <= eps by smoothed
/// iteratively reweighted least squares with geometric continuation.
RecoveryResult solve_pq(const TightFrame& frame, const SensingModel& model, double q,
                        const SolverOptions& opts = {});

/// min ||D^T f||_0 s.t. A f = y by enumerating analysis supports of size
/// 0, 1, ..., s_max in lexicographic order. Noiseless models only.
RecoveryResult solve_p0_oracle(const TightFrame& frame, const SensingModel& model, int s_max,
                               double tol = 1e-9);

/// Minimal-norm point of {f : ||A f - y|| <= eps}. Throws ContractViolation
/// when the set is empty.
Vector min_norm_feasible(const Matrix& a, const Vector& y, double eps);

}  // namespace tfcs
