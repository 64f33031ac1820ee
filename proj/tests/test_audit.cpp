#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "tfcs/audit.hpp"
#include "tfcs/drip.hpp"
#include "tfcs/errors.hpp"
#include "tfcs/frames.hpp"
#include "tfcs/guarantees.hpp"
#include "tfcs/rng.hpp"
#include "tfcs/sensing.hpp"
#include "tfcs/solvers.hpp"

using namespace tfcs;

namespace {

struct Instance {
  TightFrame frame;
  SensingModel model;
  Vector f;
  int s = 1;
  double delta = 0.0;
};

/// Random tight frame, Gaussian A rescaled to the delta-minimizing multiple,
/// f = D x with x s-sparse, bounded noise of size eps.
Instance make_instance(int n, int d, int m, int s, double eps, std::uint64_t seed) {
  Instance in{make_random_tight_frame(n, d, derive_seed(seed, {1})), {}, {}, s, 0.0};
  Matrix a = gen_gaussian(m, n, derive_seed(seed, {2}));
  const auto raw = exact_drip(a, in.frame, 2 * s);
  a *= std::sqrt(2.0 / (raw.lambda_max + raw.lambda_min));
  in.delta = exact_drip(a, in.frame, 2 * s).delta;
  auto rng = make_rng(seed, {3});
  std::uniform_real_distribution<double> mag(1.0, 2.0);
  std::bernoulli_distribution sign(0.5);
  std::vector<int> idx(d);
  for (int i = 0; i < d; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  Vector x = Vector::Zero(d);
  for (int i = 0; i < s; ++i) x(idx[i]) = (sign(rng) ? 1.0 : -1.0) * mag(rng);
  in.f = in.frame.synthesize(x);
  in.model = measure(a, in.f, eps > 0 ? NoiseMode::bounded(eps) : NoiseMode::none(), derive_seed(seed, {4}));
  return in;
}

AuditInput audit_input(const Instance& in, const Vector& f_hat, double q = 1.0) {
  return AuditInput{&in.frame, &in.model, in.f, f_hat, in.s, q, in.delta};
}

}  // namespace

TEST(AuditRecord, SlackAndTolerance) {
  auto r = make_record("x", 1.0, 3.0);
  EXPECT_EQ(r.slack, 2.0);
  EXPECT_TRUE(r.holds);
  EXPECT_TRUE(make_record("x", 1.0 + 5e-9, 1.0).holds);
  EXPECT_FALSE(make_record("x", 1.0 + 5e-8, 1.0).holds);
  EXPECT_TRUE(make_record("x", 1e3 * (1.0 + 5e-9), 1e3).holds);
}

TEST(AuditLemmas, ZeroDifference) {
  const auto in = make_instance(8, 12, 128, 2, 0.05, 7);
  for (double q : {1.0, 0.5}) {
    const auto recs = audit_lemmas(audit_input(in, in.f, q));
    ASSERT_FALSE(recs.empty());
    std::set<std::string> lhs_zero = {"tail_block_energy", "tube_feasibility", "head_energy", "cone_l1",
                                      "cone_lq", "error_bound_general", "error_bound_special",
                                      "error_bound_q"};
    for (const auto& r : recs) {
      EXPECT_TRUE(r.holds) << r.lemma_id << " slack " << r.slack;
      if (lhs_zero.count(r.lemma_id)) {
        EXPECT_NEAR(r.lhs, 0.0, 1e-12) << r.lemma_id;
      }
    }
  }
}

TEST(AuditLemmas, EndToEndWithP1) {
  const auto in = make_instance(8, 12, 128, 2, 0.05, 21);
  ASSERT_LT(in.delta, threshold_general());
  const auto res = solve_p1(in.frame, in.model);
  ASSERT_TRUE(res.converged);
  const auto recs = audit_lemmas(audit_input(in, res.f_hat));
  bool saw_bound = false;
  for (const auto& r : recs) {
    EXPECT_TRUE(r.holds) << r.lemma_id;
    EXPECT_GE(r.slack, -1e-8 * std::max(1.0, std::abs(r.rhs))) << r.lemma_id;
    saw_bound |= r.lemma_id == "error_bound_general";
  }
  EXPECT_TRUE(saw_bound);
}

TEST(AuditLemmas, CompletenessOverSeeds) {
  int audited = 0;
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    const double eps = (seed % 3) * 0.05;
    const auto in = make_instance(6, 9, 96, 1 + seed % 2, eps, seed);
    const auto res = solve_p1(in.frame, in.model);
    ASSERT_TRUE(res.converged) << seed;
    const auto input = audit_input(in, res.f_hat);
    if (audit_precondition_failure(input)) continue;
    ++audited;
    for (const auto& r : audit_lemmas(input)) EXPECT_TRUE(r.holds) << seed << " " << r.lemma_id;
  }
  EXPECT_GE(audited, 36);
}

TEST(AuditLemmas, RejectsInfeasibleEstimate) {
  const auto in = make_instance(8, 12, 128, 2, 0.05, 9);
  Vector bad = in.f;
  bad(0) += 1.0;
  const auto why = audit_precondition_failure(audit_input(in, bad));
  ASSERT_TRUE(why.has_value());
  EXPECT_NE(why->find("infeasible"), std::string::npos);
  EXPECT_THROW(audit_lemmas(audit_input(in, bad)), ContractViolation);
}

TEST(AuditLemmas, RejectsSurrogateFailure) {
  // Wide A: moving along its kernel keeps f_hat feasible but inflates D^T f_hat.
  const auto wide = make_instance(12, 18, 8, 1, 0.0, 5);
  Eigen::FullPivLU<Matrix> lu(wide.model.a);
  const Matrix ker = lu.kernel();
  ASSERT_GT(ker.cols(), 0);
  auto input = audit_input(wide, wide.f + 5.0 * ker.col(0));
  input.delta_2s = 0.5;
  const auto why = audit_precondition_failure(input);
  ASSERT_TRUE(why.has_value());
  EXPECT_NE(why->find("surrogate"), std::string::npos) << *why;
}

TEST(AuditLemmas, RejectsBadArguments) {
  const auto in = make_instance(8, 12, 128, 2, 0.05, 9);
  auto input = audit_input(in, in.f);
  input.delta_2s = 1.0;
  EXPECT_THROW(audit_lemmas(input), ContractViolation);
  input = audit_input(in, in.f);
  input.s = 0;
  EXPECT_THROW(audit_lemmas(input), ContractViolation);
  input = audit_input(in, in.f);
  input.frame = nullptr;
  EXPECT_THROW(audit_lemmas(input), ContractViolation);
}
