#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tfcs/frames.hpp"
#include "tfcs/sensing.hpp"
#include "tfcs/types.hpp"

// Numerical audit of the inequality chain behind the recovery guarantees,
// evaluated on a concrete (A, D, f, f_hat) with h = f_hat - f.
namespace tfcs {

struct InequalityAuditRecord {
  std::string lemma_id;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  ///< rhs - lhs
  bool holds = true;   ///< slack >= -1e-8 * max(1, |rhs|)
  std::map<std::string, double> intermediates;
};

InequalityAuditRecord make_record(std::string id, double lhs, double rhs,
                                  std::map<std::string, double> intermediates = {});

/// Tolerances of the audit gate.
inline constexpr double kAuditSlackTol = 1e-8;
inline constexpr double kFeasibilityRelTol = 1e-9;
inline constexpr double kFeasibilityAbsTol = 1e-10;
inline constexpr double kSurrogateRelTol = 1e-10;

bool within_budget(double residual, double eps);

struct AuditInput {
  const TightFrame* frame = nullptr;
  const SensingModel* model = nullptr;  ///< provides A, y and epsilon
  Vector f;                             ///< ground truth
  Vector f_hat;                         ///< candidate reconstruction
  int s = 1;
  double q = 1.0;  ///< 1 audits the l1 chain, q < 1 the l_q chain
  double delta_2s = 0.0;
};

/// Name of the first violated hypothesis, or nullopt when the audit may run.
std::optional<std::string> audit_precondition_failure(const AuditInput& in);

/// One record per audited inequality. Throws ContractViolation naming the
/// violated hypothesis when the preconditions do not hold.
std::vector<InequalityAuditRecord> audit_lemmas(const AuditInput& in);

}  // namespace tfcs
