#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tfcs/audit.hpp"
#include "tfcs/drip.hpp"
#include "tfcs/guarantees.hpp"
#include "tfcs/sensing.hpp"
#include "tfcs/solvers.hpp"

namespace tfcs {

using Json = nlohmann::ordered_json;

/// Serializes with every real printed at 17 significant digits and
/// non-finite reals as null.
std::string dump_json(const Json& j, int indent = 2);

Json to_json(const RipReport& r);
Json to_json(const GuaranteeCertificate& c);
Json to_json(const InequalityAuditRecord& r);
Json to_json(const RecoveryResult& r);

struct FrameSpec {
  std::string kind = "random";  ///< identity | dct | union_dct | random | file
  int n = 8;
  int d = 12;
  std::uint64_t seed = 1;
  std::string path;  ///< kind == file
};

struct MatrixSpec {
  MatrixKind kind = MatrixKind::gaussian;
  int m = 128;
  std::uint64_t seed = 2;
  /// none | balanced (c^2 = 2 / (Lmax + Lmin), the delta-minimizing multiple)
  /// | target_delta (c^2 = (1 + t) / Lmax, so delta = max(t, 1 - c^2 Lmin))
  std::string scale = "none";
  double target_delta = 0.0;
};

struct SignalSpec {
  std::string model = "synthesis";  ///< synthesis (f = D x) | analysis (orthobasis only)
  std::uint64_t seed = 3;
  double tail_level = 0.0;  ///< std. dev. of dense perturbation added to x
};

struct NoiseSpec {
  std::string mode = "none";  ///< none | bounded | gaussian
  double level = 0.0;         ///< eps for bounded, sigma for gaussian
  std::uint64_t seed = 4;
};

struct ExperimentConfig {
  FrameSpec frame;
  MatrixSpec matrix;
  SignalSpec signal;
  NoiseSpec noise;
  int s = 1;
  std::optional<double> q;      ///< required for program lq
  std::string program = "l1";   ///< l1 | lq | l0
  int trials = 1;
  int workers = 1;
  std::string drip_mode = "exact";  ///< exact | lower_bound
  int lower_bound_trials = 2000;
  SolverOptions solver;
  std::string output;

  /// Throws ContractViolation naming the first invalid field.
  void validate() const;
};

ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Three-valued bound assertion; `not_asserted` whenever no claim is made.
enum class BoundCheck { not_asserted, holds, violated };
std::string to_string(BoundCheck b);

struct TrialSeeds {
  std::uint64_t frame = 0, matrix = 0, signal = 0, noise = 0;
};

struct ExperimentRecord {
  int trial = 0;
  TrialSeeds seeds;
  int n = 0, d = 0, m = 0, s = 0;
  std::optional<double> q;
  double eps = 0.0;
  double delta_2s = 0.0;
  RipMethod method = RipMethod::exact;
  std::string regime;
  double rho = 0.0, c0 = 0.0, c1 = 0.0, q0 = 0.0;  ///< NaN when undefined
  double tail = 0.0;
  double err_l2 = 0.0;
  double bound = 0.0;  ///< NaN when the certificate is inapplicable
  BoundCheck within_bound = BoundCheck::not_asserted;
  int iters = 0;
  /// converged | not_converged | gate_failed (solver converged but f_hat
  /// fails feasibility or the minimizer surrogate)
  std::string status;
  int audit_pass = 0;
  int audit_total = 0;
  std::vector<InequalityAuditRecord> audit;  ///< not part of the CSV
  std::string gate_reason;                   ///< not part of the CSV
};

/// Equality over the CSV columns, with NaN equal to NaN.
bool same_csv_fields(const ExperimentRecord& a, const ExperimentRecord& b);

/// Deterministic in the config; trials run on `config.workers` threads and
/// come back in trial order.
std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& config);
ExperimentRecord run_trial(const ExperimentConfig& config, int trial);

inline constexpr const char* kCsvHeader =
    "trial,n,d,m,s,q,eps,delta_2s,regime,rho,C0,C1,q0,tail,err_l2,bound,within_bound,iters,status,"
    "audit_pass,audit_total";

std::string to_csv(const std::vector<ExperimentRecord>& records);
void write_csv(const std::vector<ExperimentRecord>& records, const std::filesystem::path& path);
std::vector<ExperimentRecord> parse_csv(const std::string& text);
std::vector<ExperimentRecord> read_csv(const std::filesystem::path& path);

Json to_json(const ExperimentRecord& r);

/// Command-line entry point; returns the process exit code.
int cli_main(int argc, char** argv);

}  // namespace tfcs
