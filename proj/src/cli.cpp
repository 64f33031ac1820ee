#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "tfcs/errors.hpp"
#include "tfcs/frames.hpp"
#include "tfcs/harness.hpp"
#include "tfcs/matrix_io.hpp"

namespace tfcs {

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string out;
  std::string config;
  std::string format;  ///< empty selects csv for experiments
};

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw IoError("cannot write " + g.out);
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

std::string matrix_text(const Matrix& m) {
  std::ostringstream ss;
  io::write_matrix(ss, m);
  return ss.str();
}

TightFrame frame_or_identity(const std::string& path, int n) {
  return path.empty() ? make_identity_frame(n) : load_frame(path);
}

/// Inputs shared by the solve and audit subcommands.
struct ProblemFiles {
  std::string matrix, frame, y;
  double eps = 0.0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--matrix", matrix, "sensing matrix A (text matrix file)")->required();
    cmd->add_option("--frame", frame, "tight frame D (text matrix file); identity when omitted");
    cmd->add_option("--y", y, "measurement vector file")->required();
    cmd->add_option("--eps", eps, "noise budget epsilon >= 0");
  }

  SensingModel model() const {
    SensingModel m;
    m.a = io::load_matrix(matrix);
    m.y = io::load_vector(y);
    m.epsilon = eps;
    return m;
  }
};

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Compressed sensing with tight frames: frames, D-RIP constants, recovery guarantees, solvers and "
               "bound-verification experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "base seed for every randomized step (default 0)");
  app.add_option("--out", g.out, "write the result to this file instead of stdout");
  app.add_option("--config", g.config, "experiment config (JSON)");
  app.add_option("--format", g.format, "experiment output format (csv by default)")->check(CLI::IsMember({"csv", "json"}));

  std::function<void()> action;

  // frame
  auto* frame = app.add_subcommand("frame", "build or check tight frames")->require_subcommand(1);
  std::string frame_kind = "random", frame_path;
  int frame_n = 8, frame_d = 12;
  auto* frame_gen = frame->add_subcommand("gen", "write a tight frame as a text matrix");
  frame_gen->add_option("--kind", frame_kind, "identity | dct | union_dct | random")
      ->check(CLI::IsMember({"identity", "dct", "union_dct", "random"}));
  frame_gen->add_option("--n", frame_n, "signal dimension")->check(CLI::PositiveNumber);
  frame_gen->add_option("--d", frame_d, "number of frame vectors (random kind)")->check(CLI::PositiveNumber);
  frame_gen->callback([&] {
    action = [&] {
      TightFrame f = frame_kind == "random" ? make_random_tight_frame(frame_n, frame_d, g.seed)
                     : frame_kind == "dct"  ? make_dct_frame(frame_n)
                     : frame_kind == "union_dct"
                         ? make_union_frame(Matrix::Identity(frame_n, frame_n), make_dct_frame(frame_n).matrix())
                         : make_identity_frame(frame_n);
      emit(g, matrix_text(f.matrix()));
    };
  });
  auto* frame_verify = frame->add_subcommand("verify", "report the tightness defect and coherence of a frame file");
  frame_verify->add_option("--frame", frame_path, "frame file")->required();
  frame_verify->callback([&] {
    action = [&] {
      const Matrix d = io::load_matrix(frame_path);
      const FrameCheck chk = verify_tight(d);
      Json j = {{"n", d.rows()},
                {"d", d.cols()},
                {"defect", chk.defect},
                {"columns_nonzero", chk.columns_nonzero},
                {"tight", chk.tight()},
                {"coherence", d.cols() > 1 ? coherence(d) : 0.0}};
      emit(g, dump_json(j));
    };
  });

  // sense
  auto* sense = app.add_subcommand("sense", "sensing matrices and concentration probes")->require_subcommand(1);
  std::string matrix_kind = "gaussian", nu_path;
  int sense_m = 16, sense_n = 8, probe_trials = 1000;
  double probe_delta = 0.5;
  auto* sense_gen = sense->add_subcommand("gen", "write a seeded random sensing matrix");
  sense_gen->add_option("--kind", matrix_kind, "gaussian | bernoulli")->check(CLI::IsMember({"gaussian", "bernoulli"}));
  sense_gen->add_option("--m", sense_m, "rows")->check(CLI::PositiveNumber);
  sense_gen->add_option("--n", sense_n, "columns")->check(CLI::PositiveNumber);
  sense_gen->callback([&] {
    action = [&] { emit(g, matrix_text(gen_matrix(parse_matrix_kind(matrix_kind), sense_m, sense_n, g.seed))); };
  });
  auto* sense_probe = sense->add_subcommand("probe", "estimate P(| |A nu|^2 - |nu|^2 | >= delta |nu|^2)");
  sense_probe->add_option("--kind", matrix_kind, "gaussian | bernoulli")->check(CLI::IsMember({"gaussian", "bernoulli"}));
  sense_probe->add_option("--m", sense_m, "rows")->check(CLI::PositiveNumber);
  sense_probe->add_option("--n", sense_n, "columns")->check(CLI::PositiveNumber);
  sense_probe->add_option("--delta", probe_delta, "deviation level in (0, 1)");
  sense_probe->add_option("--trials", probe_trials, "number of seeded matrices")->check(CLI::PositiveNumber);
  sense_probe->add_option("--nu", nu_path, "test vector file (first basis vector when omitted)");
  sense_probe->callback([&] {
    action = [&] {
      Vector nu = Vector::Zero(sense_n);
      if (nu_path.empty()) {
        nu(0) = 1.0;
      } else {
        nu = io::load_vector(nu_path);
      }
      const double p = concentration_probe(parse_matrix_kind(matrix_kind), sense_m, sense_n, nu, probe_delta,
                                           probe_trials, g.seed);
      emit(g, dump_json(Json{{"m", sense_m}, {"n", sense_n}, {"delta", probe_delta}, {"trials", probe_trials},
                             {"empirical_prob", p}}));
    };
  });

  // drip
  auto* drip = app.add_subcommand("drip", "restricted isometry constants adapted to a frame")->require_subcommand(1);
  std::string drip_matrix, drip_frame;
  int drip_s = 1, drip_workers = 1, drip_trials = 1000;
  for (auto* cmd : {drip->add_subcommand("exact", "exact constant by enumerating every support"),
                    drip->add_subcommand("lower", "lower bound from random supports")}) {
    cmd->add_option("--matrix", drip_matrix, "sensing matrix file")->required();
    cmd->add_option("--frame", drip_frame, "frame file; identity when omitted");
    cmd->add_option("--s", drip_s, "sparsity level")->required()->check(CLI::PositiveNumber);
  }
  drip->get_subcommand("exact")->add_option("--workers", drip_workers, "threads")->check(CLI::PositiveNumber);
  drip->get_subcommand("lower")->add_option("--trials", drip_trials, "random supports")->check(CLI::PositiveNumber);
  drip->get_subcommand("exact")->callback([&] {
    action = [&] {
      const Matrix a = io::load_matrix(drip_matrix);
      emit(g, dump_json(to_json(exact_drip(a, frame_or_identity(drip_frame, static_cast<int>(a.cols())), drip_s,
                                           drip_workers))));
    };
  });
  drip->get_subcommand("lower")->callback([&] {
    action = [&] {
      const Matrix a = io::load_matrix(drip_matrix);
      emit(g, dump_json(to_json(random_lower_bound(a, frame_or_identity(drip_frame, static_cast<int>(a.cols())),
                                                   drip_s, drip_trials, g.seed))));
    };
  });

  // certify
  auto* cert = app.add_subcommand("certify", "recovery constants and applicability for a given delta_2s");
  double cert_delta = 0.0;
  int cert_n = 1, cert_s = 1;
  std::optional<int> cert_d;
  std::optional<double> cert_q;
  cert->add_option("--delta", cert_delta, "delta_2s")->required();
  cert->add_option("--n", cert_n, "signal dimension")->required();
  cert->add_option("--s", cert_s, "sparsity level")->required();
  cert->add_option("--d", cert_d, "number of frame vectors (defaults to n)");
  cert->add_option("--q", cert_q, "quasi-norm exponent in (0, 1] for the l_q regime");
  cert->callback([&] {
    action = [&] {
      Json arr = Json::array();
      for (const auto& c : certify(cert_delta, cert_n, cert_s, cert_q, cert_d)) arr.push_back(to_json(c));
      emit(g, dump_json(arr));
    };
  });

  // solve
  auto* solve = app.add_subcommand("solve", "recover f from y = A f + z")->require_subcommand(1);
  ProblemFiles prob;
  SolverOptions opts;
  double solve_q = 0.5;
  int s_max = 2;
  std::string fhat_out;
  for (auto* cmd : {solve->add_subcommand("l1", "min ||D^T f||_1 s.t. ||A f - y|| <= eps"),
                    solve->add_subcommand("lq", "min ||D^T f||_q^q s.t. ||A f - y|| <= eps (stationary point)"),
                    solve->add_subcommand("l0", "exhaustive min ||D^T f||_0 s.t. A f = y")}) {
    prob.add_to(cmd);
    cmd->add_option("--max-iters", opts.max_iters, "iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--tol", opts.tol, "stopping tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--fhat-out", fhat_out, "also write f_hat as a vector file");
  }
  solve->get_subcommand("lq")->add_option("--q", solve_q, "exponent in (0, 1)");
  solve->get_subcommand("l0")->add_option("--s-max", s_max, "largest support size to try");
  auto run_solve = [&](const std::string& which) {
    action = [&, which] {
      opts.seed = g.seed;
      const SensingModel m = prob.model();
      const TightFrame f = frame_or_identity(prob.frame, m.n());
      const RecoveryResult r = which == "l1"   ? solve_p1(f, m, opts)
                               : which == "lq" ? solve_pq(f, m, solve_q, opts)
                                               : solve_p0_oracle(f, m, s_max);
      if (!fhat_out.empty()) io::save_vector(fhat_out, r.f_hat);
      emit(g, dump_json(to_json(r)));
    };
  };
  for (const char* which : {"l1", "lq", "l0"})
    solve->get_subcommand(which)->callback([&, which] { run_solve(which); });

  // lemmas
  auto* lemmas = app.add_subcommand("lemmas", "inequality audits")->require_subcommand(1);
  auto* audit = lemmas->add_subcommand("audit", "evaluate every audited inequality for (A, D, f, f_hat)");
  ProblemFiles aprob;
  std::string f_path, fhat_path;
  int audit_s = 1;
  double audit_delta = 0.0, audit_q = 1.0;
  aprob.add_to(audit);
  audit->add_option("--f", f_path, "ground-truth signal file")->required();
  audit->add_option("--fhat", fhat_path, "reconstruction file")->required();
  audit->add_option("--s", audit_s, "sparsity level")->required();
  audit->add_option("--delta", audit_delta, "delta_2s of (A, D)")->required();
  audit->add_option("--q", audit_q, "1 for the l1 chain, q < 1 for the l_q chain");
  audit->callback([&] {
    action = [&] {
      const SensingModel m = aprob.model();
      const TightFrame f = frame_or_identity(aprob.frame, m.n());
      AuditInput in{&f, &m, io::load_vector(f_path), io::load_vector(fhat_path), audit_s, audit_q, audit_delta};
      Json arr = Json::array();
      for (const auto& r : audit_lemmas(in)) arr.push_back(to_json(r));
      emit(g, dump_json(arr));
    };
  });

  // experiment
  auto* exp = app.add_subcommand("experiment", "bound-verification experiments")->require_subcommand(1);
  auto* exp_run = exp->add_subcommand("run", "run every trial of --config and report per-trial records");
  std::optional<int> exp_workers;
  exp_run->add_option("--workers", exp_workers, "override the config's worker count")->check(CLI::PositiveNumber);
  exp_run->callback([&] {
    action = [&] {
      require(!g.config.empty(), "experiment run: --config is required");
      ExperimentConfig cfg = load_config(g.config);
      if (exp_workers) cfg.workers = *exp_workers;
      if (g.out.empty()) g.out = cfg.output;
      const auto records = run_experiment(cfg);
      if (g.format == "json") {
        Json arr = Json::array();
        for (const auto& r : records) arr.push_back(to_json(r));
        emit(g, dump_json(arr));
      } else {
        emit(g, to_csv(records));
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    if (action) action();
    return 0;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace tfcs
