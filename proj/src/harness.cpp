#include "tfcs/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "tfcs/errors.hpp"
#include "tfcs/frames.hpp"
#include "tfcs/matrix_io.hpp"
#include "tfcs/rng.hpp"

namespace tfcs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void dump_into(std::string& out, const Json& j, int indent, int depth) {
  const std::string pad = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent) * (depth + 1), ' ') : "";
  const std::string close = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent) * depth, ' ') : "";
  const char* sep = indent > 0 ? ": " : ":";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += pad;
        out += Json(it.key()).dump();
        out += sep;
        dump_into(out, it.value(), indent, depth + 1);
      }
      out += close;
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        out += pad;
        dump_into(out, v, indent, depth + 1);
      }
      out += close;
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? io::format_real(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

Json support_json(const Support& t) { return Json(t); }

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::string out;
  dump_into(out, j, indent, 0);
  return out;
}

Json to_json(const RipReport& r) {
  return {{"s", r.s},
          {"delta", r.delta},
          {"method", to_string(r.method)},
          {"witness_support", support_json(r.witness_support)},
          {"supports_examined", r.supports_examined},
          {"lambda_min", r.lambda_min},
          {"lambda_max", r.lambda_max}};
}

Json to_json(const GuaranteeCertificate& c) {
  return {{"regime", to_string(c.regime)},
          {"delta_2s", c.delta_2s},
          {"s", c.s},
          {"q", c.q},
          {"rho", c.rho},
          {"C0", c.c0},
          {"C1", c.c1},
          {"q0", c.q0},
          {"applicable", c.applicable},
          {"precondition", c.precondition_text}};
}

Json to_json(const InequalityAuditRecord& r) {
  Json inter = Json::object();
  for (const auto& [k, v] : r.intermediates) inter[k] = v;
  return {{"id", r.lemma_id},
          {"lhs", r.lhs},
          {"rhs", r.rhs},
          {"slack", r.slack},
          {"holds", r.holds},
          {"intermediates", inter}};
}

Json to_json(const RecoveryResult& r) {
  Json diag = Json::object();
  for (const auto& [k, v] : r.diagnostics) diag[k] = v;
  std::string program = to_string(r.program);
  if (r.program == Program::pq) program += "(" + io::format_real(r.q) + ")";
  return {{"f_hat", std::vector<double>(r.f_hat.data(), r.f_hat.data() + r.f_hat.size())},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"residual", r.residual},
          {"objective", r.objective},
          {"program", program},
          {"diagnostics", diag}};
}

std::string to_string(BoundCheck b) {
  switch (b) {
    case BoundCheck::holds: return "true";
    case BoundCheck::violated: return "false";
    case BoundCheck::not_asserted: return "n/a";
  }
  return "n/a";
}

void ExperimentConfig::validate() const {
  static const std::vector<std::string> frames = {"identity", "dct", "union_dct", "random", "file"};
  require(std::find(frames.begin(), frames.end(), frame.kind) != frames.end(),
          "config: unknown frame kind '" + frame.kind + "'");
  if (frame.kind == "file") {
    require(!frame.path.empty(), "config: frame kind 'file' needs frame.path");
  } else {
    require(frame.n > 0, "config: frame.n must be positive");
    if (frame.kind == "random") require(frame.d >= frame.n, "config: frame.d must be >= frame.n");
  }
  require(matrix.m > 0, "config: matrix.m must be positive");
  require(matrix.scale == "none" || matrix.scale == "balanced" || matrix.scale == "target_delta",
          "config: matrix.scale must be none, balanced or target_delta");
  if (matrix.scale == "target_delta")
    require(matrix.target_delta >= 0.0 && matrix.target_delta < 1.0, "config: matrix.target_delta must lie in [0, 1)");
  require(signal.model == "synthesis" || signal.model == "analysis", "config: signal.model must be synthesis or analysis");
  require(signal.tail_level >= 0.0, "config: signal.tail_level must be >= 0");
  require(noise.mode == "none" || noise.mode == "bounded" || noise.mode == "gaussian",
          "config: noise.mode must be none, bounded or gaussian");
  require(noise.level >= 0.0, "config: eps must be >= 0");
  require(s >= 1, "config: s must be positive");
  require(trials >= 1, "config: trials must be >= 1");
  require(workers >= 1, "config: workers must be >= 1");
  require(program == "l1" || program == "lq" || program == "l0", "config: program must be l1, lq or l0");
  if (program == "lq") require(q.has_value(), "config: program lq needs q");
  if (q) require(*q > 0.0 && *q <= 1.0, "config: q must lie in (0, 1]");
  if (program == "lq") require(*q < 1.0, "config: program lq needs q < 1");
  if (program == "l0") require(noise.mode == "none", "config: program l0 is noiseless only");
  require(drip_mode == "exact" || drip_mode == "lower_bound", "config: drip mode must be exact or lower_bound");
  require(lower_bound_trials >= 1, "config: lower_bound_trials must be >= 1");
  require(solver.max_iters >= 1 && solver.tol > 0.0, "config: invalid solver options");
}

ExperimentConfig parse_config(const Json& j) {
  require(j.is_object(), "config: top level must be a JSON object");
  ExperimentConfig c;
  try {
    if (j.contains("frame")) {
      const auto& f = j.at("frame");
      c.frame.kind = f.value("kind", c.frame.kind);
      c.frame.n = f.value("n", c.frame.n);
      c.frame.d = f.value("d", c.frame.d);
      c.frame.seed = f.value("seed", c.frame.seed);
      c.frame.path = f.value("path", c.frame.path);
    }
    if (j.contains("matrix")) {
      const auto& m = j.at("matrix");
      c.matrix.kind = parse_matrix_kind(m.value("kind", std::string("gaussian")));
      c.matrix.m = m.value("m", c.matrix.m);
      c.matrix.seed = m.value("seed", c.matrix.seed);
      c.matrix.scale = m.value("scale", c.matrix.scale);
      c.matrix.target_delta = m.value("target_delta", c.matrix.target_delta);
    }
    if (j.contains("signal")) {
      const auto& s = j.at("signal");
      c.signal.model = s.value("model", c.signal.model);
      c.signal.seed = s.value("seed", c.signal.seed);
      c.signal.tail_level = s.value("tail_level", c.signal.tail_level);
    }
    if (j.contains("noise")) {
      const auto& z = j.at("noise");
      c.noise.mode = z.value("mode", c.noise.mode);
      if (z.contains("eps")) c.noise.level = z.at("eps").get<double>();
      if (z.contains("sigma")) c.noise.level = z.at("sigma").get<double>();
      c.noise.seed = z.value("seed", c.noise.seed);
    }
    c.s = j.value("s", c.s);
    if (j.contains("q") && !j.at("q").is_null()) c.q = j.at("q").get<double>();
    c.program = j.value("program", c.program);
    c.trials = j.value("trials", c.trials);
    c.workers = j.value("workers", c.workers);
    if (j.contains("drip")) {
      const auto& d = j.at("drip");
      c.drip_mode = d.value("mode", c.drip_mode);
      c.lower_bound_trials = d.value("trials", c.lower_bound_trials);
    }
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      c.solver.max_iters = s.value("max_iters", c.solver.max_iters);
      c.solver.tol = s.value("tol", c.solver.tol);
      c.solver.seed = s.value("seed", c.solver.seed);
      c.solver.smoothing_floor = s.value("smoothing_floor", c.solver.smoothing_floor);
      c.solver.continuation_factor = s.value("continuation_factor", c.solver.continuation_factor);
    }
    c.output = j.value("output", c.output);
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

namespace {

TightFrame build_frame(const FrameSpec& spec, std::uint64_t seed) {
  if (spec.kind == "identity") return make_identity_frame(spec.n);
  if (spec.kind == "dct") return make_dct_frame(spec.n);
  if (spec.kind == "union_dct") return make_union_frame(Matrix::Identity(spec.n, spec.n), make_dct_frame(spec.n).matrix());
  if (spec.kind == "file") return load_frame(spec.path);
  return make_random_tight_frame(spec.n, spec.d, seed);
}

/// Sparse coefficients with magnitudes in [1, 2], random signs and a seeded
/// support, plus an optional dense Gaussian perturbation.
Vector draw_coefficients(int d, int s, double tail_level, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < s; ++i) {
    std::uniform_int_distribution<int> pick(i, d - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::uniform_real_distribution<double> mag(1.0, 2.0);
  std::bernoulli_distribution sign(0.5);
  Vector x = Vector::Zero(d);
  for (int i = 0; i < s; ++i) x(idx[i]) = (sign(rng) ? 1.0 : -1.0) * mag(rng);
  if (tail_level > 0.0) {
    std::normal_distribution<double> g(0.0, tail_level);
    for (int i = 0; i < d; ++i) x(i) += g(rng);
  }
  return x;
}

NoiseMode noise_mode(const NoiseSpec& spec) {
  if (spec.mode == "bounded") return NoiseMode::bounded(spec.level);
  if (spec.mode == "gaussian") return NoiseMode::gaussian(spec.level);
  return NoiseMode::none();
}

RipReport guarded_exact_drip(const Matrix& a, const TightFrame& frame, int order, int workers) {
  try {
    return exact_drip(a, frame, order, workers);
  } catch (const EnumerationTooLarge& e) {
    throw EnumerationTooLarge(std::string(e.what()) +
                              "; shrink frame.d or s, or set drip.mode to lower_bound and matrix.scale to none"
                              " (bound assertions are then disabled)");
  }
}

}  // namespace

ExperimentRecord run_trial(const ExperimentConfig& cfg, int trial) {
  const auto t = static_cast<std::uint64_t>(trial);
  ExperimentRecord rec;
  rec.trial = trial;
  rec.seeds = {derive_seed(cfg.frame.seed, {t}), derive_seed(cfg.matrix.seed, {t}),
               derive_seed(cfg.signal.seed, {t}), derive_seed(cfg.noise.seed, {t})};
  const int inner_workers = cfg.trials == 1 ? cfg.workers : 1;

  const TightFrame frame = build_frame(cfg.frame, rec.seeds.frame);
  rec.n = frame.n();
  rec.d = frame.d();
  rec.m = cfg.matrix.m;
  rec.s = cfg.s;
  require(cfg.s <= frame.d(), "run_experiment: s exceeds the frame size");
  rec.q = cfg.program == "lq" ? cfg.q : std::nullopt;
  const double q = rec.q.value_or(1.0);

  Matrix a = gen_matrix(cfg.matrix.kind, cfg.matrix.m, frame.n(), rec.seeds.matrix);
  if (cfg.matrix.scale != "none") {
    const RipReport pre = guarded_exact_drip(a, frame, 2 * cfg.s, inner_workers);
    const double c2 = cfg.matrix.scale == "balanced" ? 2.0 / (pre.lambda_max + pre.lambda_min)
                                                     : (1.0 + cfg.matrix.target_delta) / pre.lambda_max;
    a *= std::sqrt(c2);
  }

  if (cfg.signal.model == "analysis")
    require(frame.is_orthobasis(), "run_experiment: analysis signal model needs an orthobasis frame");
  const Vector x = draw_coefficients(frame.d(), cfg.s, cfg.signal.tail_level, rec.seeds.signal);
  const Vector f = frame.synthesize(x);
  const SensingModel model = measure(a, f, noise_mode(cfg.noise), rec.seeds.noise);
  rec.eps = model.epsilon;

  const RipReport rip = cfg.drip_mode == "exact"
                            ? guarded_exact_drip(a, frame, 2 * cfg.s, inner_workers)
                            : random_lower_bound(a, frame, 2 * cfg.s, cfg.lower_bound_trials, rec.seeds.matrix);
  rec.delta_2s = rip.delta;
  rec.method = rip.method;

  const auto certs = certify(rip.delta, frame.n(), cfg.s, rec.q, frame.d());
  GuaranteeCertificate cert = certs[0];
  if (cfg.program == "lq") {
    cert = certs[2];
  } else if (!certs[0].applicable && certs[1].applicable) {
    cert = certs[1];
  }
  rec.regime = cfg.program == "l0" ? "none" : to_string(cert.regime);
  const bool applicable = cfg.program != "l0" && cert.applicable;
  rec.rho = cfg.program == "l0" ? kNaN : cert.rho;
  rec.c0 = applicable ? cert.c0 : kNaN;
  rec.c1 = applicable ? cert.c1 : kNaN;
  rec.q0 = cfg.program == "lq" ? cert.q0 : kNaN;

  RecoveryResult res;
  if (cfg.program == "l1") {
    res = solve_p1(frame, model, cfg.solver);
  } else if (cfg.program == "lq") {
    res = solve_pq(frame, model, q, cfg.solver);
  } else {
    res = solve_p0_oracle(frame, model, std::min(frame.d(), 2 * cfg.s));
  }
  rec.iters = res.iterations;

  const SparseApprox approx = best_s_term(frame.analysis(f), cfg.s, q);
  rec.tail = q == 1.0 ? approx.tail_l1 : approx.tail_lq;
  rec.err_l2 = (res.f_hat - f).norm();
  rec.bound = applicable ? error_bound(rec.c0, rec.c1, rec.tail, cfg.s, rec.eps, q) : kNaN;

  bool gate = res.converged;
  if (cfg.program == "l0") {
    rec.gate_reason = "no audit for the l0 oracle";
  } else if (rip.delta >= 1.0) {
    gate = false;
    rec.gate_reason = "delta_2s >= 1";
  } else {
    AuditInput in{&frame, &model, f, res.f_hat, cfg.s, q, rip.delta};
    if (auto why = audit_precondition_failure(in)) {
      gate = false;
      rec.gate_reason = *why;
    } else {
      rec.audit = audit_lemmas(in);
      rec.audit_total = static_cast<int>(rec.audit.size());
      rec.audit_pass = static_cast<int>(
          std::count_if(rec.audit.begin(), rec.audit.end(), [](const auto& r) { return r.holds; }));
    }
  }
  rec.status = !res.converged ? "not_converged" : (gate || cfg.program == "l0" ? "converged" : "gate_failed");

  if (applicable && gate && rip.method == RipMethod::exact)
    rec.within_bound = rec.err_l2 <= rec.bound * (1.0 + 1e-6) ? BoundCheck::holds : BoundCheck::violated;
  return rec;
}

std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ExperimentRecord> out(static_cast<std::size_t>(cfg.trials));
  std::vector<std::exception_ptr> errors(out.size());
  std::atomic<int> next{0};
  auto work = [&] {
    for (int t = next++; t < cfg.trials; t = next++) {
      try {
        out[static_cast<std::size_t>(t)] = run_trial(cfg, t);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    }
  };
  const int n_threads = std::min(cfg.workers, cfg.trials);
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(work);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

namespace {

std::string csv_real(double v) { return std::isfinite(v) ? io::format_real(v) : ""; }

double parse_real(const std::string& s, const char* what) {
  if (s.empty()) return kNaN;
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw IoError(std::string("csv: bad real in column ") + what);
  return v;
}

int parse_int(const std::string& s, const char* what) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw IoError(std::string("csv: bad integer in column ") + what);
  return v;
}

bool same_real(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return a == b;
}

}  // namespace

bool same_csv_fields(const ExperimentRecord& a, const ExperimentRecord& b) {
  const bool q_same = a.q.has_value() == b.q.has_value() && (!a.q || *a.q == *b.q);
  return a.trial == b.trial && a.n == b.n && a.d == b.d && a.m == b.m && a.s == b.s && q_same && same_real(a.eps, b.eps) &&
         same_real(a.delta_2s, b.delta_2s) && a.regime == b.regime && same_real(a.rho, b.rho) && same_real(a.c0, b.c0) &&
         same_real(a.c1, b.c1) && same_real(a.q0, b.q0) && same_real(a.tail, b.tail) && same_real(a.err_l2, b.err_l2) &&
         same_real(a.bound, b.bound) && a.within_bound == b.within_bound && a.iters == b.iters && a.status == b.status &&
         a.audit_pass == b.audit_pass && a.audit_total == b.audit_total;
}

std::string to_csv(const std::vector<ExperimentRecord>& records) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : records) {
    const std::vector<std::string> cols = {std::to_string(r.trial),
                                           std::to_string(r.n),
                                           std::to_string(r.d),
                                           std::to_string(r.m),
                                           std::to_string(r.s),
                                           r.q ? io::format_real(*r.q) : "",
                                           csv_real(r.eps),
                                           csv_real(r.delta_2s),
                                           r.regime,
                                           csv_real(r.rho),
                                           csv_real(r.c0),
                                           csv_real(r.c1),
                                           csv_real(r.q0),
                                           csv_real(r.tail),
                                           csv_real(r.err_l2),
                                           csv_real(r.bound),
                                           to_string(r.within_bound),
                                           std::to_string(r.iters),
                                           r.status,
                                           std::to_string(r.audit_pass),
                                           std::to_string(r.audit_total)};
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out += ',';
      out += cols[i];
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::vector<ExperimentRecord>& records, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << to_csv(records);
  if (!f) throw IoError("write failed for " + path.string());
}

std::vector<ExperimentRecord> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw IoError("csv: missing or unexpected header");
  std::vector<ExperimentRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> c;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      c.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (c.size() != 21) throw IoError("csv: expected 21 columns, got " + std::to_string(c.size()));
    ExperimentRecord r;
    r.trial = parse_int(c[0], "trial");
    r.n = parse_int(c[1], "n");
    r.d = parse_int(c[2], "d");
    r.m = parse_int(c[3], "m");
    r.s = parse_int(c[4], "s");
    if (!c[5].empty()) r.q = parse_real(c[5], "q");
    r.eps = parse_real(c[6], "eps");
    r.delta_2s = parse_real(c[7], "delta_2s");
    r.regime = c[8];
    r.rho = parse_real(c[9], "rho");
    r.c0 = parse_real(c[10], "C0");
    r.c1 = parse_real(c[11], "C1");
    r.q0 = parse_real(c[12], "q0");
    r.tail = parse_real(c[13], "tail");
    r.err_l2 = parse_real(c[14], "err_l2");
    r.bound = parse_real(c[15], "bound");
    if (c[16] == "true") {
      r.within_bound = BoundCheck::holds;
    } else if (c[16] == "false") {
      r.within_bound = BoundCheck::violated;
    } else if (c[16] == "n/a") {
      r.within_bound = BoundCheck::not_asserted;
    } else {
      throw IoError("csv: bad within_bound value '" + c[16] + "'");
    }
    r.iters = parse_int(c[17], "iters");
    r.status = c[18];
    r.audit_pass = parse_int(c[19], "audit_pass");
    r.audit_total = parse_int(c[20], "audit_total");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ExperimentRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

Json to_json(const ExperimentRecord& r) {
  Json j = {{"trial", r.trial},
            {"seeds", {{"frame", r.seeds.frame}, {"matrix", r.seeds.matrix}, {"signal", r.seeds.signal}, {"noise", r.seeds.noise}}},
            {"n", r.n},
            {"d", r.d},
            {"m", r.m},
            {"s", r.s},
            {"q", r.q ? Json(*r.q) : Json(nullptr)},
            {"eps", r.eps},
            {"delta_2s", r.delta_2s},
            {"method", to_string(r.method)},
            {"regime", r.regime},
            {"rho", r.rho},
            {"C0", r.c0},
            {"C1", r.c1},
            {"q0", r.q0},
            {"tail", r.tail},
            {"err_l2", r.err_l2},
            {"bound", r.bound},
            {"within_bound", to_string(r.within_bound)},
            {"iters", r.iters},
            {"status", r.status},
            {"audit_pass", r.audit_pass},
            {"audit_total", r.audit_total}};
  if (!r.gate_reason.empty()) j["gate_reason"] = r.gate_reason;
  return j;
}

}  // namespace tfcs
