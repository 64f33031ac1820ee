#include "tfcs/audit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tfcs/errors.hpp"
#include "tfcs/guarantees.hpp"
#include "tfcs/matrix_io.hpp"

namespace tfcs {

InequalityAuditRecord make_record(std::string id, double lhs, double rhs,
                                  std::map<std::string, double> intermediates) {
  InequalityAuditRecord r;
  r.lemma_id = std::move(id);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.holds = r.slack >= -kAuditSlackTol * std::max(1.0, std::abs(rhs));
  r.intermediates = std::move(intermediates);
  return r;
}

bool within_budget(double residual, double eps) {
  return residual <= eps * (1.0 + kFeasibilityRelTol) + kFeasibilityAbsTol;
}

namespace {

double program_objective(const Vector& x, double q) { return q == 1.0 ? x.lpNorm<1>() : lq_power(x, q); }

Vector masked(const Vector& x, const Support& t) {
  Vector out = Vector::Zero(x.size());
  for (int i : t) out(i) = x(i);
  return out;
}

Support join(const std::vector<Support>& blocks, std::size_t from, std::size_t to) {
  Support out;
  for (std::size_t j = from; j < std::min(to, blocks.size()); ++j)
    out.insert(out.end(), blocks[j].begin(), blocks[j].end());
  return out;
}

}  // namespace

std::optional<std::string> audit_precondition_failure(const AuditInput& in) {
  if (in.frame == nullptr || in.model == nullptr) return "frame and sensing model are required";
  const TightFrame& frame = *in.frame;
  const SensingModel& model = *in.model;
  if (model.a.cols() != frame.n() || in.f.size() != frame.n() || in.f_hat.size() != frame.n() ||
      model.y.size() != model.a.rows())
    return "dimension mismatch between A, D, y, f and f_hat";
  if (in.s < 1 || in.s > frame.d()) return "need 1 <= s <= d";
  if (!(in.q > 0.0 && in.q <= 1.0)) return "q must lie in (0, 1]";
  if (!(in.delta_2s >= 0.0 && in.delta_2s < 1.0)) return "delta_2s must lie in [0, 1)";
  if (!(model.epsilon >= 0.0)) return "epsilon must be >= 0";
  const double res_true = (model.a * in.f - model.y).norm();
  if (!within_budget(res_true, model.epsilon))
    return "ground truth violates the noise budget: ||A f - y|| = " + io::format_real(res_true) +
           " > eps = " + io::format_real(model.epsilon);
  const double res_hat = (model.a * in.f_hat - model.y).norm();
  if (!within_budget(res_hat, model.epsilon))
    return "f_hat infeasible: ||A f_hat - y|| = " + io::format_real(res_hat) +
           " > eps = " + io::format_real(model.epsilon);
  const double obj_true = program_objective(frame.analysis(in.f), in.q);
  const double obj_hat = program_objective(frame.analysis(in.f_hat), in.q);
  if (obj_hat > obj_true + kSurrogateRelTol * std::max(1.0, obj_true))
    return "minimizer surrogate fails: objective(D^T f_hat) = " + io::format_real(obj_hat) +
           " > objective(D^T f) = " + io::format_real(obj_true);
  return std::nullopt;
}

std::vector<InequalityAuditRecord> audit_lemmas(const AuditInput& in) {
  if (auto why = audit_precondition_failure(in)) throw ContractViolation("audit_lemmas: " + *why);
  const TightFrame& frame = *in.frame;
  const Matrix& a = in.model->a;
  const Matrix& dm = frame.matrix();
  const double eps = in.model->epsilon;
  const double delta = in.delta_2s;
  const double q = in.q;
  const int s = in.s;
  const double sd = static_cast<double>(s);

  const Vector h = in.f_hat - in.f;
  const Vector xf = frame.analysis(in.f);
  const Vector xh = frame.analysis(h);
  const BlockPartition part = block_partition(xf, xh, s, q);
  const auto& blocks = part.blocks;
  const double omega = part.omega;

  std::vector<Vector> hb;
  for (const auto& t : blocks) hb.push_back(masked(xh, t));
  const Matrix ad = a * dm;

  // Off-head block sums.
  double r2 = 0.0, l2 = 0.0, s1 = 0.0, sq = 0.0;
  Vector tail_sum = Vector::Zero(a.rows());
  for (std::size_t j = 1; j < hb.size(); ++j) {
    s1 += hb[j].lpNorm<1>();
    sq += lq_power(hb[j], q);
    if (j >= 2) {
      r2 += hb[j].squaredNorm();
      l2 += hb[j].norm();
      tail_sum += ad * hb[j];
    }
  }
  const Vector h01 = masked(xh, join(blocks, 0, 2));
  const Vector ad_h01 = ad * h01;
  const double mix = r2 + delta * l2 * l2;
  const double cal_n = std::sqrt(mix);

  std::vector<InequalityAuditRecord> out;

  // <ADu, ADv> <= delta_2s |Du| |Dv| + <Du, Dv> over signed block pairs.
  {
    InequalityAuditRecord worst;
    bool first = true;
    for (std::size_t i = 0; i < hb.size(); ++i)
      for (std::size_t j = i; j < hb.size(); ++j)
        for (double sign : {1.0, -1.0}) {
          const Vector du = dm * hb[i];
          const Vector dv = sign * (dm * hb[j]);
          const auto rec = make_record("drip_inner_product", (a * du).dot(a * dv),
                                       delta * du.norm() * dv.norm() + du.dot(dv),
                                       {{"block_i", double(i)}, {"block_j", double(j)}, {"sign", sign}});
          if (first || rec.slack < worst.slack) worst = rec;
          first = false;
        }
    out.push_back(worst);
  }
  out.push_back(make_record("tail_block_energy", tail_sum.squaredNorm(), mix));
  out.push_back(make_record("tail_minus_head_energy", tail_sum.squaredNorm() - ad_h01.squaredNorm(),
                            mix - (1.0 - delta) * h01.squaredNorm()));
  out.push_back(make_record("tube_feasibility", (a * h).norm(), 2.0 * eps));
  out.push_back(make_record("head_energy", h01.squaredNorm(),
                            (2.0 * eps + cal_n) * (2.0 * eps + cal_n) / (1.0 - delta), {{"N", cal_n}}));

  const Support head = blocks.front();
  const Vector xf_off = xf - masked(xf, head);

  if (q == 1.0) {
    const double tail = xf_off.lpNorm<1>();
    out.push_back(make_record("tail_l2_by_omega", r2, omega * (1.0 - omega) / sd * s1 * s1,
                              {{"omega", omega}}));
    const double w = 1.0 - 0.75 * omega;
    out.push_back(make_record("tail_l2_mixed_by_omega", mix,
                              (omega * (1.0 - omega) + delta * w * w) / sd * s1 * s1, {{"omega", omega}}));
    out.push_back(make_record("cone_l1", s1, 2.0 * tail + hb[0].lpNorm<1>()));
    if (delta < threshold_general()) {
      const auto k = constants_general(delta);
      const double rhs = 2.0 / (1.0 - k.rho) * tail +
                         2.0 * std::numbers::sqrt2 / ((1.0 - k.rho) * std::sqrt(1.0 - delta)) *
                             std::sqrt(sd) * eps;
      out.push_back(make_record("off_head_l1_bound", s1, rhs, {{"N", cal_n}, {"rho", k.rho}, {"omega", omega}}));
      out.push_back(make_record("error_bound_general", h.norm(), error_bound(k.c0, k.c1, tail, s, eps, 1.0),
                                {{"C0", k.c0}, {"C1", k.c1}}));
    }
    if (frame.d() <= 4 * s) {
      // At most four blocks: T23 = T2 u T3 is 2s-sparse.
      const Vector h23 = masked(xh, join(blocks, 2, blocks.size()));
      const double ad23 = (ad * h23).squaredNorm();
      const double d23 = (dm * h23).squaredNorm();
      out.push_back(make_record("pair_block_upper", ad23, (1.0 + delta) * d23));
      out.push_back(make_record("pair_block_contraction", (1.0 + delta) * d23, (1.0 + delta) * h23.squaredNorm()));
      out.push_back(make_record("pair_block_difference", ad23 - ad_h01.squaredNorm(),
                                (1.0 + delta) * h23.squaredNorm() - (1.0 - delta) * h01.squaredNorm()));
      if (delta < threshold_special()) {
        const auto k = constants_special(delta);
        const double rhs = 2.0 / (1.0 - k.rho) * tail +
                           2.0 * std::numbers::sqrt2 / ((1.0 - k.rho) * std::sqrt(1.0 - delta)) *
                               std::sqrt(sd) * eps;
        out.push_back(make_record("off_head_l1_bound_special", s1, rhs,
                                  {{"N", std::sqrt(1.0 + delta) * h23.norm()}, {"rho", k.rho}, {"omega", omega}}));
        out.push_back(make_record("error_bound_special", h.norm(),
                                  error_bound(k.c0, k.c1, tail, s, eps, 1.0), {{"C0", k.c0}, {"C1", k.c1}}));
      }
    }
  } else {
    const double tail_q = std::pow(lq_power(xf_off, q), 1.0 / q);
    const double e = (2.0 - q) / q;
    const double wq = omega > 0.0 ? (1.0 - omega) * std::pow(omega, e) : 0.0;
    const double sq2 = std::pow(sq, 2.0 / q);
    out.push_back(make_record("tail_l2_by_omega_q", r2, wq / std::pow(sd, e) * sq2, {{"omega", omega}}));
    out.push_back(make_record("tail_l2_mixed_by_omega_q", mix, (wq + delta) / std::pow(sd, 2.0 / q - 1.0) * sq2,
                              {{"omega", omega}}));
    out.push_back(make_record("cone_lq", sq, 2.0 * lq_power(xf_off, q) + lq_power(hb[0], q)));
    if (lq_admissible(delta, q)) {
      const double rho = rho_q(delta, q);
      const double scale = std::pow(-std::expm1(q * std::log(rho)), 1.0 / q);
      const double rhs = std::pow(2.0, 2.0 / q - 1.0) / scale * tail_q +
                         std::pow(2.0, 2.0 / q - 0.5) * std::pow(sd, 1.0 / q - 0.5) * eps /
                             (scale * std::sqrt(1.0 - delta));
      out.push_back(make_record("off_head_lq_bound", std::pow(sq, 1.0 / q), rhs,
                                {{"N", cal_n}, {"rho", rho}, {"omega", omega}}));
      const auto k = constants_q(delta, q);
      out.push_back(make_record("error_bound_q", h.norm(), error_bound(k.c0, k.c1, tail_q, s, eps, q),
                                {{"C0", k.c0}, {"C1", k.c1}}));
    }
  }
  return out;
}

}  // namespace tfcs
