#include "altmax/alternator.hpp"

#include <cmath>
#include <iomanip>
#include <limits>

namespace altmax {

namespace {

constexpr double kDisabled = std::numeric_limits<double>::denorm_min();

AscentOptions ascent_options(const AlternationConfig& cfg) {
  AscentOptions o;
  o.grad_tol = cfg.solver_tolerance;
  return o;
}

void check_monotone(double before, double after, const AlternationConfig& cfg, const char* where,
                    const AlternatingTrace& trace) {
  const double slack = 10.0 * cfg.solver_tolerance * (1.0 + std::abs(before));
  if (after < before - slack) {
    throw MonotonicityViolation(std::string("objective decreased during ") + where + " by " +
                                    std::to_string(before - after),
                                trace);
  }
}

}  // namespace

AlternationConfig AlternationConfig::fixed_steps(int K, double solver_tolerance) {
  AlternationConfig c;
  c.max_steps = K;
  c.step_tolerance = kDisabled;
  c.solver_tolerance = solver_tolerance;
  return c;
}

void AlternationConfig::validate() const {
  if (max_steps < 0) throw DomainError("max_steps must be >= 0");
  if (!(step_tolerance > 0) || !(solver_tolerance > 0)) throw DomainError("tolerances must be > 0");
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::MaxSteps: return "max_steps";
    case StopReason::Tolerance: return "tolerance";
    case StopReason::Stationary: return "stationary";
  }
  return "unknown";
}

VectorXd eta_update(const Model& model, const VectorXd& theta, const VectorXd& eta_init,
                    const AlternationConfig& cfg) {
  if (model.capabilities().closed_form_eta) return model.closed_form_eta(theta);
  return maximize_block(model, Block::Eta, {theta, eta_init}, ascent_options(cfg)).x;
}

VectorXd theta_update(const Model& model, const VectorXd& eta, const VectorXd& theta_init,
                      const AlternationConfig& cfg) {
  if (model.capabilities().closed_form_theta) return model.closed_form_theta(eta);
  return maximize_block(model, Block::Theta, {theta_init, eta}, ascent_options(cfg)).x;
}

double local_distance(const Model& model, const ParameterPoint& a, const ParameterPoint& b,
                      const std::optional<MatrixXd>& norm_matrix) {
  VectorXd d = model.to_local(a) - model.to_local(b);
  if (!norm_matrix) return d.norm();
  if (norm_matrix->rows() != d.size()) throw DimensionError("norm matrix has wrong size");
  return std::sqrt(std::max(0.0, d.dot(*norm_matrix * d)));
}

AlternatingTrace run(const Model& model, const ParameterPoint& start, const AlternationConfig& cfg) {
  cfg.validate();
  model.check_point(start);
  if (!model.admissible(start)) throw DomainError("start point is not admissible");

  AlternatingTrace trace;
  ParameterPoint cur = start;
  double L_cur = model.evaluate(cur);

  for (int k = 0;; ++k) {
    TraceRecord rec;
    rec.k = k;
    rec.point_kk = cur;
    rec.L_kk = L_cur;
    if (k > 0) rec.step_norm = local_distance(model, cur, trace.records.back().point_kk, cfg.norm_matrix);

    ParameterPoint half{cur.theta, eta_update(model, cur.theta, cur.eta, cfg)};
    rec.point_kk1 = half;
    rec.L_kk1 = model.evaluate(half);
    trace.records.push_back(rec);
    check_monotone(L_cur, rec.L_kk1, cfg, "the eta update", trace);

    if (k > 0 && (rec.step_norm < cfg.step_tolerance || rec.step_norm == 0.0)) {
      trace.stop_reason =
          rec.step_norm <= cfg.solver_tolerance ? StopReason::Stationary : StopReason::Tolerance;
      break;
    }
    if (k == cfg.max_steps) {
      trace.stop_reason = StopReason::MaxSteps;
      break;
    }

    ParameterPoint next{theta_update(model, half.eta, half.theta, cfg), half.eta};
    const double L_next = model.evaluate(next);
    check_monotone(rec.L_kk1, L_next, cfg, "the theta update", trace);
    cur = std::move(next);
    L_cur = L_next;
  }
  return trace;
}

AlternatingTrace run_from_theta(const Model& model, const VectorXd& theta0,
                                const AlternationConfig& cfg) {
  VectorXd eta_guess = VectorXd::Zero(model.m());
  VectorXd eta0 = eta_update(model, theta0, eta_guess, cfg);
  AlternatingTrace t = run(model, {theta0, eta0}, cfg);
  t.eta0_synthesized = true;
  return t;
}

ProfileResult profile_estimate(const Model& model, const std::vector<ParameterPoint>& starts,
                               const AlternationConfig& cfg) {
  if (starts.empty()) throw DomainError("profile_estimate needs at least one start");
  ProfileResult best;
  bool have = false;
  std::string failures;
  for (size_t i = 0; i < starts.size(); ++i) {
    AlternatingTrace t;
    try {
      t = run(model, starts[i], cfg);
    } catch (const MonotonicityViolation&) {
      throw;
    } catch (const Error& e) {
      failures += "\n  start " + std::to_string(i) + ": " + e.what();
      continue;
    }
    const double v = t.final_value();
    if (!have || v > best.value) {
      best.point = t.final_point();
      best.value = v;
      best.best_start = static_cast<int>(i);
      have = true;
    }
  }
  if (!have) throw Error("profile_estimate: every start failed" + failures);
  return best;
}

double wilks_statistic(const Model& model, const VectorXd& theta_k, const VectorXd& theta_star,
                       const AlternationConfig& cfg) {
  const VectorXd e0 = VectorXd::Zero(model.m());
  const double Lk = model.evaluate({theta_k, eta_update(model, theta_k, e0, cfg)});
  const double Ls = model.evaluate({theta_star, eta_update(model, theta_star, e0, cfg)});
  return 2.0 * (Lk - Ls);
}

double fisher_residual(const EfficientScore& score, const VectorXd& phi_k, const VectorXd& phi_star) {
  if (phi_k.size() != score.xi_breve.size() || phi_star.size() != score.xi_breve.size())
    throw DimensionError("chart coordinates do not match the efficient score");
  return (score.D_breve * (phi_k - phi_star) - score.xi_breve).norm();
}

void write_trace_csv(std::ostream& os, const AlternatingTrace& trace) {
  if (trace.records.empty()) return;
  const int p = trace.records.front().point_kk.p();
  const int m = trace.records.front().point_kk.m();
  os << "k";
  for (int i = 1; i <= p; ++i) os << ",theta_" << i;
  for (int i = 1; i <= m; ++i) os << ",eta_" << i;
  os << ",L_kk,L_kk1,step_norm\n";
  os << std::setprecision(17);
  for (const auto& r : trace.records) {
    os << r.k;
    for (int i = 0; i < p; ++i) os << ',' << r.point_kk.theta(i);
    for (int i = 0; i < m; ++i) os << ',' << r.point_kk.eta(i);
    os << ',' << r.L_kk << ',' << r.L_kk1 << ',' << r.step_norm << '\n';
  }
}

}  // namespace altmax
