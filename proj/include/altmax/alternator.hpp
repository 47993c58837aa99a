#pragma once

// Alternating partial maximization.
//
// From (theta_0, eta_0) each step first maximizes over eta with theta fixed,
// then over theta with the new eta fixed:
//
//   u_{k,k+1}   = (theta_k, argmax_eta L(theta_k, eta))
//   u_{k+1,k+1} = (argmax_theta L(theta, eta_{k+1}), eta_{k+1})
//
// so L is non-decreasing along u_00, u_01, u_11, u_12, ...

#include "altmax/ascent.hpp"
#include "altmax/model.hpp"

#include <optional>
#include <ostream>
#include <vector>

namespace altmax {

struct AlternationConfig {
  int max_steps = 30;
  double step_tolerance = 1e-12;
  double solver_tolerance = 1e-9;
  // D^2 in local coordinates for step norms; identity when absent.
  std::optional<MatrixXd> norm_matrix;

  // Runs exactly K steps unless a step is bit-for-bit zero.
  static AlternationConfig fixed_steps(int K, double solver_tolerance = 1e-9);
  void validate() const;
};

enum class StopReason { MaxSteps, Tolerance, Stationary };
const char* to_string(StopReason r);

struct TraceRecord {
  int k = 0;
  ParameterPoint point_kk;   // (theta_k, eta_k)
  ParameterPoint point_kk1;  // (theta_k, eta_{k+1})
  double L_kk = 0.0;
  double L_kk1 = 0.0;
  double step_norm = 0.0;    // |D (u_kk - u_{k-1,k-1})| in local coordinates; 0 at k = 0
};

struct AlternatingTrace {
  std::vector<TraceRecord> records;
  StopReason stop_reason = StopReason::MaxSteps;
  bool eta0_synthesized = false;

  int steps() const { return records.empty() ? 0 : records.back().k; }
  const ParameterPoint& final_point() const { return records.back().point_kk; }
  double final_value() const { return records.back().L_kk; }
};

class MonotonicityViolation : public Error {
 public:
  MonotonicityViolation(const std::string& what, AlternatingTrace partial)
      : Error(what), trace_(std::move(partial)) {}
  const AlternatingTrace& partial_trace() const { return trace_; }

 private:
  AlternatingTrace trace_;
};

// Partial maximizers. The closed form is used when the model declares it,
// otherwise a numerical ascent starting from the supplied initial value.
VectorXd eta_update(const Model& model, const VectorXd& theta, const VectorXd& eta_init,
                    const AlternationConfig& cfg);
VectorXd theta_update(const Model& model, const VectorXd& eta, const VectorXd& theta_init,
                      const AlternationConfig& cfg);

AlternatingTrace run(const Model& model, const ParameterPoint& start, const AlternationConfig& cfg);
// eta_0 is synthesized by one eta update; the trace is flagged.
AlternatingTrace run_from_theta(const Model& model, const VectorXd& theta0,
                                const AlternationConfig& cfg);

// |D (local(a) - local(b))| with D^2 = cfg.norm_matrix (identity if absent).
double local_distance(const Model& model, const ParameterPoint& a, const ParameterPoint& b,
                      const std::optional<MatrixXd>& norm_matrix);

struct ProfileResult {
  ParameterPoint point;
  double value = 0.0;
  int best_start = 0;
};

// Joint maximizer via alternation to stationarity from every start; the best
// value wins and ties go to the earliest start.
ProfileResult profile_estimate(const Model& model, const std::vector<ParameterPoint>& starts,
                               const AlternationConfig& cfg);

// 2 (max_eta L(theta_k, .) - max_eta L(theta_star, .)).
double wilks_statistic(const Model& model, const VectorXd& theta_k, const VectorXd& theta_star,
                       const AlternationConfig& cfg);

// | D_breve (phi_k - phi_star) - xi_breve | with phi the chart coordinates.
double fisher_residual(const EfficientScore& score, const VectorXd& phi_k, const VectorXd& phi_star);

// Columns: k, theta_1..theta_p, eta_1..eta_m, L_kk, L_kk1, step_norm.
void write_trace_csv(std::ostream& os, const AlternatingTrace& trace);

}  // namespace altmax
