#pragma once

// Monte Carlo experiments over replicated datasets.
//
// Each replication draws its data from derive_seed(master, index), runs the
// alternation from the model's start, and records per-step Fisher residuals,
// Wilks statistics and distances to the joint maximizer. Replications run on
// a thread pool; records are stored by index and aggregated sequentially, so
// results do not depend on the thread count.

#include "altmax/alternator.hpp"
#include "altmax/bounds.hpp"
#include "altmax/config.hpp"
#include "altmax/single_index.hpp"
#include "altmax/toy_gaussian.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace altmax::harness {

// Distances below this (in the D-norm) are treated as solver noise.
inline constexpr double kSolverFloor = 1e-8;

enum class Family { Toy, SingleIndex };

struct ExperimentConfig {
  Family family = Family::Toy;
  int reps = 100;
  int threads = 1;
  std::uint64_t seed = 1;
  double x = 2.0;
  int K = -1;             // < 0: stopping rule, falling back to 30
  int trace_steps = 10;   // records cover k = 0 .. max(K, trace_steps)
  double solver_tolerance = 1e-10;
  int me_budget = 500;
  double failure_budget = 0.05;

  // Toy: full F^2 split at toy_p; truth and start default to zero.
  MatrixXd F2;
  int toy_p = 1;
  VectorXd toy_truth;
  VectorXd toy_start;
  bool toy_noiseless = false;

  // Single-index.
  int n = 1000;
  int p = 2;
  int m = 6;
  double sigma = 0.5;
  double s_X = 1.0;
  VectorXd theta_star;  // default: normalized (1, 1/2, ..., 1/p)
  VectorXd eta_star;    // default: default_eta_star(m)
  int genus = 7;
  int J_table = 12;
  int grid_N = 64;
  int cov_reps = 200;

  // Bound inputs for the stopping rule and the report.
  bounds::ConditionConstants cc;
  double R_K = -1.0;  // < 0: derived from the start (toy) or the grid mesh

  // Sweep grid (single-index).
  std::vector<int> sweep_n;
  std::vector<int> sweep_m;

  // Condition probe.
  std::vector<double> probe_r;
  int probe_reps = 20;
  int probe_points = 50;

  static ExperimentConfig from_kv(const KeyValueConfig& kv, Family family);
  void validate() const;
  void finalize();  // fills defaults that depend on other fields
};

// Keys nu0, nu1, nu2, omega, omega2, g, g0, g_r, b, nu_r, delta, beta_A, z_hess.
bounds::ConditionConstants read_condition_constants(const KeyValueConfig& kv);

VectorXd default_eta_star(int m);
VectorXd default_theta_star(int p);

// Per-config quantities shared by all replications.
struct Context {
  InformationAtTruth iat;
  MatrixXd D2_local;     // full information in local coordinates
  MatrixXd B;            // standardized score covariance
  double nu = 0.0;
  int q = 0;             // intrinsic dimension of theta
  int K = 30;
  int K_rec = 30;
  bool bounds_ok = false;
  bounds::BoundReport bound_report;
  std::shared_ptr<const wavelet::WaveletBasis> basis;
};

Context make_context(const ExperimentConfig& cfg);

struct ReplicationRecord {
  int index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  bool monotone_violation = false;
  std::string error;
  int K = 0;
  std::vector<double> fisher;  // k = 0 .. K_rec
  std::vector<double> wilks;
  std::vector<double> me_dist;
  std::vector<double> fisher_excess;  // |D_breve (phi_k - phi_limit)|
  double fisher_limit = 0.0;   // Fisher residual at the joint maximizer
  double xi_sq = 0.0;
  double nu_hat = 0.0;
  int nu_hat_method = 0;       // 0 fit, 1 ratio bound, 2 at floor from the start
  double mesh_tau = 0.0;
};

struct ExperimentReport {
  std::vector<ReplicationRecord> records;
  std::map<std::string, double> summary;
  // Inputs needed to recompute aggregates from records.
  int q = 0;
  int p_ambient = 0;
  int K = 0;
  double z_x = 0.0;
  double x = 0.0;
  double nu = 0.0;
  double failure_budget = 0.05;
};

// One full replication; never throws, failures land in the record.
ReplicationRecord run_replication(const ExperimentConfig& cfg, const Context& ctx, int index);

// Empirical rate of a distance sequence: the log-linear fit when it has
// enough points above the floor, else the largest consecutive ratio that
// starts above the floor, else 0 (at the floor after one step).
struct ObservedRate {
  double rate = 0.0;
  int method = 0;
};
ObservedRate observed_rate(const std::vector<double>& d, double floor);

std::map<std::string, double> compute_aggregates(const ExperimentReport& rep);

// Throws Error when more than failure_budget of the replications fail.
ExperimentReport run_wilks_fisher(const ExperimentConfig& cfg);
ExperimentReport run_me_convergence(const ExperimentConfig& cfg);

struct SweepCell {
  int n = 0;
  int m = 0;
  int p_star = 0;
  double wilks_error_median = 0.0;
  double fisher_median = 0.0;
  double wilks_mean = 0.0;
  int ok = 0;
};
struct SweepReport {
  std::vector<SweepCell> cells;
};
SweepReport run_dimension_sweep(const ExperimentConfig& cfg);

struct DeltaProbe {
  double r = 0.0;
  double delta = 0.0;
  double se = 0.0;
};
std::vector<DeltaProbe> probe_delta(const ExperimentConfig& cfg);

void parallel_for(int count, int threads, const std::function<void(int)>& fn);

void write_records_csv(std::ostream& os, const ExperimentReport& rep);
void write_summary(std::ostream& os, const std::map<std::string, double>& summary);
void write_sweep_csv(std::ostream& os, const SweepReport& rep);
void write_bound_report(std::ostream& os, const bounds::BoundReport& r);
void write_bound_csv(std::ostream& os, const bounds::BoundReport& r);

}  // namespace altmax::harness
