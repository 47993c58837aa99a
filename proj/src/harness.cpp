#include "altmax/harness.hpp"

#include "altmax/rng.hpp"
#include "altmax/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

namespace altmax::harness {

namespace {

// Stream tags keep the covariance, probe and context datasets disjoint from
// replication seeds.
constexpr std::uint64_t kTagCov = 0xC0BA5EED00000001ULL;
constexpr std::uint64_t kTagProbe = 0xC0BA5EED00000002ULL;
constexpr std::uint64_t kTagContext = 0xC0BA5EED00000003ULL;

VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ParameterPoint toy_truth(const ExperimentConfig& cfg) {
  return ParameterPoint::split(cfg.toy_truth, cfg.toy_p);
}

}  // namespace

bounds::ConditionConstants read_condition_constants(const KeyValueConfig& kv) {
  bounds::ConditionConstants cc;
  cc.nu0 = kv.get_double("nu0", cc.nu0);
  cc.nu1 = kv.get_double("nu1", cc.nu1);
  cc.nu2 = kv.get_double("nu2", cc.nu2);
  cc.omega = kv.get_double("omega", cc.omega);
  cc.omega2 = kv.get_double("omega2", cc.omega2);
  cc.g = kv.get_double("g", cc.g);
  cc.g0 = kv.get_double("g0", cc.g0);
  if (kv.has("g_r")) cc.g_r = ScalarMap::parse(kv.get_string("g_r", ""));
  cc.b = kv.get_double("b", cc.b);
  cc.nu_r = kv.get_double("nu_r", cc.nu_r);
  if (kv.has("delta")) cc.delta = ScalarMap::parse(kv.get_string("delta", ""));
  if (kv.has("beta_A")) cc.beta_A = ScalarMap::parse(kv.get_string("beta_A", ""));
  cc.z_hess = kv.get_double("z_hess", cc.z_hess);
  return cc;
}

namespace {

struct Instance {
  std::unique_ptr<toy::ToyGaussianModel> toy;
  std::unique_ptr<single_index::Dataset> data;
  std::unique_ptr<single_index::SingleIndexModel> si;
  const Model& model() const {
    if (toy) return *toy;
    return *si;
  }
};

Instance make_instance(const ExperimentConfig& cfg, const Context& ctx, std::uint64_t seed) {
  Instance inst;
  if (cfg.family == Family::Toy) {
    inst.toy = std::make_unique<toy::ToyGaussianModel>(
        toy::simulate(BlockInformation::from_full(cfg.F2, cfg.toy_p), toy_truth(cfg), seed,
                      cfg.toy_noiseless));
  } else {
    inst.data = std::make_unique<single_index::Dataset>(single_index::generate(
        cfg.n, cfg.p, cfg.theta_star, cfg.eta_star, cfg.sigma, *ctx.basis, seed));
    inst.si = std::make_unique<single_index::SingleIndexModel>(*inst.data, *ctx.basis);
  }
  return inst;
}

}  // namespace

VectorXd default_eta_star(int m) {
  VectorXd e(m);
  for (int k = 0; k < m; ++k) e(k) = (k % 2 ? -1.0 : 1.0) * (1.0 - 0.08 * k);
  return e;
}

VectorXd default_theta_star(int p) {
  VectorXd t(p);
  for (int i = 0; i < p; ++i) t(i) = 1.0 / (i + 1);
  return t.normalized();
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValueConfig& kv, Family family) {
  ExperimentConfig c;
  c.family = family;
  c.reps = kv.get_int("reps", c.reps);
  c.threads = kv.get_int("threads", c.threads);
  c.seed = kv.get_u64("seed", c.seed);
  c.x = kv.get_double("x", c.x);
  const std::string K = kv.get_string("K", "auto");
  if (K == "auto") {
    c.K = -1;
  } else {
    KeyValueConfig tmp;
    tmp.set("K", K);
    c.K = tmp.get_int("K", -1);
  }
  c.trace_steps = kv.get_int("trace_steps", c.trace_steps);
  c.solver_tolerance = kv.get_double("solver_tolerance", c.solver_tolerance);
  c.me_budget = kv.get_int("me_budget", c.me_budget);
  c.failure_budget = kv.get_double("failure_budget", c.failure_budget);

  if (family == Family::Toy) {
    c.F2 = kv.get_matrix("F2");
    if (c.F2.size() == 0) c.F2 = (MatrixXd(2, 2) << 2, 1, 1, 2).finished();
    c.toy_p = kv.get_int("p", c.toy_p);
    c.toy_truth = to_vector(kv.get_list("truth", {}));
    c.toy_start = to_vector(kv.get_list("start", {}));
    c.toy_noiseless = kv.get_bool("noiseless", false);
  } else {
    c.n = kv.get_int("n", c.n);
    c.p = kv.get_int("p", c.p);
    c.m = kv.get_int("m", c.m);
    c.sigma = kv.get_double("sigma", c.sigma);
    c.s_X = kv.get_double("s_X", c.s_X);
    c.theta_star = to_vector(kv.get_list("theta_star", {}));
    c.eta_star = to_vector(kv.get_list("eta_star", {}));
    c.genus = kv.get_int("genus", c.genus);
    c.J_table = kv.get_int("J_table", c.J_table);
    c.grid_N = kv.get_int("grid_N", c.grid_N);
    c.cov_reps = kv.get_int("cov_reps", c.cov_reps);
    c.sweep_n = kv.get_int_list("sweep_n", {250, 1000, 4000});
    c.sweep_m = kv.get_int_list("sweep_m", {2, 6, 12});
  }
  c.cc = read_condition_constants(kv);
  c.R_K = kv.get_double("R_K", c.R_K);
  c.probe_r = kv.get_list("probe_r", {0.5, 1.0, 2.0, 4.0});
  c.probe_reps = kv.get_int("probe_reps", c.probe_reps);
  c.probe_points = kv.get_int("probe_points", c.probe_points);

  const auto unused = kv.unused();
  if (!unused.empty()) throw DomainError("unknown config key '" + unused.front() + "'");
  c.finalize();
  c.validate();
  return c;
}

void ExperimentConfig::finalize() {
  if (family == Family::Toy) {
    if (toy_truth.size() == 0) toy_truth = VectorXd::Zero(F2.rows());
    if (toy_start.size() == 0) toy_start = VectorXd::Zero(F2.rows());
  } else {
    if (theta_star.size() == 0) theta_star = default_theta_star(p);
    if (eta_star.size() == 0) eta_star = default_eta_star(m);
  }
}

void ExperimentConfig::validate() const {
  if (reps < 1) throw DomainError("reps must be >= 1");
  if (threads < 1) throw DomainError("threads must be >= 1");
  if (!(x > 0.0)) throw DomainError("x must be positive");
  if (trace_steps < 0) throw DomainError("trace_steps must be >= 0");
  if (!(solver_tolerance > 0.0)) throw DomainError("solver_tolerance must be positive");
  if (me_budget < 1) throw DomainError("me_budget must be >= 1");
  if (!(failure_budget >= 0.0 && failure_budget < 1.0))
    throw DomainError("failure_budget must lie in [0, 1)");
  if (probe_reps < 1 || probe_points < 1) throw DomainError("probe sizes must be >= 1");
  cc.validate();
  if (family == Family::Toy) {
    if (F2.rows() != F2.cols() || F2.rows() < 2) throw DimensionError("F2 must be square with size >= 2");
    if (toy_p < 1 || toy_p >= F2.rows()) throw DimensionError("toy p must lie in [1, dim F2)");
    if (toy_truth.size() != F2.rows() || toy_start.size() != F2.rows())
      throw DimensionError("truth and start must match dim F2");
    require_spd(F2, "F2");
  } else {
    if (n < 1 || p < 2 || m < 1) throw DomainError("single-index needs n >= 1, p >= 2, m >= 1");
    if (theta_star.size() != p || eta_star.size() != m)
      throw DimensionError("theta_star and eta_star must have sizes p and m");
    single_index::check_half_sphere(theta_star);
    if (sigma < 0.0) throw DomainError("sigma must be >= 0");
    if (grid_N < 1) throw DomainError("grid_N must be >= 1");
    if (cov_reps < 2) throw DomainError("cov_reps must be >= 2");
  }
}

Context make_context(const ExperimentConfig& cfg) {
  Context ctx;
  double R_K = cfg.R_K;
  if (cfg.family == Family::Toy) {
    auto model = toy::simulate(BlockInformation::from_full(cfg.F2, cfg.toy_p), toy_truth(cfg), 0, true);
    ctx.iat = model.information_at_truth();
    ctx.D2_local = ctx.iat.info.full();
    ctx.q = cfg.toy_p;
    ctx.B = spd_sqrt(standardized_covariance(ctx.iat.info, ctx.iat.cov), "B^2");
    if (R_K < 0.0) {
      const VectorXd d = cfg.toy_start - cfg.toy_truth;
      R_K = std::sqrt(d.dot(ctx.D2_local * d));
    }
  } else {
    ctx.basis = std::make_shared<wavelet::WaveletBasis>(cfg.m, cfg.s_X, cfg.genus, cfg.J_table);
    const auto ref = single_index::generate(cfg.n, cfg.p, cfg.theta_star, cfg.eta_star, cfg.sigma,
                                            *ctx.basis, derive_seed(cfg.seed, kTagContext));
    const single_index::SingleIndexModel model(ref, *ctx.basis);
    ctx.iat = model.information_at_truth();
    ctx.D2_local = ctx.iat.info.full();
    ctx.q = model.chart_dim();

    // Score covariance at the truth from fresh datasets; the score has mean
    // zero there, so the uncentred second moment is used.
    const int dim = ctx.q + cfg.m;
    std::vector<VectorXd> grads(cfg.cov_reps);
    parallel_for(cfg.cov_reps, cfg.threads, [&](int i) {
      const auto ds = single_index::generate(cfg.n, cfg.p, cfg.theta_star, cfg.eta_star, cfg.sigma,
                                             *ctx.basis, derive_seed(cfg.seed ^ kTagCov, i));
      const single_index::SingleIndexModel mi(ds, *ctx.basis);
      grads[i] = mi.local_gradient(mi.truth());
    });
    MatrixXd V2 = MatrixXd::Zero(dim, dim);
    for (const auto& g : grads) V2 += g * g.transpose();
    V2 /= static_cast<double>(cfg.cov_reps);
    const BlockInformation cov = BlockInformation::from_full(V2, ctx.q);
    ctx.B = spd_sqrt(standardized_covariance(ctx.iat.info, cov), "B^2");
    if (R_K < 0.0) {
      const double tau = single_index::mesh_width(single_index::half_sphere_grid(cfg.p, cfg.grid_N));
      const Eigen::SelfAdjointEigenSolver<MatrixXd> es(ctx.iat.info.D2);
      R_K = std::sqrt(es.eigenvalues().maxCoeff()) * tau;
    }
  }
  ctx.nu = coupling_norm(ctx.iat.info);

  const int m = static_cast<int>(ctx.D2_local.rows()) - ctx.q;
  ctx.K = 30;
  try {
    bounds::BoundInputs in;
    in.x = cfg.x;
    in.p = ctx.q;
    in.m = m;
    in.nu = ctx.nu;
    in.cc = cfg.cc;
    in.B = ctx.B;
    in.R_K = R_K;
    const Eigen::SelfAdjointEigenSolver<MatrixXd> es(ctx.D2_local);
    in.norm_Dinv = 1.0 / std::sqrt(es.eigenvalues().minCoeff());
    ctx.bound_report = bounds::make_report(in);
    ctx.bounds_ok = true;
    ctx.K = ctx.bound_report.K_stop;
  } catch (const Error&) {
    ctx.bounds_ok = false;
  }
  if (cfg.K >= 0) ctx.K = cfg.K;
  ctx.K_rec = std::max(ctx.K, cfg.trace_steps);
  return ctx;
}

ObservedRate observed_rate(const std::vector<double>& d, double floor) {
  const auto fit = stats::fit_contraction(d, floor);
  if (fit.valid) return {fit.rate, 0};
  double worst = -1.0;
  for (size_t k = 0; k + 1 < d.size(); ++k)
    if (d[k] > 10.0 * floor) worst = std::max(worst, d[k + 1] / d[k]);
  if (worst >= 0.0) return {worst, 1};
  return {0.0, 2};
}

ReplicationRecord run_replication(const ExperimentConfig& cfg, const Context& ctx, int index) {
  ReplicationRecord rec;
  rec.index = index;
  rec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(index));
  rec.K = ctx.K;
  try {
    const Instance inst = make_instance(cfg, ctx, rec.seed);
    const Model& model = inst.model();

    ParameterPoint start;
    if (inst.toy) {
      start = ParameterPoint::split(cfg.toy_start, cfg.toy_p);
    } else {
      const auto gi = single_index::grid_init(*inst.si, cfg.grid_N, 1);
      start = gi.point;
      rec.mesh_tau = gi.tau;
    }

    AlternationConfig ac = AlternationConfig::fixed_steps(ctx.K_rec, cfg.solver_tolerance);
    ac.norm_matrix = ctx.D2_local;
    const AlternatingTrace trace = run(model, start, ac);

    const ParameterPoint truth = model.truth();
    const VectorXd g = model.local_gradient(truth);
    const EfficientScore score = efficient_score(ctx.iat.info, g.head(ctx.q), g.tail(model.m()));
    rec.xi_sq = score.xi_breve.squaredNorm();

    AlternationConfig long_cfg;
    long_cfg.max_steps = cfg.me_budget;
    long_cfg.step_tolerance = 1e-13;
    long_cfg.solver_tolerance = cfg.solver_tolerance;
    long_cfg.norm_matrix = ctx.D2_local;
    const ProfileResult limit = profile_estimate(model, {start, truth}, long_cfg);

    const VectorXd phi_star = model.theta_to_chart(truth.theta);
    const VectorXd phi_limit = model.theta_to_chart(limit.point.theta);
    rec.fisher_limit = fisher_residual(score, phi_limit, phi_star);

    // A step that is exactly zero ends the trace early; the sequence is
    // constant from there on.
    for (int k = 0; k <= ctx.K_rec; ++k) {
      const auto& r = trace.records[std::min<size_t>(k, trace.records.size() - 1)];
      const VectorXd phi_k = model.theta_to_chart(r.point_kk.theta);
      rec.fisher.push_back(fisher_residual(score, phi_k, phi_star));
      rec.fisher_excess.push_back((score.D_breve * (phi_k - phi_limit)).norm());
      rec.wilks.push_back(wilks_statistic(model, r.point_kk.theta, truth.theta, ac));
      rec.me_dist.push_back(local_distance(model, r.point_kk, limit.point, ac.norm_matrix));
    }
    const ObservedRate nu_hat = observed_rate(rec.me_dist, kSolverFloor);
    rec.nu_hat = nu_hat.rate;
    rec.nu_hat_method = nu_hat.method;
    rec.ok = true;
  } catch (const MonotonicityViolation& e) {
    rec.monotone_violation = true;
    rec.error = e.what();
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  if (!rec.ok) {
    rec.fisher.clear();
    rec.fisher_excess.clear();
    rec.wilks.clear();
    rec.me_dist.clear();
  }
  return rec;
}

std::map<std::string, double> compute_aggregates(const ExperimentReport& rep) {
  std::map<std::string, double> s;
  std::vector<const ReplicationRecord*> ok;
  int violations = 0;
  for (const auto& r : rep.records) {
    if (r.ok) ok.push_back(&r);
    if (r.monotone_violation) ++violations;
  }
  s["reps"] = static_cast<double>(rep.records.size());
  s["ok"] = static_cast<double>(ok.size());
  s["failed"] = static_cast<double>(rep.records.size() - ok.size());
  s["monotone_violations"] = violations;
  s["K"] = rep.K;
  s["q"] = rep.q;
  s["p"] = rep.p_ambient;
  s["x"] = rep.x;
  s["z_x"] = rep.z_x;
  s["nu"] = rep.nu;
  if (ok.empty()) return s;

  const int K = rep.K;
  const size_t n_steps = ok.front()->fisher.size();
  std::vector<double> wilks_K, xi_sq, xi_norm, fisher_K, fisher_lim, wilks_err, nu_hat;
  int covered = 0;
  for (const auto* r : ok) {
    wilks_K.push_back(r->wilks[K]);
    xi_sq.push_back(r->xi_sq);
    xi_norm.push_back(std::sqrt(r->xi_sq));
    fisher_K.push_back(r->fisher[K]);
    fisher_lim.push_back(r->fisher_limit);
    wilks_err.push_back(std::abs(r->wilks[K] - r->xi_sq));
    nu_hat.push_back(r->nu_hat);
    if (std::sqrt(r->xi_sq) <= rep.z_x) ++covered;
  }
  const auto wd = stats::chi2_diagnostics(wilks_K, rep.q);
  s["wilks_mean"] = wd.mean;
  s["wilks_var"] = wd.variance;
  s["wilks_se"] = wd.se_mean;
  s["wilks_ks"] = wd.ks;
  s["wilks_ks_p"] = stats::ks_distance_chi2(wilks_K, rep.p_ambient);
  const auto xd = stats::chi2_diagnostics(xi_sq, rep.q);
  s["xi_sq_mean"] = xd.mean;
  s["xi_sq_se"] = xd.se_mean;
  s["xi_sq_ks"] = xd.ks;
  s["xi_norm_median"] = stats::median(xi_norm);
  s["fisher_median_K"] = stats::median(fisher_K);
  s["fisher_limit_median"] = stats::median(fisher_lim);
  s["wilks_error_median"] = stats::median(wilks_err);
  s["nu_hat_median"] = stats::median(nu_hat);
  s["coverage_xi"] = static_cast<double>(covered) / ok.size();
  s["coverage_xi_nominal"] = 1.0 - 2.0 * std::exp(-rep.x);

  std::vector<double> fisher_med, excess_med, me_med;
  for (size_t k = 0; k < n_steps; ++k) {
    std::vector<double> f, e, d;
    for (const auto* r : ok) {
      f.push_back(r->fisher[k]);
      e.push_back(r->fisher_excess[k]);
      d.push_back(r->me_dist[k]);
    }
    const std::string sk = std::to_string(k);
    fisher_med.push_back(stats::median(f));
    excess_med.push_back(stats::median(e));
    me_med.push_back(stats::median(d));
    s["fisher_median_k" + sk] = fisher_med.back();
    s["fisher_se_k" + sk] = stats::median_se(f);
    s["fisher_excess_median_k" + sk] = excess_med.back();
    s["me_median_k" + sk] = me_med.back();
  }
  const auto fr = observed_rate(excess_med, kSolverFloor);
  s["fisher_decay_rate"] = fr.rate;
  s["fisher_decay_method"] = fr.method;
  const auto mr = observed_rate(me_med, kSolverFloor);
  s["me_rate"] = mr.rate;
  s["me_rate_method"] = mr.method;
  s["me_final_median"] = me_med.back();
  double me_final_max = 0.0;
  for (const auto* r : ok) me_final_max = std::max(me_final_max, r->me_dist.back());
  s["me_final_max"] = me_final_max;

  // Largest rise of the median Fisher residual, in units of its standard error.
  double worst_rise = -std::numeric_limits<double>::infinity();
  for (size_t k = 1; k < n_steps; ++k) {
    const double se = s["fisher_se_k" + std::to_string(k)] + s["fisher_se_k" + std::to_string(k - 1)];
    const double rise = fisher_med[k] - fisher_med[k - 1];
    worst_rise = std::max(worst_rise, se > 0.0 ? rise / se : (rise > 0.0 ? std::numeric_limits<double>::infinity() : 0.0));
  }
  s["fisher_max_rise_in_se"] = n_steps > 1 ? worst_rise : 0.0;
  return s;
}

namespace {

ExperimentReport run_experiment(const ExperimentConfig& cfg, const Context& ctx) {
  ExperimentReport rep;
  rep.q = ctx.q;
  rep.p_ambient = cfg.family == Family::Toy ? cfg.toy_p : cfg.p;
  rep.K = ctx.K;
  rep.x = cfg.x;
  rep.nu = ctx.nu;
  rep.z_x = ctx.bounds_ok ? ctx.bound_report.z_x : 0.0;
  rep.failure_budget = cfg.failure_budget;
  rep.records.resize(cfg.reps);
  parallel_for(cfg.reps, cfg.threads, [&](int i) { rep.records[i] = run_replication(cfg, ctx, i); });
  rep.summary = compute_aggregates(rep);
  const double failed = rep.summary["failed"];
  if (failed > cfg.failure_budget * cfg.reps) {
    std::string first;
    for (const auto& r : rep.records)
      if (!r.ok) {
        first = r.error;
        break;
      }
    throw Error("failure budget exceeded: " + std::to_string(static_cast<int>(failed)) + " of " +
                std::to_string(cfg.reps) + " replications failed; first error: " + first);
  }
  return rep;
}

}  // namespace

ExperimentReport run_wilks_fisher(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_experiment(cfg, make_context(cfg));
}

ExperimentReport run_me_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_experiment(cfg, make_context(cfg));
}

SweepReport run_dimension_sweep(const ExperimentConfig& cfg) {
  if (cfg.family != Family::SingleIndex) throw DomainError("the dimension sweep needs the single-index family");
  SweepReport out;
  int cell = 0;
  for (int m : cfg.sweep_m) {
    for (int n : cfg.sweep_n) {
      ExperimentConfig c = cfg;
      c.m = m;
      c.n = n;
      c.eta_star = default_eta_star(m);
      c.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(cell++));
      const auto rep = run_wilks_fisher(c);
      SweepCell sc;
      sc.n = n;
      sc.m = m;
      sc.p_star = rep.q + m;
      const auto& s = rep.summary;
      sc.ok = static_cast<int>(s.at("ok"));
      sc.wilks_error_median = s.at("wilks_error_median");
      sc.fisher_median = s.at("fisher_median_K");
      sc.wilks_mean = s.at("wilks_mean");
      out.cells.push_back(sc);
    }
  }
  return out;
}

std::vector<DeltaProbe> probe_delta(const ExperimentConfig& cfg) {
  cfg.validate();
  const Context ctx = make_context(cfg);
  const int dim = static_cast<int>(ctx.D2_local.rows());
  const MatrixXd Dinv = spd_inv_sqrt(ctx.D2_local, "D^2");
  constexpr double h = 1e-4;

  // Direction sample shared by all radii and datasets.
  Engine dir_rng(derive_seed(cfg.seed ^ kTagProbe, 0));
  std::normal_distribution<double> normal;
  std::vector<VectorXd> dirs(cfg.probe_points);
  for (auto& u : dirs) {
    u.resize(dim);
    for (int i = 0; i < dim; ++i) u(i) = normal(dir_rng);
    u.normalize();
  }

  std::vector<DeltaProbe> out;
  for (double r : cfg.probe_r) {
    // hess[point][rep], standardized Hessians -D^-1 grad^2 L D^-1.
    std::vector<std::vector<MatrixXd>> hess(cfg.probe_points, std::vector<MatrixXd>(cfg.probe_reps));
    parallel_for(cfg.probe_reps, cfg.threads, [&](int rep) {
      const Instance inst = make_instance(cfg, ctx, derive_seed(cfg.seed ^ kTagProbe, 1 + rep));
      const Model& model = inst.model();
      const VectorXd center = model.to_local(model.truth());
      for (int j = 0; j < cfg.probe_points; ++j) {
        const VectorXd v = center + r * (Dinv * dirs[j]);
        MatrixXd Hs(dim, dim);
        for (int c = 0; c < dim; ++c) {
          const VectorXd step = h * Dinv.col(c);
          const VectorXd gp = model.local_gradient(model.from_local(v + step));
          const VectorXd gm = model.local_gradient(model.from_local(v - step));
          Hs.col(c) = -(Dinv * (gp - gm)) / (2.0 * h);
        }
        hess[j][rep] = 0.5 * (Hs + Hs.transpose());
      }
    });
    DeltaProbe best;
    best.r = r;
    best.delta = -1.0;
    const MatrixXd I = MatrixXd::Identity(dim, dim);
    for (int j = 0; j < cfg.probe_points; ++j) {
      MatrixXd mean = MatrixXd::Zero(dim, dim);
      for (const auto& Hm : hess[j]) mean += Hm;
      mean /= cfg.probe_reps;
      double spread = 0.0;
      for (const auto& Hm : hess[j]) spread += (Hm - mean).squaredNorm();
      const double se =
          cfg.probe_reps > 1 ? std::sqrt(spread / (cfg.probe_reps - 1) / cfg.probe_reps) : 0.0;
      const double delta = spectral_norm(mean - I);
      if (delta > best.delta) {
        best.delta = delta;
        best.se = se;
      }
    }
    out.push_back(best);
  }
  return out;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int nt = std::max(1, std::min(threads, count));
  if (nt == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&, t] {
      (void)t;
      for (int i = next++; i < count && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) err = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

void write_records_csv(std::ostream& os, const ExperimentReport& rep) {
  const size_t steps = [&] {
    for (const auto& r : rep.records)
      if (r.ok) return r.fisher.size();
    return size_t{0};
  }();
  os << "index,seed,ok,monotone_violation,K,xi_sq,fisher_limit,nu_hat,nu_hat_method,mesh_tau";
  for (const char* name : {"fisher", "fisher_excess", "wilks", "me"})
    for (size_t k = 0; k < steps; ++k) os << ',' << name << '_' << k;
  os << ",error\n";
  os << std::setprecision(17);
  for (const auto& r : rep.records) {
    os << r.index << ',' << r.seed << ',' << r.ok << ',' << r.monotone_violation << ',' << r.K << ','
       << r.xi_sq << ',' << r.fisher_limit << ',' << r.nu_hat << ',' << r.nu_hat_method << ','
       << r.mesh_tau;
    for (const auto* v : {&r.fisher, &r.fisher_excess, &r.wilks, &r.me_dist})
      for (size_t k = 0; k < steps; ++k) {
        os << ',';
        if (k < v->size()) os << (*v)[k];
      }
    std::string err = r.error;
    std::replace(err.begin(), err.end(), '"', '\'');
    os << ",\"" << err << "\"\n";
  }
}

void write_summary(std::ostream& os, const std::map<std::string, double>& summary) {
  os << std::setprecision(17);
  for (const auto& [k, v] : summary) os << k << " = " << v << '\n';
}

void write_sweep_csv(std::ostream& os, const SweepReport& rep) {
  os << "n,m,p_star,ok,wilks_error_median,fisher_median,wilks_mean\n" << std::setprecision(17);
  for (const auto& c : rep.cells)
    os << c.n << ',' << c.m << ',' << c.p_star << ',' << c.ok << ',' << c.wilks_error_median << ','
       << c.fisher_median << ',' << c.wilks_mean << '\n';
}

void write_bound_report(std::ostream& os, const bounds::BoundReport& r) {
  std::map<std::string, double> s{
      {"z_quad", r.z_quad},
      {"z0_sq", r.z0_sq},
      {"z_entropy", r.z_entropy},
      {"z_6pstar", r.z_6pstar},
      {"z_x", r.z_x},
      {"K0", r.K0},
      {"R0", r.R0},
      {"r_ups", r.r_ups},
      {"spread_Q", r.spread_Q},
      {"spread_semi", r.spread_semi},
      {"spread_semi_plain", r.spread_semi_plain},
      {"a3_c1", r.a3.c1},
      {"a3_c2", r.a3.c2},
      {"a3_pass", r.a3.pass},
      {"b1", r.b1},
      {"K_stop", r.K_stop},
      {"kappa", r.kappa},
      {"me_valid", r.me_valid},
      {"tau_x", r.tau_x},
      {"L_k", r.L_k},
      {"g_breve", r.converted.g_breve},
      {"nu_breve", r.converted.nu_breve},
      {"omega_breve", r.converted.omega_breve},
      {"p_B", r.qf.p_B},
      {"v_B", r.qf.v_B},
      {"lambda_star", r.qf.lambda_star},
      {"g_c", r.qf.g_c},
      {"x_c", r.qf.x_c},
      {"y_c", r.qf.y_c},
      {"qf_branch", r.qf.branch},
      {"mu_c", r.mu_c},
      {"C_nu", r.C_nu},
  };
  write_summary(os, s);
}

void write_bound_csv(std::ostream& os, const bounds::BoundReport& r) {
  os << "k,r_k,r_k_refined,r_star_k\n" << std::setprecision(17);
  for (size_t k = 0; k < r.r_k.size(); ++k) {
    os << k << ',' << r.r_k[k] << ',';
    if (k < r.r_k_refined.size()) os << r.r_k_refined[k];
    os << ',';
    if (k < r.r_star_k.size()) os << r.r_star_k[k];
    os << '\n';
  }
}

}  // namespace altmax::harness
