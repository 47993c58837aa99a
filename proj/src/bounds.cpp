#include "altmax/bounds.hpp"

#include "altmax/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <thread>

namespace altmax::bounds {

namespace {

const double kSqrt2x2 = 2.0 * std::sqrt(2.0);

void require(bool cond, const char* what) {
  if (!cond) throw DomainError(what);
}

void check_nu(double nu) {
  require(nu >= 0.0 && nu < 1.0, "coupling nu must lie in [0, 1)");
}

}  // namespace

void ConditionConstants::validate() const {
  require(omega >= 0.0 && omega <= 0.5, "omega must lie in [0, 1/2]");
  require(omega2 >= 0.0 && omega2 <= 0.5, "omega2 must lie in [0, 1/2]");
  require(b > 0.0, "b must be positive");
  require(nu0 > 0.0 && nu1 > 0.0 && nu2 > 0.0, "nu0, nu1, nu2 must be positive");
  require(g > 0.0 && g0 > 0.0, "g and g0 must be positive");
  require(nu_r > 0.0, "nu_r must be positive");
  require(z_hess >= 0.0, "z_hess must be non-negative");
  require(delta.non_negative(), "delta must be non-negative");
  require(delta.non_decreasing(), "delta must be non-decreasing");
}

QuadFormConstants quad_form_constants(const MatrixXd& B, double g) {
  if (B.rows() != B.cols()) throw DimensionError("B must be square");
  const MatrixXd S = 0.5 * (B + B.transpose());
  const MatrixXd B2 = S * S;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(B2, Eigen::EigenvaluesOnly);
  const VectorXd ev = es.eigenvalues().cwiseMax(0.0);

  QuadFormConstants c;
  c.p_B = ev.sum();
  c.v_B = std::sqrt(2.0 * ev.squaredNorm());
  c.lambda_star = ev.size() ? ev.maxCoeff() : 0.0;
  if (g * g < 2.0 * c.p_B) throw DomainError("g^2 < 2 tr(B^2): unsupported regime");
  if (std::isinf(g) || c.lambda_star == 0.0) return c;

  c.g_c = std::sqrt(g * g - kMuC * c.p_B);
  double logdet = 0.0;
  for (int i = 0; i < ev.size(); ++i) logdet += std::log1p(-kMuC * ev(i) / c.lambda_star);
  c.x_c = 0.5 * ((g * g / kMuC - c.p_B) / c.lambda_star + logdet) - 2.0;
  c.y_c = std::sqrt(c.p_B + 6.0 * c.lambda_star * (c.x_c + 2.0));
  return c;
}

double quad_form_quantile(double x, const MatrixXd& B, double g, QuadFormConstants* out) {
  require(x > 0.0, "x must be positive");
  QuadFormConstants c = quad_form_constants(B, g);
  double z2 = 0.0;
  if (c.lambda_star == 0.0) {
    c.branch = 1;
  } else if (x + 1.0 <= c.v_B / (18.0 * c.lambda_star)) {
    c.branch = 1;
    z2 = c.p_B + 2.0 * c.v_B * std::sqrt(x + 1.0);
  } else if (x + 1.0 <= c.x_c + 2.0) {
    c.branch = 2;
    z2 = c.p_B + 6.0 * c.lambda_star * (x + 1.0);
  } else {
    c.branch = 3;
    const double z = c.y_c + 2.0 * c.lambda_star * (x - c.x_c + 1.0) / c.g_c;
    z2 = z * z;
  }
  if (out) *out = c;
  return std::sqrt(z2);
}

double entropy_quantile_sq(double x, double Q, double g0) {
  require(x >= 0.0 && Q >= 0.0 && g0 > 0.0, "entropy quantile needs x, Q >= 0 and g0 > 0");
  const double a = 1.0 + std::sqrt(x + Q);
  if (a <= g0) return a * a;
  const double t = 2.0 * (x + Q) / g0 + g0;
  return 1.0 + t * t;
}

double entropy_quantile(double x, double Q, double g0) {
  require(x >= 0.0 && Q >= 0.0 && g0 > 0.0, "entropy quantile needs x, Q >= 0 and g0 > 0");
  const double a = std::sqrt(2.0 * (x + Q));
  if (a <= g0) return a;
  return (x + Q) / g0 + g0 / 2.0;
}

double initial_level_K0(double R_K, double /*x*/, const ConditionConstants& cc, double z) {
  require(R_K >= 0.0, "R_K must be non-negative");
  return (0.5 + 12.0 * cc.nu0 * cc.omega) * R_K * R_K + (cc.delta(R_K) + z) * R_K +
         6.0 * cc.nu0 * cc.omega * z * z;
}

double concentration_radius_R0(double x, double K0, int p_star, const ConditionConstants& cc,
                               double nu, double z) {
  require(cc.b > 0.0, "b must be positive");
  require(nu < 1.0, "nu must be < 1");
  const double inner = x + 2.4 * p_star + cc.b * cc.b / (9.0 * cc.nu0 * cc.nu0) * K0;
  const double r = 6.0 * cc.nu0 / (cc.b * (1.0 - nu)) * std::sqrt(inner);
  return std::max(z, r);
}

double spread_parametric(double r, double x, int p_star, const ConditionConstants& cc) {
  require(r >= 0.0, "radius must be non-negative");
  const double z0sq = entropy_quantile_sq(x, 4.0 * p_star, cc.g0);
  return cc.delta(r) * r + 6.0 * cc.nu1 * cc.omega * (z0sq + 2.0 * r * r);
}

ConvertedConstants convert_conditions(const ConditionConstants& cc, double nu) {
  check_nu(nu);
  const double s = std::sqrt(1.0 - nu * nu);
  const double t = 1.0 + nu * std::sqrt(1.0 + nu * nu);
  return {cc.g * s / t, nu * t / s, cc.delta, cc.omega};
}

double spread_semiparametric(double r, double x, int p_star, int p, const ConditionConstants& cc,
                             double nu) {
  require(r >= 0.0, "radius must be non-negative");
  const ConvertedConstants cv = convert_conditions(cc, nu);
  const double w = 1.0 - nu * nu;
  const double z0sq = entropy_quantile_sq(x, 2.0 * p_star + 2.0 * p, cc.g0);
  return 8.0 / (w * w) * cv.delta_breve(r) * r + 6.0 * cc.nu1 * cv.omega_breve * (z0sq + 2.0 * r * r);
}

double spread_semiparametric_plain(double r, double x, int p_star, int p,
                                   const ConditionConstants& cc, double nu) {
  require(r >= 0.0, "radius must be non-negative");
  const ConvertedConstants cv = convert_conditions(cc, nu);
  const double w = 1.0 - nu * nu;
  const double z = entropy_quantile(x, 2.0 * p_star + 2.0 * p, cc.g0);
  return 8.0 / (w * w) * cv.delta_breve(r) * r + 6.0 * cc.nu1 * cv.omega_breve * z * r;
}

double C_nu(double nu) {
  check_nu(nu);
  const double s = std::sqrt(nu);
  return kSqrt2x2 * (1.0 + s) / (1.0 - s);
}

double fisher_radius(int k, double /*x*/, double nu, double R0, double z, double spread_at_R0) {
  check_nu(nu);
  require(k >= 0, "k must be non-negative");
  const double s = std::sqrt(nu);
  return kSqrt2x2 / (1.0 - s) * ((z + spread_at_R0) + (1.0 + s) * std::pow(nu, k) * R0);
}

A3Check check_A3(double eps, double z, double R0, double nu) {
  require(eps >= 0.0, "eps must be non-negative");
  const double f = eps * 7.0 * C_nu(nu) / (1.0 - nu);
  A3Check a;
  a.c1 = f * (z + eps * z * z);
  a.c2 = f * R0;
  a.pass = a.c1 < 1.0 && a.c2 < 1.0;
  return a;
}

double fisher_radius_refined(int k, double /*x*/, double nu, double R0, double z, double eps) {
  const A3Check a = check_A3(eps, z, R0, nu);
  if (!a.pass) throw DomainError("condition (A3) fails for the supplied eps");
  require(k >= 0, "k must be non-negative");
  const double C = C_nu(nu);
  const double C4 = C * C * C * C;
  const double ze = z + eps * z * z;
  const double head = C * ze + eps * 49.0 * C4 / (1.0 - a.c1) / (1.0 - nu) * ze * ze;
  const double tail = C * R0 + eps * 49.0 * C4 / (1.0 - a.c2) * (nu / (1.0 - nu)) * R0 * R0;
  return head + std::pow(nu, k) * tail;
}

bool check_B1(double x, int p_star, const ConditionConstants& cc) {
  require(cc.b > 0.0, "b must be positive");
  const double root = std::sqrt(x + 4.0 * p_star);
  const double lhs = 1.0 + root;
  const double r0 = 6.0 * cc.nu0 / cc.b * root;
  if (cc.g_r.kind() == ScalarMap::Kind::Linear && cc.g_r(1.0) < 0.0) return false;
  std::vector<double> rs{r0};
  for (double r : cc.g_r.grid())
    if (r >= r0) rs.push_back(r);
  for (double r : rs)
    if (!(lhs <= 3.0 * cc.nu_r * cc.nu_r * cc.g_r(r) / cc.b)) return false;
  return true;
}

int stopping_steps_K(double /*x*/, double nu, double R0, double z) {
  require(nu >= 0.0 && nu < 1.0, "stopping rule needs 0 <= nu < 1");
  require(z > 0.0 && R0 > 0.0, "stopping rule needs z > 0 and R0 > 0");
  if (z * z >= 2.0 * R0) return 0;
  if (nu == 0.0) return 1;
  const double k = (2.0 * std::log(z) - std::log(2.0 * R0)) / std::log(nu);
  return std::max(0, static_cast<int>(std::ceil(k)));
}

double kappa(double /*x*/, double R0, const ConditionConstants& cc, double nu, double norm_Dinv,
             double z_6pstar, double z_hess) {
  require(nu >= 0.0 && nu < 1.0, "kappa needs 0 <= nu < 1");
  const double pre = kSqrt2x2 * (1.0 + std::sqrt(nu)) / std::sqrt(1.0 - nu);
  return pre * (cc.delta(R0) + 9.0 * cc.omega2 * cc.nu2 * norm_Dinv * z_6pstar * R0 + norm_Dinv * z_hess);
}

MeRadius me_radius(int k, double kappa_val, double nu, double R_tilde0, double /*x*/) {
  require(k >= 0, "k must be non-negative");
  require(kappa_val >= 0.0, "kappa must be non-negative");
  require(nu >= 0.0 && kappa_val < 1.0 - nu, "me_radius needs kappa < 1 - nu");
  MeRadius out;
  const double kk = kappa_val * k;
  if (kk <= 1.0) {
    out.r = std::pow(nu, k) * kSqrt2x2 * R_tilde0 / (1.0 - kk);
    return out;
  }
  out.second_branch = true;
  const double lk = std::log(static_cast<double>(k));
  const double num = std::log(1.0 / nu) - (std::log(kSqrt2x2) - std::log(kk - 1.0)) / k;
  const double den = 1.0 + std::log(1.0 - nu) / lk;
  out.L = std::max(0.0, std::floor(num / den));
  out.tau = std::pow(kappa_val / (1.0 - nu), out.L);
  out.r = 2.0 * (1.0 - nu) / kappa_val * std::pow(out.tau, k / lk) * R_tilde0;
  return out;
}

QuadTailReport validate_quad_tail(const MatrixXd& B, const std::vector<double>& x_list,
                                  std::int64_t n_draws, std::uint64_t seed, int threads) {
  if (B.rows() != B.cols()) throw DimensionError("B must be square");
  require(n_draws > 0, "n_draws must be positive");
  const int d = static_cast<int>(B.rows());
  std::vector<double> z(x_list.size());
  for (size_t i = 0; i < x_list.size(); ++i) z[i] = quad_form_quantile(x_list[i], B, kInf);

  constexpr std::int64_t kChunk = 8192;
  const std::int64_t n_chunks = (n_draws + kChunk - 1) / kChunk;
  std::vector<std::vector<std::int64_t>> counts(n_chunks, std::vector<std::int64_t>(x_list.size(), 0));

  auto work = [&](std::int64_t c) {
    Engine eng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    std::normal_distribution<double> N(0.0, 1.0);
    const std::int64_t lo = c * kChunk;
    const std::int64_t hi = std::min(n_draws, lo + kChunk);
    VectorXd xi(d);
    for (std::int64_t i = lo; i < hi; ++i) {
      for (int j = 0; j < d; ++j) xi(j) = N(eng);
      const double nrm = (B * xi).norm();
      for (size_t t = 0; t < z.size(); ++t)
        if (nrm > z[t]) ++counts[c][t];
    }
  };
  const int T = std::max(1, threads);
  std::vector<std::thread> pool;
  for (int t = 0; t < T; ++t)
    pool.emplace_back([&, t] {
      for (std::int64_t c = t; c < n_chunks; c += T) work(c);
    });
  for (auto& th : pool) th.join();

  QuadTailReport rep;
  for (size_t t = 0; t < x_list.size(); ++t) {
    std::int64_t total = 0;
    for (const auto& cc : counts) total += cc[t];
    QuadTailRow row;
    row.x = x_list[t];
    row.z = z[t];
    row.fraction = static_cast<double>(total) / static_cast<double>(n_draws);
    row.se = std::sqrt(row.fraction * (1.0 - row.fraction) / static_cast<double>(n_draws));
    row.bound = 2.0 * std::exp(-row.x);
    row.pass = row.fraction <= row.bound + 3.0 * row.se;
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

BoundReport make_report(const BoundInputs& in) {
  in.cc.validate();
  require(in.p >= 1 && in.m >= 0, "need p >= 1 and m >= 0");
  check_nu(in.nu);
  const int ps = in.p + in.m;
  const MatrixXd B = in.B.size() ? in.B : MatrixXd::Identity(ps, ps);
  if (B.rows() != ps || B.cols() != ps) throw DimensionError("B must be p* x p*");

  BoundReport r;
  r.z_quad = quad_form_quantile(in.x, B, in.cc.g, &r.qf);
  r.z0_sq = entropy_quantile_sq(in.x, 4.0 * ps, in.cc.g0);
  r.z_x = std::max(r.z_quad, std::sqrt(r.z0_sq));
  r.z_entropy = entropy_quantile(in.x, 2.0 * ps + 2.0 * in.p, in.cc.g0);
  r.z_6pstar = entropy_quantile(in.x, 6.0 * ps, in.cc.g0);
  r.K0 = initial_level_K0(in.R_K, in.x, in.cc, r.z_x);
  r.R0 = concentration_radius_R0(in.x, r.K0, ps, in.cc, in.nu, r.z_x);
  r.r_ups = concentration_radius_R0(in.x, 0.0, ps, in.cc, in.nu, r.z_x);
  r.spread_Q = spread_parametric(r.R0, in.x, ps, in.cc);
  r.spread_semi = spread_semiparametric(r.R0, in.x, ps, in.p, in.cc, in.nu);
  r.spread_semi_plain = spread_semiparametric_plain(r.R0, in.x, ps, in.p, in.cc, in.nu);
  for (int k = 0; k <= in.k_max; ++k)
    r.r_k.push_back(fisher_radius(k, in.x, in.nu, r.R0, r.z_x, r.spread_semi));
  r.a3 = check_A3(in.eps, r.z_x, r.R0, in.nu);
  if (in.eps > 0.0 && r.a3.pass)
    for (int k = 0; k <= in.k_max; ++k)
      r.r_k_refined.push_back(fisher_radius_refined(k, in.x, in.nu, r.R0, r.z_x, in.eps));
  r.b1 = check_B1(in.x, ps, in.cc);
  r.K_stop = stopping_steps_K(in.x, in.nu, r.R0, r.z_x);
  r.kappa = kappa(in.x, r.R0, in.cc, in.nu, in.norm_Dinv, r.z_6pstar, in.cc.z_hess);
  r.me_valid = r.kappa < 1.0 - in.nu;
  if (r.me_valid) {
    const double Rt = r.R0 + r.r_ups;
    for (int k = 0; k <= in.k_max; ++k) {
      MeRadius me = me_radius(k, r.kappa, in.nu, Rt, in.x);
      r.r_star_k.push_back(me.r);
      r.tau_x = me.tau;
      r.L_k = me.L;
    }
  }
  r.converted = convert_conditions(in.cc, in.nu);
  r.C_nu = C_nu(in.nu);
  return r;
}

}  // namespace altmax::bounds
