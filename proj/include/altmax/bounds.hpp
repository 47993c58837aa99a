#pragma once

// Closed-form finite-sample quantities: deviation quantiles for quadratic
// forms and sup-norms of Gaussian-like processes, the concentration radius,
// spreads of the Fisher and Wilks expansions, step counts, and radii for
// convergence of the alternating sequence to the joint maximizer.

#include "altmax/scalar_map.hpp"
#include "altmax/stat_core.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace altmax::bounds {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kMuC = 2.0 / 3.0;

struct ConditionConstants {
  double nu0 = 1.0;
  double nu1 = 1.0;
  double nu2 = 1.0;
  double omega = 0.0;
  double omega2 = 0.0;
  double g = kInf;
  double g0 = kInf;
  ScalarMap g_r = ScalarMap::constant(kInf);
  double b = 0.5;
  double nu_r = 1.0;
  ScalarMap delta = ScalarMap::constant(0.0);
  ScalarMap beta_A = ScalarMap::constant(0.0);
  double z_hess = 0.0;

  // omega, omega2 in [0, 1/2]; b > 0; delta non-negative and non-decreasing.
  void validate() const;
};

// Constants of the quadratic-form deviation bound for a matrix B.
struct QuadFormConstants {
  double p_B = 0.0;          // tr(B^2)
  double v_B = 0.0;          // sqrt(2 tr(B^4))
  double lambda_star = 0.0;  // largest eigenvalue of B^2
  double g_c = kInf;
  double x_c = kInf;
  double y_c = kInf;
  int branch = 0;            // 1, 2 or 3 for the x it was evaluated at
};

QuadFormConstants quad_form_constants(const MatrixXd& B, double g);

// z(x, B). Throws DomainError if g^2 < 2 tr(B^2) or x <= 0.
double quad_form_quantile(double x, const MatrixXd& B, double g, QuadFormConstants* out = nullptr);

double entropy_quantile_sq(double x, double Q, double g0);
double entropy_quantile(double x, double Q, double g0);

double initial_level_K0(double R_K, double x, const ConditionConstants& cc, double z);
double concentration_radius_R0(double x, double K0, int p_star, const ConditionConstants& cc,
                               double nu, double z);

double spread_parametric(double r, double x, int p_star, const ConditionConstants& cc);
double spread_semiparametric(double r, double x, int p_star, int p, const ConditionConstants& cc,
                             double nu);
double spread_semiparametric_plain(double r, double x, int p_star, int p,
                                   const ConditionConstants& cc, double nu);

struct ConvertedConstants {
  double g_breve;
  double nu_breve;
  ScalarMap delta_breve;
  double omega_breve;
};
ConvertedConstants convert_conditions(const ConditionConstants& cc, double nu);

double C_nu(double nu);
double fisher_radius(int k, double x, double nu, double R0, double z, double spread_at_R0);

struct A3Check {
  double c1 = 0.0;
  double c2 = 0.0;
  bool pass = false;
};
A3Check check_A3(double eps, double z, double R0, double nu);
// Throws DomainError when check_A3 fails.
double fisher_radius_refined(int k, double x, double nu, double R0, double z, double eps);

bool check_B1(double x, int p_star, const ConditionConstants& cc);

// Smallest k with nu^k R0 <= z^2 / 2. nu = 0 gives 1 (or 0 if z^2 >= 2 R0).
int stopping_steps_K(double x, double nu, double R0, double z);

double kappa(double x, double R0, const ConditionConstants& cc, double nu, double norm_Dinv,
             double z_6pstar, double z_hess);

struct MeRadius {
  double r = 0.0;
  double tau = 1.0;  // tau(x) at this k; 1 on the first branch
  double L = 0.0;    // L(k), clamped at 0; 0 on the first branch
  bool second_branch = false;
};
MeRadius me_radius(int k, double kappa_val, double nu, double R_tilde0, double x);

struct QuadTailRow {
  double x = 0.0;
  double z = 0.0;
  double fraction = 0.0;
  double se = 0.0;
  double bound = 0.0;  // 2 exp(-x)
  bool pass = false;
};
struct QuadTailReport {
  std::vector<QuadTailRow> rows;
  bool pass = true;
};
// Chunks of draws are seeded from (seed, chunk index); results do not depend
// on the thread count.
QuadTailReport validate_quad_tail(const MatrixXd& B, const std::vector<double>& x_list,
                                  std::int64_t n_draws, std::uint64_t seed, int threads = 1);

struct BoundInputs {
  double x = 2.0;
  int p = 1;
  int m = 1;
  double nu = 0.0;
  ConditionConstants cc;
  MatrixXd B;            // p* x p*; identity when empty
  double R_K = 0.0;      // distance of the start from the truth for K0
  double eps = 0.0;      // (A3) constant; refined radii are produced when > 0
  int k_max = 30;
  double norm_Dinv = 0.0;
};

struct BoundReport {
  double z_quad = 0.0;
  double z0_sq = 0.0;       // z0(x, 4 p*)^2
  double z_entropy = 0.0;   // z(x, 2 p* + 2 p)
  double z_6pstar = 0.0;    // z(x, 6 p*)
  double z_x = 0.0;
  double K0 = 0.0;
  double R0 = 0.0;
  double r_ups = 0.0;
  double spread_Q = 0.0;          // at R0
  double spread_semi = 0.0;       // at R0
  double spread_semi_plain = 0.0; // at R0
  std::vector<double> r_k;
  std::vector<double> r_k_refined;  // empty unless eps > 0 and (A3) passes
  A3Check a3;
  bool b1 = false;
  int K_stop = 0;
  double kappa = 0.0;
  bool me_valid = false;  // kappa < 1 - nu
  std::vector<double> r_star_k;
  double tau_x = 1.0;     // at k_max
  double L_k = 0.0;       // at k_max
  ConvertedConstants converted;
  QuadFormConstants qf;
  double mu_c = kMuC;
  double C_nu = 0.0;
};

BoundReport make_report(const BoundInputs& in);

}  // namespace altmax::bounds
