#pragma once

#include <vector>

namespace altmax::stats {

// Regularized lower incomplete gamma P(a, x); series for x < a + 1,
// Lentz continued fraction otherwise, both to relative accuracy 1e-15.
double gamma_p(double a, double x);
double chi2_cdf(double x, int dof);

double mean(const std::vector<double>& v);
// Unbiased sample variance; 0 for fewer than two values.
double variance(const std::vector<double>& v);
double median(std::vector<double> v);
// Large-sample standard error of the median, 1.2533 sd / sqrt(n).
double median_se(const std::vector<double>& v);

// sup_x |F_n(x) - F(x)| against the chi-square law with `dof` degrees.
double ks_distance_chi2(std::vector<double> samples, int dof);

struct Chi2Diagnostics {
  double mean = 0.0;
  double variance = 0.0;
  double se_mean = 0.0;
  double ks = 0.0;
};
Chi2Diagnostics chi2_diagnostics(const std::vector<double>& samples, int dof);

struct ContractionFit {
  double rate = 0.0;
  bool valid = false;  // false: fewer than two usable points, or all equal
  int points = 0;
};

// Least-squares slope of log d_k against k over k >= 2 with d_k > 10 floor,
// exponentiated. `d` holds distances to the limit indexed by k.
ContractionFit fit_contraction(const std::vector<double>& d, double floor);

}  // namespace altmax::stats
