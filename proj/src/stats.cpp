#include "altmax/stats.hpp"

#include "altmax/stat_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace altmax::stats {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 100000;

double series(double a, double x) {
  double term = 1.0 / a, sum = term, ap = a;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper tail Q(a, x) by modified Lentz.
double continued_fraction(double a, double x) {
  const double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0.0)) throw DomainError("gamma_p needs a > 0");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return series(a, x);
  return 1.0 - continued_fraction(a, x);
}

double chi2_cdf(double x, int dof) {
  if (dof < 1) throw DomainError("chi-square needs dof >= 1");
  return gamma_p(0.5 * dof, 0.5 * x);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return s / static_cast<double>(v.size() - 1);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double median_se(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  return 1.2533141373155003 * std::sqrt(variance(v) / static_cast<double>(v.size()));
}

double ks_distance_chi2(std::vector<double> samples, int dof) {
  if (samples.empty()) throw DomainError("KS distance needs samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double F = chi2_cdf(samples[i], dof);
    d = std::max({d, (i + 1) / n - F, F - i / n});
  }
  return d;
}

Chi2Diagnostics chi2_diagnostics(const std::vector<double>& samples, int dof) {
  Chi2Diagnostics c;
  c.mean = mean(samples);
  c.variance = variance(samples);
  c.se_mean = std::sqrt(c.variance / static_cast<double>(samples.size()));
  c.ks = ks_distance_chi2(samples, dof);
  return c;
}

ContractionFit fit_contraction(const std::vector<double>& d, double floor) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  bool varies = false;
  double first = 0.0;
  for (size_t k = 2; k < d.size(); ++k) {
    if (!(d[k] > 10.0 * floor) || !std::isfinite(d[k])) continue;
    const double x = static_cast<double>(k), y = std::log(d[k]);
    if (n == 0) first = d[k];
    varies = varies || d[k] != first;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  ContractionFit f;
  f.points = n;
  if (n < 2 || !varies) return f;
  const double den = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / den;
  f.rate = std::exp(slope);
  f.valid = true;
  return f;
}

}  // namespace altmax::stats
