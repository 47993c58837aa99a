#include "altmax/wavelet.hpp"

#include "altmax/stat_core.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <iomanip>

namespace altmax::wavelet {

namespace {

// Extremal-phase filters; regenerate with tools/gen_daubechies.py.
const std::vector<double> kDb2 = {
    0.48296291314453414337, 0.83651630373780790558, 0.22414386804201338103,
    -0.12940952255126038117};

const std::vector<double> kDb7 = {
    0.07785205408500917902,   0.39653931948191730654,   0.72913209084623511992,
    0.46978228740519312247,   -0.14390600392856497541,  -0.22403618499387498264,
    0.071309219266830264751,  0.080612609151083071913,  -0.03802993693501441358,
    -0.016574541630666880654, 0.012550998556099840613,  0.00042957797292136652113,
    -0.0018016407040474909153, 0.00035371379997452024845};

const std::vector<double> kDb8 = {
    0.054415842243104009955,   0.31287159091429997066,    0.67563073629728980681,
    0.58535468365420671277,    -0.015829105256349305667,  -0.28401554296154692652,
    0.00047248457391328277036, 0.12874742662047845886,    -0.01736930100180754617,
    -0.044088253930794751507,  0.013981027917398281649,   0.0087460940474057767164,
    -0.0048703529934515743104, -0.0003917403733769470463, 0.00067544940645056936637,
    -0.00011747678412476953373};

// Solves (scale * M - I) v = 0 with one extra normalization row w.v = rhs,
// where M_{n,l} = c_{2n-l} on the integer points 0..S.
std::vector<double> integer_values(const std::vector<double>& c, double scale,
                                   const Eigen::VectorXd& w, double rhs) {
  const int S = static_cast<int>(c.size()) - 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(S + 2, S + 1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(S + 2);
  for (int n = 0; n <= S; ++n) {
    for (int l = 0; l <= S; ++l) {
      const int k = 2 * n - l;
      if (k >= 0 && k <= S) A(n, l) += scale * c[k];
    }
    A(n, n) -= 1.0;
  }
  A.row(S + 1) = w.transpose();
  b(S + 1) = rhs;
  Eigen::VectorXd v = A.colPivHouseholderQr().solve(b);
  return {v.data(), v.data() + v.size()};
}

// Cascade refinement of f(x) = scale * sum_k c_k f(2x - k) from integer
// values to resolution 2^-J.
std::vector<double> cascade(const std::vector<double>& c, double scale,
                            const std::vector<double>& at_integers, int J) {
  const int S = static_cast<int>(c.size()) - 1;
  const long res = 1L << J;
  const long n = S * res + 1;
  std::vector<double> f(n, 0.0);
  for (int i = 0; i <= S; ++i) f[i * res] = at_integers[i];
  for (int level = 1; level <= J; ++level) {
    const long step = 1L << (J - level);
    for (long i = step; i < n; i += 2 * step) {
      // x = i / res; 2x - k has fine index 2i - k res, already known.
      double s = 0.0;
      for (int k = 0; k <= S; ++k) {
        const long idx = 2 * i - k * res;
        if (idx >= 0 && idx < n) s += c[k] * f[idx];
      }
      f[i] = scale * s;
    }
  }
  return f;
}

}  // namespace

const std::vector<double>& daubechies_filter(int genus) {
  switch (genus) {
    case 2: return kDb2;
    case 7: return kDb7;
    case 8: return kDb8;
    default: throw DomainError("unsupported Daubechies genus " + std::to_string(genus));
  }
}

DaubechiesWavelet::DaubechiesWavelet(int genus, int J) : genus_(genus), J_(J) {
  if (J < 1 || J > 20) throw DomainError("table resolution J must lie in [1, 20]");
  const std::vector<double>& h = daubechies_filter(genus);
  S_ = static_cast<int>(h.size()) - 1;
  h_ = std::ldexp(1.0, -J);
  std::vector<double> c(h.size());
  for (size_t k = 0; k < h.size(); ++k) c[k] = std::sqrt(2.0) * h[k];

  // sum_n phi(n) = 1 and sum_n n phi'(n) = -1 (partition of unity and its
  // first-moment counterpart, differentiated).
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(S_ + 1);
  Eigen::VectorXd ramp = Eigen::VectorXd::LinSpaced(S_ + 1, 0.0, S_);
  phi_ = cascade(c, 1.0, integer_values(c, 1.0, ones, 1.0), J);
  dphi_ = cascade(c, 2.0, integer_values(c, 2.0, ramp, -1.0), J);

  const long res = 1L << J;
  const long n = S_ * res + 1;
  psi_.assign(n, 0.0);
  dpsi_.assign(n, 0.0);
  for (long i = 0; i < n; ++i) {
    double s = 0.0, ds = 0.0;
    for (int k = 0; k <= S_; ++k) {
      const long idx = 2 * i - k * res;
      if (idx < 0 || idx >= n) continue;
      const double d = ((k % 2) ? -1.0 : 1.0) * c[S_ - k];
      s += d * phi_[idx];
      ds += d * dphi_[idx];
    }
    psi_[i] = s;
    dpsi_[i] = 2.0 * ds;
  }
}

void DaubechiesWavelet::eval(double u, double& value, double& deriv) const {
  if (!(u > 0.0 && u < S_)) {
    value = 0.0;
    deriv = 0.0;
    return;
  }
  const double x = u / h_;
  long i = static_cast<long>(x);
  if (i >= static_cast<long>(psi_.size()) - 1) i = static_cast<long>(psi_.size()) - 2;
  const double s = x - static_cast<double>(i);
  const double s2 = s * s, s3 = s2 * s;
  const double p0 = psi_[i], p1 = psi_[i + 1];
  const double m0 = dpsi_[i] * h_, m1 = dpsi_[i + 1] * h_;
  value = (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1;
  deriv = ((6 * s2 - 6 * s) * p0 + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) * p1 +
           (3 * s2 - 2 * s) * m1) /
          h_;
}

double DaubechiesWavelet::psi(double u) const {
  double v, d;
  eval(u, v, d);
  return v;
}

double DaubechiesWavelet::dpsi(double u) const {
  double v, d;
  eval(u, v, d);
  return d;
}

WaveletBasis::WaveletBasis(int m, double s_X, int genus, int J)
    : m_(m), s_X_(s_X), wavelet_(genus, J) {
  if (m < 1) throw DomainError("basis needs m >= 1");
  if (!(s_X > 0.0)) throw DomainError("s_X must be positive");
  const int S = wavelet_.support();
  c_ = (2.0 * S - 1.0) / (2.0 * s_X);
  for (int k = 0; k < m; ++k) {
    int j = 0;
    while (k >= ((1 << (j + 1)) - 1) * S) ++j;
    const int r = k - ((1 << j) - 1) * S;
    idx_.push_back({j, r});
    scale_.push_back(std::ldexp(c_, j));
    amp_.push_back(std::sqrt(std::ldexp(c_, j)));
  }
}

WaveletBasis::Index WaveletBasis::index(int k) const {
  if (k < 0 || k >= m_) throw DomainError("basis index out of range");
  return idx_[k];
}

std::pair<double, double> WaveletBasis::support(int k) const {
  const Index ix = index(k);
  const double S = wavelet_.support();
  const double lo = ix.r / scale_[k] - s_X_;
  return {lo, lo + S / scale_[k]};
}

double WaveletBasis::eval(int k, double t) const {
  const Index ix = index(k);
  return amp_[k] * wavelet_.psi(scale_[k] * (t + s_X_) - ix.r);
}

double WaveletBasis::deriv(int k, double t) const {
  const Index ix = index(k);
  return amp_[k] * scale_[k] * wavelet_.dpsi(scale_[k] * (t + s_X_) - ix.r);
}

void WaveletBasis::eval_all(double t, double* values, double* derivs) const {
  for (int k = 0; k < m_; ++k) {
    double v, d;
    wavelet_.eval(scale_[k] * (t + s_X_) - idx_[k].r, v, d);
    values[k] = amp_[k] * v;
    if (derivs) derivs[k] = amp_[k] * scale_[k] * d;
  }
}

void WaveletBasis::dump(std::ostream& os) const {
  os << "k,j,r,t_lo,t_hi\n" << std::setprecision(17);
  for (int k = 0; k < m_; ++k) {
    const auto [lo, hi] = support(k);
    os << k << ',' << idx_[k].j << ',' << idx_[k].r << ',' << lo << ',' << hi << '\n';
  }
}

}  // namespace altmax::wavelet
