#pragma once

// Daubechies wavelets tabulated on a dyadic grid, and the sieve basis built
// from their dilations and translations.
//
// phi(x) = sum_k c_k phi(2x - k) with c = sqrt(2) h, supported on [0, S],
// S = 2N - 1. Values at the integers come from the eigenvector of the
// refinement matrix; the cascade then fills in level by level. The
// derivative table uses the differentiated refinement phi' = 2 sum c_k phi'(2x-k).
// psi(x) = sum_k (-1)^k c_{S-k} phi(2x - k), also supported on [0, S].
//
// Evaluation between grid points uses cubic Hermite interpolation of the
// value and derivative tables, so evaluated values and derivatives are
// consistent with each other.

#include <ostream>
#include <utility>
#include <vector>

namespace altmax::wavelet {

// Orthonormal lowpass filter of the given genus (number of vanishing moments);
// sum h = sqrt(2). Supported genera: 2, 7, 8.
const std::vector<double>& daubechies_filter(int genus);

class DaubechiesWavelet {
 public:
  DaubechiesWavelet(int genus, int J);

  int genus() const { return genus_; }
  int J() const { return J_; }
  int support() const { return S_; }

  // psi and psi' at u; zero outside [0, S].
  void eval(double u, double& value, double& deriv) const;
  double psi(double u) const;
  double dpsi(double u) const;

  // Tables at u = i / 2^J, i = 0 .. S 2^J.
  const std::vector<double>& phi_table() const { return phi_; }
  const std::vector<double>& psi_table() const { return psi_; }
  const std::vector<double>& dpsi_table() const { return dpsi_; }

 private:
  int genus_;
  int J_;
  int S_;
  double h_;
  std::vector<double> phi_, dphi_, psi_, dpsi_;
};

// e_k(t) = 2^{j/2} sqrt(c) psi(2^j c (t + s_X) - r), c = (2S - 1) / (2 s_X).
// Index k runs level-major, translate-minor: level j holds S 2^j translates
// r = 0 .. S 2^j - 1 and starts at k = (2^j - 1) S. With the interval
// [-s_X, s_X] mapped onto [0, 2S - 1], every such translate has its support
// inside the interval, so the basis is orthonormal on it.
class WaveletBasis {
 public:
  struct Index {
    int j;
    int r;
  };

  WaveletBasis(int m, double s_X, int genus = 7, int J = 12);

  int m() const { return m_; }
  double s_X() const { return s_X_; }
  int genus() const { return wavelet_.genus(); }
  int J_table() const { return wavelet_.J(); }
  const DaubechiesWavelet& wavelet() const { return wavelet_; }

  Index index(int k) const;
  // Support of e_k in t.
  std::pair<double, double> support(int k) const;

  double eval(int k, double t) const;
  double deriv(int k, double t) const;
  // All m values and derivatives at t.
  void eval_all(double t, double* values, double* derivs) const;

  // Columns: k, j, r, t_lo, t_hi.
  void dump(std::ostream& os) const;

 private:
  int m_;
  double s_X_;
  double c_;
  DaubechiesWavelet wavelet_;
  std::vector<Index> idx_;
  std::vector<double> scale_;  // 2^j c
  std::vector<double> amp_;    // 2^{j/2} sqrt(c)
};

}  // namespace altmax::wavelet
