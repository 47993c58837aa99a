#include "altmax/wavelet.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>

using namespace altmax::wavelet;

TEST_CASE("Daubechies filters satisfy the orthonormality and moment conditions") {
  for (int genus : {2, 7, 8}) {
    const auto& h = daubechies_filter(genus);
    REQUIRE(static_cast<int>(h.size()) == 2 * genus);
    double sum = 0.0;
    for (double v : h) sum += v;
    CHECK(sum == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    const int n = static_cast<int>(h.size());
    for (int l = 0; 2 * l < n; ++l) {
      double dot = 0.0;
      for (int k = 0; k + 2 * l < n; ++k) dot += h[k] * h[k + 2 * l];
      CHECK(dot == doctest::Approx(l == 0 ? 1.0 : 0.0).epsilon(1e-13));
    }
    for (int j = 0; j < genus; ++j) {
      double mom = 0.0, scale = 0.0;
      for (int k = 0; k < n; ++k) {
        mom += ((k % 2) ? -1.0 : 1.0) * std::pow(k, j) * h[k];
        scale += std::pow(k, j) * std::abs(h[k]);
      }
      CHECK(std::abs(mom) <= 1e-11 * scale);
    }
  }
  CHECK_THROWS(daubechies_filter(5));
}

TEST_CASE("scaling function tables form a partition of unity") {
  const DaubechiesWavelet w(7, 8);
  const auto& phi = w.phi_table();
  const int per = 1 << w.J();
  REQUIRE(static_cast<int>(phi.size()) == w.support() * per + 1);
  for (int i = 0; i < per; i += 7) {
    double s = 0.0;
    for (int k = 0; i + k * per < static_cast<int>(phi.size()); ++k) s += phi[i + k * per];
    CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("wavelet vanishes outside its support") {
  const DaubechiesWavelet w(7, 10);
  for (double u : {-5.0, -1e-9, 13.0 + 1e-9, 20.0}) {
    double v = 1.0, d = 1.0;
    w.eval(u, v, d);
    CHECK(v == 0.0);
    CHECK(d == 0.0);
  }
  const WaveletBasis b(20, 1.0);
  for (int k = 0; k < b.m(); ++k) {
    const auto [lo, hi] = b.support(k);
    CHECK(lo >= -1.0 - 1e-12);
    CHECK(hi <= 1.0 + 1e-12);
    CHECK(b.eval(k, lo - 1e-6) == 0.0);
    CHECK(b.eval(k, hi + 1e-6) == 0.0);
  }
}

TEST_CASE("wavelet derivative is consistent with its values") {
  const DaubechiesWavelet w(7, 12);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(0.01, 12.99);
  double scale = 0.0;
  for (double v : w.dpsi_table()) scale = std::max(scale, std::abs(v));
  for (int t = 0; t < 200; ++t) {
    const double u = U(rng), h = 1e-6;
    const double fd = (w.psi(u + h) - w.psi(u - h)) / (2 * h);
    CHECK(std::abs(fd - w.dpsi(u)) <= 1e-5 * scale);
  }
  // The tabulated derivative matches differences of the value table.
  const auto& psi = w.psi_table();
  const auto& dpsi = w.dpsi_table();
  const double step = 1.0 / (1 << w.J());
  for (size_t i = 1; i + 1 < psi.size(); i += 97) {
    const double fd = (psi[i + 1] - psi[i - 1]) / (2 * step);
    CHECK(std::abs(fd - dpsi[i]) <= 1e-3 * scale);
  }
}

TEST_CASE("sieve basis is orthonormal on the interval") {
  for (int m : {6, 30}) {
    const double s_X = 1.0;
    const WaveletBasis b(m, s_X);
    const int N = 1 << 16;
    const double h = 2 * s_X / N;
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
    std::vector<double> v(m), d(m);
    for (int i = 0; i <= N; ++i) {
      const double t = -s_X + i * h;
      b.eval_all(t, v.data(), d.data());
      const double w = (i == 0 || i == N) ? 0.5 * h : h;
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) G(j, k) += w * v[j] * v[k];
    }
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        INFO("m=" << m << " j=" << j << " k=" << k);
        CHECK(std::abs(G(j, k) - (j == k ? 1.0 : 0.0)) <= 1e-3);
      }
  }
}

TEST_CASE("basis index enumeration is level-major") {
  const WaveletBasis b(60, 1.0);
  const int S = b.wavelet().support();
  CHECK(b.index(0).j == 0);
  CHECK(b.index(S - 1).r == S - 1);
  CHECK(b.index(S).j == 1);
  CHECK(b.index(S).r == 0);
  CHECK(b.index(3 * S).j == 2);
  std::ostringstream os;
  b.dump(os);
  CHECK(os.str().find("k,j,r,t_lo,t_hi") != std::string::npos);
}
