#pragma once

// Single-index regression y = f(X^T theta*) + eps with f in a wavelet sieve,
// theta on the half-sphere {|theta| = 1, theta_1 > 0} and eta (the sieve
// coefficients) in a centred ball of radius r_circ.
//
// The functional is the Gaussian quasi log-likelihood
//   L(theta, eta) = -(w/2) sum_i (y_i - sum_k eta_k e_k(X_i^T theta))^2
// with w = 1/sigma^2 when the noise level is known and positive, else w = 1.
//
// Local coordinates for theta use the gnomonic chart at a centre c:
//   phi(theta) = U^T theta / (c^T theta),  theta(phi) = (c + U phi) / |c + U phi|,
// where the columns of U span the orthogonal complement of c.

#include "altmax/model.hpp"
#include "altmax/wavelet.hpp"

#include <cstdint>
#include <optional>
#include <ostream>

namespace altmax::single_index {

struct Truth {
  VectorXd theta_star;
  VectorXd eta_star;
  double sigma = 0.0;
};

struct Dataset {
  MatrixXd X;  // n x p, rows inside the ball of radius s_X
  VectorXd y;
  double s_X = 1.0;
  std::optional<Truth> truth;
  std::uint64_t seed = 0;

  int n() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(X.cols()); }
  // Columns X_1..X_p, y.
  void write_csv(std::ostream& os) const;
};

// Throws DomainError unless |theta| = 1 (to 1e-12) and theta_1 > 0.
void check_half_sphere(const VectorXd& theta);

// X uniform on the ball of radius basis.s_X(), eps ~ N(0, sigma^2).
Dataset generate(int n, int p, const VectorXd& theta_star, const VectorXd& eta_star, double sigma,
                 const wavelet::WaveletBasis& basis, std::uint64_t seed);

struct EtaStep {
  VectorXd eta;
  double ridge = 0.0;
  double condition = 0.0;
};

// Least-squares eta for fixed theta; falls back to ridge 1e-8 tr(G)/m when the
// Gram matrix G has condition number above 1e12.
EtaStep eta_step_closed_form(const Dataset& data, const wavelet::WaveletBasis& basis,
                             const VectorXd& theta);

struct ModelOptions {
  double r_circ = 0.0;     // <= 0: 10 |eta*| if the truth is known, else 1e3
  double weight = 0.0;     // <= 0: 1/sigma^2 if sigma > 0 is known, else 1
  VectorXd chart_center;   // empty: theta* if known, else e_1
};

class SingleIndexModel : public Model {
 public:
  SingleIndexModel(const Dataset& data, const wavelet::WaveletBasis& basis, ModelOptions opt = {});

  int p() const override { return data_.p(); }
  int m() const override { return basis_.m(); }
  int chart_dim() const override { return p() - 1; }
  Capabilities capabilities() const override;

  double evaluate(const ParameterPoint& pt) const override;
  ParameterPoint gradient(const ParameterPoint& pt) const override;
  VectorXd closed_form_eta(const VectorXd& theta) const override;

  VectorXd retract_theta(const VectorXd& theta) const override;
  VectorXd retract_eta(const VectorXd& eta) const override;
  VectorXd tangent_theta(const VectorXd& theta, const VectorXd& g) const override;
  bool admissible(const ParameterPoint& pt) const override;

  ParameterPoint truth() const override;
  // Information by quadrature over the regressor law; A = 0 because the
  // conditional mean of the orthogonal part of X given X^T theta* vanishes.
  // The covariance equals w^2 sigma^2 n E[g g^T].
  InformationAtTruth information_at_truth() const override;

  VectorXd chart_center() const override { return center_; }
  VectorXd theta_to_chart(const VectorXd& theta) const override;
  VectorXd chart_to_theta(const VectorXd& phi) const override;
  VectorXd chart_gradient_theta(const ParameterPoint& pt) const override;

  const Dataset& data() const { return data_; }
  const wavelet::WaveletBasis& basis() const { return basis_; }
  double weight() const { return weight_; }
  double r_circ() const { return r_circ_; }
  const MatrixXd& chart_basis() const { return U_; }

 private:
  const Dataset& data_;
  const wavelet::WaveletBasis& basis_;
  double weight_;
  double r_circ_;
  VectorXd center_;
  MatrixXd U_;
};

// Sphere-constrained maximizer of L(., eta) from theta_init; up to 5
// perturbed restarts. Throws SolverFailure when all attempts fail.
VectorXd theta_step(const SingleIndexModel& model, const VectorXd& eta, const VectorXd& theta_init,
                    double grad_tol = 1e-9);

struct GridInit {
  ParameterPoint point;
  double value = 0.0;
  double tau = 0.0;  // largest nearest-neighbour gap of the grid
  int index = 0;
};

// N points on the half-sphere: equally spaced angles for p = 2, a spherical
// Fibonacci lattice for p = 3, and a fixed-seed random design for p >= 4.
std::vector<VectorXd> half_sphere_grid(int p, int N);
double mesh_width(const std::vector<VectorXd>& grid);

// Best grid point with its closed-form eta; ties go to the lowest index.
GridInit grid_init(const SingleIndexModel& model, int N, int threads = 1);

}  // namespace altmax::single_index
