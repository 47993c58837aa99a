#pragma once

// Block information algebra for a (target, nuisance) split of the parameter.
//
// A full p* x p* SPD matrix F^2 is stored as three blocks
//
//        | D^2   A  |
//  F^2 = |          |      D^2: p x p,  A: p x m,  H^2: m x m
//        | A^T  H^2 |
//
// and the same layout holds the score covariance (V^2, B, Q^2).

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace altmax {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched sizes between vectors and matrices.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Input outside the domain of a formula (negative radius, nu >= 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Matrix that should be SPD is not; carries the offending block.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(std::string block, double min_eig);
  const std::string& block() const { return block_; }
  double min_eigenvalue() const { return min_eig_; }

 private:
  std::string block_;
  double min_eig_;
};

struct ParameterPoint {
  VectorXd theta;
  VectorXd eta;

  ParameterPoint() = default;
  ParameterPoint(VectorXd t, VectorXd e) : theta(std::move(t)), eta(std::move(e)) {}

  int p() const { return static_cast<int>(theta.size()); }
  int m() const { return static_cast<int>(eta.size()); }
  VectorXd stacked() const;
  static ParameterPoint split(const VectorXd& v, int p);
};

struct BlockInformation {
  MatrixXd D2;
  MatrixXd A;
  MatrixXd H2;

  int p() const { return static_cast<int>(D2.rows()); }
  int m() const { return static_cast<int>(H2.rows()); }
  MatrixXd full() const;
  // Splits a full symmetric matrix; the off-diagonal block is taken from the
  // upper-right corner.
  static BlockInformation from_full(const MatrixXd& F2, int p);
  // Throws DimensionError when block sizes disagree.
  void check_shapes() const;
};

struct EfficientScore {
  MatrixXd D2_breve;   // D^2 - A H^-2 A^T
  MatrixXd D_breve;    // symmetric square root of D2_breve
  VectorXd grad_breve; // grad_theta - A H^-2 grad_eta
  VectorXd xi_breve;   // D_breve^-1 grad_breve
};

// Eigenvalues in (-1e-10, 0) are clipped to zero; anything lower throws.
MatrixXd spd_sqrt(const MatrixXd& M, const std::string& name);
// Inverse square root; throws unless M is strictly positive definite.
MatrixXd spd_inv_sqrt(const MatrixXd& M, const std::string& name);
void require_spd(const MatrixXd& M, const std::string& name);
double spectral_norm(const MatrixXd& M);

// nu = || D^-1 A H^-1 ||^2. Values >= 1 are returned, not rejected.
double coupling_norm(const BlockInformation& info);

// D^2 - A H^-2 A^T. Throws DomainError if the coupling norm is >= 1.
MatrixXd efficient_information(const BlockInformation& info);

EfficientScore efficient_score(const BlockInformation& info, const VectorXd& grad_theta,
                               const VectorXd& grad_eta);

// Covariance of grad_theta - A H^-2 grad_eta given the full score covariance.
MatrixXd efficient_score_covariance(const BlockInformation& info, const BlockInformation& cov);

// D^-1 V^2 D^-1 with D the square root of the full information.
MatrixXd standardized_covariance(const BlockInformation& info, const BlockInformation& cov);

}  // namespace altmax
