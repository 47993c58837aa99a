#pragma once

// Linear-Gaussian model with Y = u* + eps, eps ~ N(0, F^-2), and
// L(u) = -|F (u - Y)|^2 / 2. Both partial maximizers are linear in the other
// block, so the alternation has a closed form.

#include "altmax/model.hpp"

#include <cstdint>

namespace altmax::toy {

class ToyGaussianModel : public Model {
 public:
  ToyGaussianModel(BlockInformation F2, ParameterPoint upsilon_star, VectorXd Y, std::uint64_t seed = 0);

  int p() const override { return F2_.p(); }
  int m() const override { return F2_.m(); }
  Capabilities capabilities() const override { return caps_; }

  double evaluate(const ParameterPoint& pt) const override;
  ParameterPoint gradient(const ParameterPoint& pt) const override;
  VectorXd closed_form_eta(const VectorXd& theta) const override;
  VectorXd closed_form_theta(const VectorXd& eta) const override;
  ParameterPoint truth() const override { return upsilon_star_; }
  InformationAtTruth information_at_truth() const override;

  const BlockInformation& F2() const { return F2_; }
  const VectorXd& Y() const { return Y_; }
  VectorXd y_theta() const { return Y_.head(p()); }
  VectorXd y_eta() const { return Y_.tail(m()); }
  std::uint64_t seed() const { return seed_; }

  // Turns off the closed-form steps so the numerical maximizers are used.
  void disable_closed_forms();

 private:
  BlockInformation F2_;
  MatrixXd full_;
  ParameterPoint upsilon_star_;
  VectorXd Y_;
  std::uint64_t seed_;
  Capabilities caps_;
  Eigen::LLT<MatrixXd> D2_llt_;
  Eigen::LLT<MatrixXd> H2_llt_;
};

// Y = u* + F^-1 z with z standard normal drawn from `seed`; zero_noise forces Y = u*.
ToyGaussianModel simulate(const BlockInformation& F2, const ParameterPoint& upsilon_star,
                          std::uint64_t seed, bool zero_noise = false);

struct Contraction {
  MatrixXd M0;  // F_theta^-1 A F_eta^-2 A^T F_theta^-1
  double norm = 0.0;
};
Contraction contraction_matrix(const BlockInformation& F2);

// u_{k,k} of the alternation from `start`, via the closed linear recursion
// theta_k - y_theta = F_theta^-1 M0^k F_theta (theta_0 - y_theta).
ParameterPoint exact_alternation(const ToyGaussianModel& model, const ParameterPoint& start, int k);

struct ExactProfile {
  ParameterPoint point;  // (Y_theta, Y_eta)
  MatrixXd curvature;    // efficient information of F2
};
ExactProfile exact_profile(const ToyGaussianModel& model);

}  // namespace altmax::toy
