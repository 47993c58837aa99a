#include "altmax/toy_gaussian.hpp"

#include "altmax/rng.hpp"

namespace altmax::toy {

ToyGaussianModel::ToyGaussianModel(BlockInformation F2, ParameterPoint upsilon_star, VectorXd Y,
                                   std::uint64_t seed)
    : F2_(std::move(F2)), upsilon_star_(std::move(upsilon_star)), Y_(std::move(Y)), seed_(seed) {
  F2_.check_shapes();
  require_spd(F2_.D2, "D^2");
  if (F2_.m() > 0) require_spd(F2_.H2, "H^2");
  full_ = F2_.full();
  require_spd(full_, "F^2");
  if (upsilon_star_.p() != F2_.p() || upsilon_star_.m() != F2_.m() || Y_.size() != full_.rows())
    throw DimensionError("toy model dimensions are inconsistent");
  D2_llt_.compute(F2_.D2);
  if (F2_.m() > 0) H2_llt_.compute(F2_.H2);
  caps_.closed_form_eta = true;
  caps_.closed_form_theta = true;
  caps_.exact_covariance = true;
  caps_.truth_known = true;
}

void ToyGaussianModel::disable_closed_forms() {
  caps_.closed_form_eta = false;
  caps_.closed_form_theta = false;
}

double ToyGaussianModel::evaluate(const ParameterPoint& pt) const {
  check_point(pt);
  const VectorXd d = pt.stacked() - Y_;
  return -0.5 * d.dot(full_ * d);
}

ParameterPoint ToyGaussianModel::gradient(const ParameterPoint& pt) const {
  check_point(pt);
  return ParameterPoint::split(-(full_ * (pt.stacked() - Y_)), p());
}

VectorXd ToyGaussianModel::closed_form_eta(const VectorXd& theta) const {
  if (theta.size() != p()) throw DimensionError("theta has wrong length");
  if (m() == 0) return VectorXd(0);
  return y_eta() - H2_llt_.solve(F2_.A.transpose() * (theta - y_theta()));
}

VectorXd ToyGaussianModel::closed_form_theta(const VectorXd& eta) const {
  if (eta.size() != m()) throw DimensionError("eta has wrong length");
  return y_theta() - D2_llt_.solve(F2_.A * (eta - y_eta()));
}

InformationAtTruth ToyGaussianModel::information_at_truth() const {
  // Cov(grad L(u*)) = F^2 Cov(eps) F^2 = F^2.
  return {F2_, F2_, true};
}

ToyGaussianModel simulate(const BlockInformation& F2, const ParameterPoint& upsilon_star,
                          std::uint64_t seed, bool zero_noise) {
  const MatrixXd full = F2.full();
  VectorXd Y = upsilon_star.stacked();
  if (!zero_noise) {
    Engine eng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    VectorXd z(full.rows());
    for (int i = 0; i < z.size(); ++i) z(i) = N(eng);
    Y += spd_inv_sqrt(full, "F^2") * z;
  }
  return ToyGaussianModel(F2, upsilon_star, std::move(Y), seed);
}

Contraction contraction_matrix(const BlockInformation& F2) {
  F2.check_shapes();
  Contraction c;
  if (F2.m() == 0) {
    c.M0 = MatrixXd::Zero(F2.p(), F2.p());
    return c;
  }
  const MatrixXd Ft_inv = spd_inv_sqrt(F2.D2, "D^2");
  Eigen::LLT<MatrixXd> H(F2.H2);
  if (H.info() != Eigen::Success) throw NotPositiveDefinite("H^2", 0.0);
  c.M0 = Ft_inv * F2.A * H.solve(F2.A.transpose()) * Ft_inv;
  c.M0 = 0.5 * (c.M0 + c.M0.transpose());
  c.norm = spectral_norm(c.M0);
  return c;
}

ParameterPoint exact_alternation(const ToyGaussianModel& model, const ParameterPoint& start, int k) {
  model.check_point(start);
  if (k < 0) throw DomainError("k must be non-negative");
  if (k == 0) return start;
  const BlockInformation& F2 = model.F2();
  const MatrixXd Ft = spd_sqrt(F2.D2, "D^2");
  const MatrixXd Ft_inv = spd_inv_sqrt(F2.D2, "D^2");
  const Contraction c = contraction_matrix(F2);

  // theta_{k-1} and theta_k from powers of M0 in whitened coordinates.
  const VectorXd w0 = Ft * (start.theta - model.y_theta());
  VectorXd w_prev = w0;
  for (int i = 0; i < k - 1; ++i) w_prev = c.M0 * w_prev;
  const VectorXd w_k = c.M0 * w_prev;

  ParameterPoint out;
  out.theta = model.y_theta() + Ft_inv * w_k;
  out.eta = model.closed_form_eta(model.y_theta() + Ft_inv * w_prev);
  return out;
}

ExactProfile exact_profile(const ToyGaussianModel& model) {
  return {{model.y_theta(), model.y_eta()}, efficient_information(model.F2())};
}

}  // namespace altmax::toy
