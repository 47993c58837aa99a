#include "altmax/model.hpp"

namespace altmax {

VectorXd Model::closed_form_eta(const VectorXd&) const {
  throw UnsupportedCapability("model has no closed-form eta step");
}

VectorXd Model::closed_form_theta(const VectorXd&) const {
  throw UnsupportedCapability("model has no closed-form theta step");
}

bool Model::admissible(const ParameterPoint& pt) const {
  return pt.p() == p() && pt.m() == m() && pt.theta.allFinite() && pt.eta.allFinite();
}

ParameterPoint Model::truth() const { throw UnsupportedCapability("model truth is unknown"); }

InformationAtTruth Model::information_at_truth() const {
  throw UnsupportedCapability("model does not provide information at the truth");
}

VectorXd Model::to_local(const ParameterPoint& pt) const {
  check_point(pt);
  VectorXd phi = theta_to_chart(pt.theta);
  VectorXd v(phi.size() + pt.eta.size());
  v << phi, pt.eta;
  return v;
}

ParameterPoint Model::from_local(const VectorXd& v) const {
  const int q = chart_dim();
  if (v.size() != q + m()) throw DimensionError("local vector has wrong length");
  return {chart_to_theta(v.head(q)), v.tail(m())};
}

VectorXd Model::local_gradient(const ParameterPoint& pt) const {
  VectorXd gt = chart_gradient_theta(pt);
  VectorXd ge = gradient(pt).eta;
  VectorXd v(gt.size() + ge.size());
  v << gt, ge;
  return v;
}

void Model::check_point(const ParameterPoint& pt) const {
  if (pt.p() != p() || pt.m() != m())
    throw DimensionError("point has dimensions (" + std::to_string(pt.p()) + ", " +
                         std::to_string(pt.m()) + "), model expects (" + std::to_string(p()) +
                         ", " + std::to_string(m()) + ")");
}

}  // namespace altmax
