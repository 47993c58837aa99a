#pragma once

// Interface every model exposes to the alternating solver and the harness.
//
// theta lives in R^p but may be restricted to a manifold (the single-index
// model keeps it on a half-sphere). Statistical quantities are expressed in
// local coordinates: a chart of dimension chart_dim() for theta, centred at
// the chart centre (the truth when it is known), and eta itself.

#include "altmax/stat_core.hpp"

namespace altmax {

class UnsupportedCapability : public Error {
 public:
  using Error::Error;
};

struct Capabilities {
  bool closed_form_eta = false;
  bool closed_form_theta = false;
  bool exact_covariance = false;
  bool truth_known = false;
};

enum class Block { Theta, Eta };

// Information and score covariance at the truth, in local coordinates.
struct InformationAtTruth {
  BlockInformation info;
  BlockInformation cov;
  bool cov_exact = false;
};

class Model {
 public:
  virtual ~Model() = default;

  virtual int p() const = 0;
  virtual int m() const = 0;
  virtual int chart_dim() const { return p(); }
  virtual Capabilities capabilities() const = 0;

  virtual double evaluate(const ParameterPoint& pt) const = 0;
  virtual ParameterPoint gradient(const ParameterPoint& pt) const = 0;

  // Exact partial maximizers. Throw UnsupportedCapability unless the matching
  // capability flag is set.
  virtual VectorXd closed_form_eta(const VectorXd& theta) const;
  virtual VectorXd closed_form_theta(const VectorXd& eta) const;

  // Admissible-set hooks used by numerical partial maximizers.
  virtual VectorXd retract_theta(const VectorXd& theta) const { return theta; }
  virtual VectorXd retract_eta(const VectorXd& eta) const { return eta; }
  // Projects an ambient theta-gradient onto the tangent space at theta.
  virtual VectorXd tangent_theta(const VectorXd& /*theta*/, const VectorXd& g) const { return g; }
  virtual bool admissible(const ParameterPoint& pt) const;

  // Throws UnsupportedCapability when the truth is unknown.
  virtual ParameterPoint truth() const;
  virtual InformationAtTruth information_at_truth() const;

  // Chart for theta. Defaults are the identity shifted by the centre.
  virtual VectorXd chart_center() const { return truth().theta; }
  virtual VectorXd theta_to_chart(const VectorXd& theta) const { return theta - chart_center(); }
  virtual VectorXd chart_to_theta(const VectorXd& phi) const { return chart_center() + phi; }
  // Gradient of L with respect to the chart coordinates of theta.
  virtual VectorXd chart_gradient_theta(const ParameterPoint& pt) const { return gradient(pt).theta; }

  // (chart(theta), eta) and its inverse.
  VectorXd to_local(const ParameterPoint& pt) const;
  ParameterPoint from_local(const VectorXd& v) const;
  // Gradient in local coordinates.
  VectorXd local_gradient(const ParameterPoint& pt) const;

  void check_point(const ParameterPoint& pt) const;
};

}  // namespace altmax
