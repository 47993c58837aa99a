#include "altmax/ascent.hpp"

#include <algorithm>
#include <cmath>

namespace altmax {

namespace {

// Precision floor: below this the line search cannot resolve improvements.
constexpr double kStallGradient = 1e-6;

struct BlockView {
  const Model& model;
  Block block;
  ParameterPoint base;

  ParameterPoint at(const VectorXd& x) const {
    ParameterPoint pt = base;
    (block == Block::Theta ? pt.theta : pt.eta) = x;
    return pt;
  }
  double value(const VectorXd& x) const { return model.evaluate(at(x)); }
  VectorXd tangent_grad(const VectorXd& x) const {
    ParameterPoint g = model.gradient(at(x));
    if (block == Block::Theta) return model.tangent_theta(x, g.theta);
    return g.eta;
  }
  VectorXd retract(const VectorXd& x) const {
    return block == Block::Theta ? model.retract_theta(x) : model.retract_eta(x);
  }
};

AscentResult attempt(const BlockView& v, const VectorXd& x0, const AscentOptions& opt) {
  AscentResult r;
  VectorXd x = v.retract(x0);
  double f = v.value(x);
  VectorXd g = v.tangent_grad(x);
  if (!std::isfinite(f) || !g.allFinite()) {
    r.x = x;
    r.value = f;
    r.grad_norm = INFINITY;
    return r;
  }
  double gn = g.norm();
  double alpha = gn > 0 ? std::min(1.0, 0.1 * (1.0 + x.norm()) / gn) : 1.0;

  int it = 0;
  for (; it < opt.max_iter; ++it) {
    gn = g.norm();
    if (gn <= opt.grad_tol * (1.0 + std::abs(f))) {
      r.converged = true;
      break;
    }
    bool accepted = false;
    VectorXd x_new;
    double f_new = f;
    double a = alpha;
    for (int bt = 0; bt < 80; ++bt) {
      x_new = v.retract(x + a * g);
      f_new = v.value(x_new);
      if (std::isfinite(f_new) && f_new >= f + 1e-4 * g.dot(x_new - x) && f_new >= f) {
        accepted = true;
        break;
      }
      a *= 0.5;
    }
    if (!accepted) {
      r.converged = gn <= kStallGradient * (1.0 + std::abs(f));
      break;
    }
    VectorXd g_new = v.tangent_grad(x_new);
    VectorXd s = x_new - x;
    VectorXd y = g_new - g;
    const double curv = -s.dot(y);
    alpha = curv > 0 ? s.squaredNorm() / curv : 2.0 * a;
    alpha = std::clamp(alpha, 1e-30, 1e30);
    const bool no_move = s.norm() == 0.0;
    x = std::move(x_new);
    f = f_new;
    g = std::move(g_new);
    if (no_move) {
      r.converged = g.norm() <= kStallGradient * (1.0 + std::abs(f));
      break;
    }
  }
  r.x = x;
  r.value = f;
  r.grad_norm = g.norm();
  r.iterations = it;
  return r;
}

}  // namespace

AscentResult maximize_block(const Model& model, Block block, const ParameterPoint& base,
                            const AscentOptions& opt) {
  model.check_point(base);
  BlockView v{model, block, base};
  const VectorXd x0 = block == Block::Theta ? base.theta : base.eta;

  AscentResult best = attempt(v, x0, opt);
  for (int k = 0; !best.converged && k < opt.max_restarts; ++k) {
    // Deterministic perturbation: cycle through coordinates with alternating sign.
    VectorXd dir = VectorXd::Zero(x0.size());
    if (dir.size() > 0) dir(k % dir.size()) = (k % 2 == 0) ? 1.0 : -1.0;
    VectorXd start = x0 + opt.restart_scale * (1.0 + x0.norm()) * dir;
    AscentResult r = attempt(v, start, opt);
    r.restarts = k + 1;
    if (r.converged || r.value > best.value) best = r;
  }
  if (!best.converged) throw SolverFailure("numerical partial maximizer did not converge", v.at(best.x));
  return best;
}

}  // namespace altmax
