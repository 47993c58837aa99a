#include "altmax/single_index.hpp"

#include "altmax/ascent.hpp"
#include "altmax/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <iomanip>
#include <numbers>
#include <thread>

namespace altmax::single_index {

namespace {

constexpr double kCondLimit = 1e12;
constexpr double kRidgeFactor = 1e-8;

// E_t[f'(t)^2 (s^2 - t^2) / (p + 1)] and E_t[e(t) e(t)^T] for t = X^T theta*
// with X uniform on the p-ball of radius s: t has density proportional to
// (s^2 - t^2)^{(p-1)/2} and the orthogonal part has conditional second
// moment (s^2 - t^2) / (p + 1) per coordinate.
struct RegressorMoments {
  double slope = 0.0;
  MatrixXd gram;
};

RegressorMoments regressor_moments(const wavelet::WaveletBasis& basis, const VectorXd& eta, int p) {
  static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                               0.9061798459386640};
  static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                               0.4786286704993665, 0.2369268850561891};
  const int m = basis.m();
  const double s = basis.s_X();
  int jmax = 0;
  for (int k = 0; k < m; ++k) jmax = std::max(jmax, basis.index(k).j);
  // Panels aligned with the finest table knots.
  const long panels =
      static_cast<long>(2 * basis.wavelet().support() - 1) << (basis.J_table() + jmax);
  const double width = 2.0 * s / static_cast<double>(panels);

  double mass = 0.0, slope = 0.0;
  MatrixXd gram = MatrixXd::Zero(m, m);
  VectorXd e(m), de(m);
  for (long q = 0; q < panels; ++q) {
    const double a = -s + width * static_cast<double>(q);
    for (int i = 0; i < 5; ++i) {
      const double t = a + 0.5 * width * (gx[i] + 1.0);
      const double h = std::max(0.0, s * s - t * t);
      const double dens = std::pow(h, 0.5 * (p - 1));
      const double w = 0.5 * width * gw[i] * dens;
      basis.eval_all(t, e.data(), de.data());
      const double fp = eta.dot(de);
      mass += w;
      slope += w * fp * fp * h / (p + 1.0);
      gram.noalias() += w * e * e.transpose();
    }
  }
  return {slope / mass, gram / mass};
}

}  // namespace

void Dataset::write_csv(std::ostream& os) const {
  for (int j = 1; j <= p(); ++j) os << "X_" << j << ',';
  os << "y\n" << std::setprecision(17);
  for (int i = 0; i < n(); ++i) {
    for (int j = 0; j < p(); ++j) os << X(i, j) << ',';
    os << y(i) << '\n';
  }
}

void check_half_sphere(const VectorXd& theta) {
  if (theta.size() < 1) throw DimensionError("theta must have at least one coordinate");
  if (std::abs(theta.norm() - 1.0) > 1e-12) throw DomainError("theta must have unit norm");
  if (!(theta(0) > 0.0)) throw DomainError("theta must have a positive first coordinate");
}

Dataset generate(int n, int p, const VectorXd& theta_star, const VectorXd& eta_star, double sigma,
                 const wavelet::WaveletBasis& basis, std::uint64_t seed) {
  if (n < 1 || p < 1) throw DomainError("generate needs n >= 1 and p >= 1");
  if (theta_star.size() != p) throw DimensionError("theta_star has wrong length");
  check_half_sphere(theta_star);
  if (eta_star.size() != basis.m()) throw DimensionError("eta_star has wrong length");
  if (sigma < 0.0) throw DomainError("sigma must be non-negative");

  Dataset d;
  d.s_X = basis.s_X();
  d.seed = seed;
  d.truth = Truth{theta_star, eta_star, sigma};
  d.X.resize(n, p);
  d.y.resize(n);

  Engine eng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  VectorXd g(p);
  for (int i = 0; i < n; ++i) {
    double nrm = 0.0;
    do {
      for (int j = 0; j < p; ++j) g(j) = N(eng);
      nrm = g.norm();
    } while (nrm == 0.0);
    const double radius = d.s_X * std::pow(U(eng), 1.0 / p);
    d.X.row(i) = (radius / nrm) * g.transpose();
  }
  VectorXd e(basis.m());
  for (int i = 0; i < n; ++i) {
    basis.eval_all(d.X.row(i).dot(theta_star), e.data(), nullptr);
    d.y(i) = eta_star.dot(e);
  }
  if (sigma > 0.0)
    for (int i = 0; i < n; ++i) d.y(i) += sigma * N(eng);
  return d;
}

EtaStep eta_step_closed_form(const Dataset& data, const wavelet::WaveletBasis& basis,
                             const VectorXd& theta) {
  if (theta.size() != data.p()) throw DimensionError("theta has wrong length");
  const int m = basis.m();
  const int n = data.n();
  MatrixXd G = MatrixXd::Zero(m, m);
  VectorXd b = VectorXd::Zero(m);
  VectorXd e(m);
  for (int i = 0; i < n; ++i) {
    basis.eval_all(data.X.row(i).dot(theta), e.data(), nullptr);
    G.selfadjointView<Eigen::Lower>().rankUpdate(e);
    b += data.y(i) * e;
  }
  G = G.selfadjointView<Eigen::Lower>();
  G /= n;
  b /= n;

  auto condition = [](const MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    return lo > 0.0 ? hi / lo : INFINITY;
  };

  EtaStep out;
  out.condition = condition(G);
  if (out.condition > kCondLimit) {
    const double tr = G.trace();
    if (!(tr > 0.0)) throw NotPositiveDefinite("basis Gram matrix", 0.0);
    out.ridge = kRidgeFactor * tr / m;
    G.diagonal().array() += out.ridge;
    out.condition = condition(G);
    if (out.condition > kCondLimit) throw NotPositiveDefinite("basis Gram matrix (ridged)", 0.0);
  }
  out.eta = G.llt().solve(b);
  return out;
}

SingleIndexModel::SingleIndexModel(const Dataset& data, const wavelet::WaveletBasis& basis,
                                   ModelOptions opt)
    : data_(data), basis_(basis) {
  if (data.s_X != basis.s_X()) throw DomainError("dataset and basis disagree on s_X");
  if (data.truth && data.truth->eta_star.size() != basis.m())
    throw DimensionError("eta_star does not match the basis size");
  weight_ = opt.weight;
  if (weight_ <= 0.0)
    weight_ = (data.truth && data.truth->sigma > 0.0) ? 1.0 / (data.truth->sigma * data.truth->sigma) : 1.0;
  r_circ_ = opt.r_circ;
  if (r_circ_ <= 0.0) r_circ_ = data.truth ? 10.0 * data.truth->eta_star.norm() : 1e3;
  if (!(r_circ_ > 0.0)) r_circ_ = 1e3;

  center_ = opt.chart_center;
  if (center_.size() == 0) {
    center_ = data.truth ? data.truth->theta_star : VectorXd::Unit(data.p(), 0);
  }
  if (center_.size() != data.p()) throw DimensionError("chart centre has wrong length");
  check_half_sphere(center_);
  Eigen::HouseholderQR<MatrixXd> qr(center_);
  MatrixXd Q = qr.householderQ();
  U_ = Q.rightCols(data.p() - 1);
}

Capabilities SingleIndexModel::capabilities() const {
  Capabilities c;
  c.closed_form_eta = true;
  c.closed_form_theta = false;
  c.exact_covariance = false;
  c.truth_known = data_.truth.has_value();
  return c;
}

double SingleIndexModel::evaluate(const ParameterPoint& pt) const {
  check_point(pt);
  const int m = basis_.m();
  VectorXd e(m);
  double ss = 0.0;
  for (int i = 0; i < data_.n(); ++i) {
    basis_.eval_all(data_.X.row(i).dot(pt.theta), e.data(), nullptr);
    const double r = data_.y(i) - pt.eta.dot(e);
    ss += r * r;
  }
  return -0.5 * weight_ * ss;
}

ParameterPoint SingleIndexModel::gradient(const ParameterPoint& pt) const {
  check_point(pt);
  const int m = basis_.m();
  VectorXd e(m), de(m);
  ParameterPoint g{VectorXd::Zero(p()), VectorXd::Zero(m)};
  for (int i = 0; i < data_.n(); ++i) {
    basis_.eval_all(data_.X.row(i).dot(pt.theta), e.data(), de.data());
    const double r = data_.y(i) - pt.eta.dot(e);
    g.theta += (r * pt.eta.dot(de)) * data_.X.row(i).transpose();
    g.eta += r * e;
  }
  g.theta *= weight_;
  g.eta *= weight_;
  return g;
}

VectorXd SingleIndexModel::closed_form_eta(const VectorXd& theta) const {
  return retract_eta(eta_step_closed_form(data_, basis_, theta).eta);
}

VectorXd SingleIndexModel::retract_theta(const VectorXd& theta) const {
  if (theta.size() != p()) throw DimensionError("theta has wrong length");
  const double nrm = theta.norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm)) throw DomainError("cannot retract a zero or non-finite theta");
  VectorXd t = theta / nrm;
  if (t(0) < 0.0) t = -t;
  return t;
}

VectorXd SingleIndexModel::retract_eta(const VectorXd& eta) const {
  const double nrm = eta.norm();
  if (nrm > r_circ_) return eta * (r_circ_ / nrm);
  return eta;
}

VectorXd SingleIndexModel::tangent_theta(const VectorXd& theta, const VectorXd& g) const {
  const VectorXd t = theta.normalized();
  return g - t * t.dot(g);
}

bool SingleIndexModel::admissible(const ParameterPoint& pt) const {
  if (!Model::admissible(pt)) return false;
  return std::abs(pt.theta.norm() - 1.0) <= 1e-8 && pt.theta(0) > 0.0 &&
         pt.eta.norm() <= r_circ_ * (1.0 + 1e-12);
}

ParameterPoint SingleIndexModel::truth() const {
  if (!data_.truth) throw UnsupportedCapability("dataset carries no truth");
  return {data_.truth->theta_star, data_.truth->eta_star};
}

InformationAtTruth SingleIndexModel::information_at_truth() const {
  if (!data_.truth) throw UnsupportedCapability("dataset carries no truth");
  if ((center_ - data_.truth->theta_star).norm() > 1e-12)
    throw DomainError("information at the truth needs the chart centred at theta*");
  const RegressorMoments mom = regressor_moments(basis_, data_.truth->eta_star, p());
  const double scale = data_.n() * weight_;
  InformationAtTruth out;
  out.info.D2 = scale * mom.slope * MatrixXd::Identity(p() - 1, p() - 1);
  out.info.A = MatrixXd::Zero(p() - 1, m());
  out.info.H2 = scale * mom.gram;
  const double sigma = data_.truth->sigma;
  const double cov_factor = weight_ * sigma * sigma;
  out.cov = {cov_factor * out.info.D2, cov_factor * out.info.A, cov_factor * out.info.H2};
  out.cov_exact = true;
  return out;
}

VectorXd SingleIndexModel::theta_to_chart(const VectorXd& theta) const {
  const double s = center_.dot(theta);
  if (!(s > 0.0)) throw DomainError("theta lies outside the chart domain");
  return U_.transpose() * theta / s;
}

VectorXd SingleIndexModel::chart_to_theta(const VectorXd& phi) const {
  if (phi.size() != p() - 1) throw DimensionError("chart vector has wrong length");
  return (center_ + U_ * phi).normalized();
}

VectorXd SingleIndexModel::chart_gradient_theta(const ParameterPoint& pt) const {
  const VectorXd t = pt.theta.normalized();
  const double s = center_.dot(t);
  const VectorXd g = gradient(pt).theta;
  return s * (U_.transpose() * (g - t * t.dot(g)));
}

VectorXd theta_step(const SingleIndexModel& model, const VectorXd& eta, const VectorXd& theta_init,
                    double grad_tol) {
  if (model.p() == 1) return VectorXd::Ones(1);
  if (!eta.allFinite()) throw DomainError("eta must be finite");
  check_half_sphere(model.retract_theta(theta_init));
  AscentOptions opt;
  opt.grad_tol = grad_tol;
  return maximize_block(model, Block::Theta, {theta_init, eta}, opt).x;
}

std::vector<VectorXd> half_sphere_grid(int p, int N) {
  if (N < 1) throw DomainError("grid needs N >= 1");
  if (p < 1) throw DomainError("grid needs p >= 1");
  std::vector<VectorXd> g;
  if (p == 1) {
    g.push_back(VectorXd::Ones(1));
    return g;
  }
  if (p == 2) {
    for (int j = 0; j < N; ++j) {
      const double a = -std::numbers::pi / 2 + (j + 0.5) * std::numbers::pi / N;
      VectorXd t(2);
      t << std::cos(a), std::sin(a);
      g.push_back(t);
    }
    return g;
  }
  if (p == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int j = 0; j < N; ++j) {
      const double z = (j + 0.5) / N;
      const double r = std::sqrt(1.0 - z * z);
      VectorXd t(3);
      t << z, r * std::cos(golden * j), r * std::sin(golden * j);
      g.push_back(t);
    }
    return g;
  }
  Engine eng(0x5EEDULL + static_cast<std::uint64_t>(p));
  std::normal_distribution<double> Nd(0.0, 1.0);
  for (int j = 0; j < N; ++j) {
    VectorXd t(p);
    do {
      for (int i = 0; i < p; ++i) t(i) = Nd(eng);
    } while (t.norm() == 0.0);
    t.normalize();
    if (t(0) < 0) t = -t;
    g.push_back(t);
  }
  return g;
}

double mesh_width(const std::vector<VectorXd>& grid) {
  double tau = 0.0;
  for (size_t i = 0; i < grid.size(); ++i) {
    double nn = INFINITY;
    for (size_t j = 0; j < grid.size(); ++j)
      if (j != i) nn = std::min(nn, (grid[i] - grid[j]).norm());
    if (std::isfinite(nn)) tau = std::max(tau, nn);
  }
  return tau;
}

GridInit grid_init(const SingleIndexModel& model, int N, int threads) {
  const std::vector<VectorXd> grid = half_sphere_grid(model.p(), N);
  std::vector<VectorXd> etas(grid.size());
  std::vector<double> vals(grid.size());
  const int T = std::max(1, std::min<int>(threads, static_cast<int>(grid.size())));
  auto work = [&](int t) {
    for (size_t i = t; i < grid.size(); i += T) {
      etas[i] = model.closed_form_eta(grid[i]);
      vals[i] = model.evaluate({grid[i], etas[i]});
    }
  };
  if (T == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < T; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  GridInit out;
  out.index = 0;
  for (size_t i = 1; i < grid.size(); ++i)
    if (vals[i] > vals[out.index]) out.index = static_cast<int>(i);
  out.point = {grid[out.index], etas[out.index]};
  out.value = vals[out.index];
  out.tau = mesh_width(grid);
  return out;
}

}  // namespace altmax::single_index
