#include "altmax/stat_core.hpp"

#include <Eigen/Eigenvalues>

#include <sstream>

namespace altmax {

namespace {

constexpr double kClipTolerance = 1e-10;

std::string describe_min_eig(const std::string& block, double min_eig) {
  std::ostringstream os;
  os << "block " << block << " is not positive definite (smallest eigenvalue " << min_eig << ")";
  return os.str();
}

Eigen::SelfAdjointEigenSolver<MatrixXd> eigen_of(const MatrixXd& M, const std::string& name) {
  if (M.rows() != M.cols()) throw DimensionError("block " + name + " is not square");
  if (!M.allFinite()) throw Error("block " + name + " has non-finite entries");
  MatrixXd S = 0.5 * (M + M.transpose());
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(S);
}

}  // namespace

NotPositiveDefinite::NotPositiveDefinite(std::string block, double min_eig)
    : Error(describe_min_eig(block, min_eig)), block_(std::move(block)), min_eig_(min_eig) {}

VectorXd ParameterPoint::stacked() const {
  VectorXd v(theta.size() + eta.size());
  v << theta, eta;
  return v;
}

ParameterPoint ParameterPoint::split(const VectorXd& v, int p) {
  if (p < 0 || p > v.size()) throw DimensionError("split index out of range");
  return {v.head(p), v.tail(v.size() - p)};
}

MatrixXd BlockInformation::full() const {
  check_shapes();
  const int P = p(), M = m();
  MatrixXd F(P + M, P + M);
  F.topLeftCorner(P, P) = D2;
  F.topRightCorner(P, M) = A;
  F.bottomLeftCorner(M, P) = A.transpose();
  F.bottomRightCorner(M, M) = H2;
  return F;
}

BlockInformation BlockInformation::from_full(const MatrixXd& F2, int p) {
  if (F2.rows() != F2.cols()) throw DimensionError("full information is not square");
  if (p < 0 || p > F2.rows()) throw DimensionError("target dimension out of range");
  const int m = static_cast<int>(F2.rows()) - p;
  BlockInformation b;
  b.D2 = F2.topLeftCorner(p, p);
  b.A = F2.topRightCorner(p, m);
  b.H2 = F2.bottomRightCorner(m, m);
  return b;
}

void BlockInformation::check_shapes() const {
  if (D2.rows() != D2.cols()) throw DimensionError("D^2 is not square");
  if (H2.rows() != H2.cols()) throw DimensionError("H^2 is not square");
  if (A.rows() != D2.rows() || A.cols() != H2.rows())
    throw DimensionError("coupling block A has shape inconsistent with D^2 and H^2");
}

MatrixXd spd_sqrt(const MatrixXd& M, const std::string& name) {
  auto es = eigen_of(M, name);
  VectorXd ev = es.eigenvalues();
  if (ev.size() > 0 && ev.minCoeff() < -kClipTolerance) throw NotPositiveDefinite(name, ev.minCoeff());
  ev = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

MatrixXd spd_inv_sqrt(const MatrixXd& M, const std::string& name) {
  auto es = eigen_of(M, name);
  const VectorXd& ev = es.eigenvalues();
  if (ev.size() > 0 && ev.minCoeff() <= 0.0) throw NotPositiveDefinite(name, ev.minCoeff());
  VectorXd inv = ev.cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

void require_spd(const MatrixXd& M, const std::string& name) {
  auto es = eigen_of(M, name);
  if (es.eigenvalues().size() > 0 && es.eigenvalues().minCoeff() <= 0.0)
    throw NotPositiveDefinite(name, es.eigenvalues().minCoeff());
}

double spectral_norm(const MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXd> svd(M);
  return svd.singularValues()(0);
}

double coupling_norm(const BlockInformation& info) {
  info.check_shapes();
  if (info.p() == 0 || info.m() == 0) return 0.0;
  MatrixXd Dinv = spd_inv_sqrt(info.D2, "D^2");
  MatrixXd Hinv = spd_inv_sqrt(info.H2, "H^2");
  double s = spectral_norm(Dinv * info.A * Hinv);
  return s * s;
}

MatrixXd efficient_information(const BlockInformation& info) {
  const double nu = coupling_norm(info);
  if (nu >= 1.0) throw DomainError("coupling norm " + std::to_string(nu) + " >= 1");
  if (info.m() == 0) return info.D2;
  Eigen::LLT<MatrixXd> H(info.H2);
  MatrixXd Db2 = info.D2 - info.A * H.solve(info.A.transpose());
  return 0.5 * (Db2 + Db2.transpose());
}

EfficientScore efficient_score(const BlockInformation& info, const VectorXd& grad_theta,
                               const VectorXd& grad_eta) {
  info.check_shapes();
  if (grad_theta.size() != info.p() || grad_eta.size() != info.m())
    throw DimensionError("score dimensions do not match the information blocks");
  EfficientScore s;
  s.D2_breve = efficient_information(info);
  require_spd(s.D2_breve, "efficient information");
  s.D_breve = spd_sqrt(s.D2_breve, "efficient information");
  if (info.m() > 0) {
    Eigen::LLT<MatrixXd> H(info.H2);
    s.grad_breve = grad_theta - info.A * H.solve(grad_eta);
  } else {
    s.grad_breve = grad_theta;
  }
  s.xi_breve = s.D_breve.llt().solve(s.grad_breve);
  return s;
}

MatrixXd efficient_score_covariance(const BlockInformation& info, const BlockInformation& cov) {
  info.check_shapes();
  cov.check_shapes();
  if (cov.p() != info.p() || cov.m() != info.m())
    throw DimensionError("covariance blocks do not match the information blocks");
  if (info.m() == 0) return cov.D2;
  Eigen::LLT<MatrixXd> H(info.H2);
  MatrixXd T = H.solve(info.A.transpose()).transpose();  // A H^-2, p x m
  MatrixXd C = cov.D2 - T * cov.A.transpose() - cov.A * T.transpose() + T * cov.H2 * T.transpose();
  return 0.5 * (C + C.transpose());
}

MatrixXd standardized_covariance(const BlockInformation& info, const BlockInformation& cov) {
  MatrixXd Dinv = spd_inv_sqrt(info.full(), "full information");
  MatrixXd B = Dinv * cov.full() * Dinv;
  return 0.5 * (B + B.transpose());
}

}  // namespace altmax
