#include "bvi/spd.hpp"

#include <cmath>

namespace bvi {

std::string to_string(Metric m) {
  switch (m) {
    case Metric::euclidean: return "euclidean";
    case Metric::affine_invariant: return "affine-invariant";
    default: return "log-euclidean";
  }
}

Metric metric_from_string(const std::string& s) {
  if (s == "euclidean") return Metric::euclidean;
  if (s == "affine-invariant" || s == "affine_invariant" || s == "riemannian")
    return Metric::affine_invariant;
  if (s == "log-euclidean" || s == "log_euclidean")
    return Metric::log_euclidean;
  throw ValidationError("unknown metric: " + s);
}

namespace {

// Eigendecomposition with f applied to the eigenvalues.
Eigen::MatrixXd eig_apply(const Eigen::MatrixXd& sym,
                          double (*f)(double)) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  Eigen::VectorXd d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = f(d(i));
  Eigen::MatrixXd out =
      es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace

SpdMatrix::SpdMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() != values_.cols() || values_.rows() < 1)
    throw ValidationError("SPD matrix must be square and non-empty");
  if (!values_.allFinite())
    throw ValidationError("SPD matrix contains non-finite values");
  const double scale = values_.cwiseAbs().maxCoeff();
  const double asym = (values_ - values_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(scale, 1e-300))
    throw ValidationError("matrix is not symmetric");
  values_ = 0.5 * (values_ + values_.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(values_);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (lmin <= 1e-12 * std::max(lmax, 0.0))
    throw ValidationError(
        "matrix is not positive-definite (min eigenvalue " +
        std::to_string(lmin) + "); apply shrinkage to regularize");
}

Eigen::MatrixXd SpdMatrix::sqrt() const {
  return eig_apply(values_, [](double x) { return std::sqrt(x); });
}

Eigen::MatrixXd SpdMatrix::inv_sqrt() const {
  return eig_apply(values_, [](double x) { return 1.0 / std::sqrt(x); });
}

Eigen::MatrixXd SpdMatrix::log() const {
  return eig_apply(values_, [](double x) { return std::log(x); });
}

Eigen::MatrixXd SpdMatrix::inverse() const {
  return eig_apply(values_, [](double x) { return 1.0 / x; });
}

Eigen::MatrixXd sym_expm(const Eigen::MatrixXd& s) {
  return eig_apply(0.5 * (s + s.transpose()),
                   [](double x) { return std::exp(x); });
}

Eigen::MatrixXd raw_covariance(const Epoch& epoch) {
  const Eigen::Index nt = epoch.data.cols();
  if (nt < 2) throw ValidationError("epoch needs at least 2 samples");
  if (!epoch.data.allFinite())
    throw ValidationError("epoch contains non-finite values");
  Eigen::MatrixXd p =
      (epoch.data * epoch.data.transpose()) / static_cast<double>(nt - 1);
  return 0.5 * (p + p.transpose());
}

SpdMatrix shrink(const Eigen::MatrixXd& cov, double shrinkage) {
  if (shrinkage < 0.0 || shrinkage > 1.0)
    throw ValidationError("shrinkage must be in [0, 1]");
  const Eigen::Index nc = cov.rows();
  const double target = cov.trace() / static_cast<double>(nc);
  Eigen::MatrixXd shrunk =
      (1.0 - shrinkage) * cov +
      shrinkage * target * Eigen::MatrixXd::Identity(nc, nc);
  try {
    return SpdMatrix(std::move(shrunk));
  } catch (const ValidationError&) {
    throw ValidationError(
        "covariance is singular; increase shrinkage above 0");
  }
}

SpdMatrix sample_covariance(const Epoch& epoch, double shrinkage) {
  return shrink(raw_covariance(epoch), shrinkage);
}

double default_shrinkage(Eigen::Index n_samples, Eigen::Index n_channels) {
  return n_samples >= 10 * n_channels ? 0.01 : 0.1;
}

double distance(const SpdMatrix& p1, const SpdMatrix& p2, Metric m) {
  if (p1.dim() != p2.dim())
    throw ValidationError("distance: dimension mismatch");
  switch (m) {
    case Metric::euclidean:
      return (p1.values() - p2.values()).norm();
    case Metric::log_euclidean:
      return (p1.log() - p2.log()).norm();
    case Metric::affine_invariant: {
      // ||logm(P2^-1/2 P1 P2^-1/2)||_F via the generalized eigenvalues of
      // (P1, P2).
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(
          p1.values(), p2.values(), Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < ges.eigenvalues().size(); ++i) {
        const double l = std::log(ges.eigenvalues()(i));
        acc += l * l;
      }
      return std::sqrt(acc);
    }
  }
  throw ValidationError("unknown metric");
}

TangentVector log_map(const SpdMatrix& q, const SpdMatrix& p) {
  if (q.dim() != p.dim()) throw ValidationError("log_map: dimension mismatch");
  const Eigen::MatrixXd qs = q.sqrt();
  const Eigen::MatrixXd qis = q.inv_sqrt();
  Eigen::MatrixXd inner = qis * p.values() * qis;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::MatrixXd s =
      qs * eig_apply(inner, [](double x) { return std::log(x); }) * qs;
  return TangentVector{0.5 * (s + s.transpose()), q};
}

SpdMatrix exp_map(const SpdMatrix& q, const TangentVector& s) {
  const double base_diff =
      (s.base_point.values() - q.values()).norm();
  if (base_diff > 1e-9 * std::max(1.0, q.values().norm()))
    throw ValidationError("exp_map: tangent vector has a different base point");
  const Eigen::MatrixXd qs = q.sqrt();
  const Eigen::MatrixXd qis = q.inv_sqrt();
  Eigen::MatrixXd inner = qis * s.values * qis;
  Eigen::MatrixXd p = qs * sym_expm(inner) * qs;
  return SpdMatrix(0.5 * (p + p.transpose()));
}

MeanResult mean(const std::vector<SpdMatrix>& set, Metric m, double tol,
                int max_iter) {
  if (set.empty()) throw ValidationError("mean of an empty set");
  const Eigen::Index dim = set.front().dim();
  for (const SpdMatrix& p : set)
    if (p.dim() != dim) throw ValidationError("mean: dimension mismatch");
  const double n = static_cast<double>(set.size());

  if (m == Metric::euclidean) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim, dim);
    for (const SpdMatrix& p : set) acc += p.values();
    return MeanResult{SpdMatrix(acc / n), 0, 0.0};
  }
  if (m == Metric::log_euclidean) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim, dim);
    for (const SpdMatrix& p : set) acc += p.log();
    return MeanResult{SpdMatrix(sym_expm(acc / n)), 0, 0.0};
  }

  // Karcher mean: fixed-point iteration from the arithmetic mean,
  // convergence on the Frobenius norm of the summed tangent residual.
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim, dim);
  for (const SpdMatrix& p : set) acc += p.values();
  SpdMatrix current(acc / n);
  double grad_norm = 0.0;
  for (int iter = 1; iter <= max_iter; ++iter) {
    Eigen::MatrixXd tangent_sum = Eigen::MatrixXd::Zero(dim, dim);
    for (const SpdMatrix& p : set)
      tangent_sum += log_map(current, p).values;
    grad_norm = tangent_sum.norm();
    if (grad_norm <= tol) return MeanResult{current, iter, grad_norm};
    current = exp_map(current, TangentVector{tangent_sum / n, current});
  }
  throw MeanNonConvergence(max_iter, grad_norm, current);
}

}  // namespace bvi
