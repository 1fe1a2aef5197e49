#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bvi/errors.hpp"
#include "bvi/recording.hpp"

namespace bvi {

enum class Metric { euclidean, affine_invariant, log_euclidean };

std::string to_string(Metric m);
Metric metric_from_string(const std::string& s);

// Symmetric positive-definite matrix. Symmetry and positive-definiteness are
// checked at construction; eigenvalues below 1e-12 * lambda_max are rejected
// rather than clamped (use shrinkage to regularize).
class SpdMatrix {
 public:
  explicit SpdMatrix(Eigen::MatrixXd values);

  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::Index dim() const { return values_.rows(); }

  Eigen::MatrixXd sqrt() const;
  Eigen::MatrixXd inv_sqrt() const;
  Eigen::MatrixXd log() const;
  Eigen::MatrixXd inverse() const;

  bool operator==(const SpdMatrix& other) const {
    return values_ == other.values_;
  }

 private:
  Eigen::MatrixXd values_;
};

struct TangentVector {
  Eigen::MatrixXd values;  // symmetric
  SpdMatrix base_point;
};

// expm of a symmetric matrix via eigendecomposition.
Eigen::MatrixXd sym_expm(const Eigen::MatrixXd& s);

// Unbiased (uncentered) channel covariance of an epoch, then shrunk towards
// the scaled identity: (1-gamma) P + gamma (tr P / N_c) I.
SpdMatrix sample_covariance(const Epoch& epoch, double shrinkage);

// Raw covariance without the SPD check, for pipelines that shrink later
// (e.g. after channel-subset extraction).
Eigen::MatrixXd raw_covariance(const Epoch& epoch);
SpdMatrix shrink(const Eigen::MatrixXd& cov, double shrinkage);

// gamma = 0.01 when N_t >= 10 N_c, else 0.1.
double default_shrinkage(Eigen::Index n_samples, Eigen::Index n_channels);

double distance(const SpdMatrix& p1, const SpdMatrix& p2, Metric m);

TangentVector log_map(const SpdMatrix& q, const SpdMatrix& p);
SpdMatrix exp_map(const SpdMatrix& q, const TangentVector& s);

// Karcher iteration ran out of iterations; carries the last iterate.
class MeanNonConvergence : public ConvergenceError {
 public:
  MeanNonConvergence(int iterations, double residual, SpdMatrix last_iterate)
      : ConvergenceError("Karcher mean did not converge", iterations, residual),
        last_iterate_(std::move(last_iterate)) {}
  const SpdMatrix& last_iterate() const { return last_iterate_; }

 private:
  SpdMatrix last_iterate_;
};

struct MeanResult {
  SpdMatrix mean;
  int iterations = 0;
  double final_grad_norm = 0.0;
};

// Arithmetic mean, log-Euclidean mean, or the affine-invariant Karcher mean
// by fixed-point iteration (convergence on the Frobenius norm of the summed
// tangent residual). Throws ConvergenceError after max_iter.
MeanResult mean(const std::vector<SpdMatrix>& set, Metric m,
                double tol = 1e-8, int max_iter = 100);

}  // namespace bvi
