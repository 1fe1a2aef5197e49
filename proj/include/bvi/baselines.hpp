#pragma once

#include <string>
#include <vector>

#include "bvi/recording.hpp"
#include "bvi/spd.hpp"

namespace bvi {

enum class FeatureKind { upper_tri_cov, airflow6, airflow3, csp_logvar };

struct FeatureVector {
  std::vector<double> values;
  FeatureKind kind = FeatureKind::upper_tri_cov;
};

// Row-major upper-triangular (with diagonal) flattening, length Nc(Nc+1)/2.
FeatureVector vectorize_cov(const SpdMatrix& p);

// exp(-||x1-x2||^2 / sigma). Note sigma divides the squared norm directly.
double gaussian_kernel(const FeatureVector& x1, const FeatureVector& x2,
                       double sigma);

// Median of squared pairwise Euclidean distances over all unordered pairs.
double median_sigma(const std::vector<FeatureVector>& train);

struct OcsvmModel {
  std::vector<FeatureVector> support_vectors;
  std::vector<double> alphas;  // aligned with support_vectors, sum to 1
  double rho = 0.0;
  double sigma = 1.0;
  double nu = 0.1;
};

// Solves the one-class dual: min 1/2 a'Ka s.t. 0 <= a_i <= 1/(nu n),
// sum a = 1, to KKT tolerance 1e-6.
OcsvmModel ocsvm_train(const std::vector<FeatureVector>& train, double nu,
                       double sigma);

// Anomaly score -f(x) = rho - sum_i alpha_i k(x_i, x); higher = more anomalous.
double ocsvm_score(const OcsvmModel& model, const FeatureVector& x);
double ocsvm_decision(const OcsvmModel& model, const FeatureVector& x);

// Six descriptors of a single-channel air-flow epoch: peak, mean, volume
// (trapezoidal integral), variance, skewness, kurtosis (non-excess).
FeatureVector airflow_features(const Epoch& epoch, double sample_rate_hz);

// {peak, variance, skewness} subset.
FeatureVector airflow3_select(const FeatureVector& airflow6);

struct LdaModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
};

struct CspModel {
  Eigen::MatrixXd w;  // spatial filters in columns, eigenvalues descending
  Eigen::MatrixXd a;  // patterns, A = (W^-1)^T
  Eigen::VectorXd eigenvalues;
  std::vector<int> selected_filters;  // 2 from each end of the spectrum
  LdaModel lda;
};

// Simultaneous diagonalization of the two class-mean covariances via the
// generalized eigenproblem  Mean0 w = lambda (Mean0 + Mean1) w.
CspModel csp_fit(const std::vector<SpdMatrix>& class0,
                 const std::vector<SpdMatrix>& class1);

// Log-variance of the epoch projected on each selected filter.
FeatureVector csp_features(const CspModel& model, const Epoch& epoch);

LdaModel lda_fit(const std::vector<FeatureVector>& f0,
                 const std::vector<FeatureVector>& f1);
double lda_score(const LdaModel& model, const FeatureVector& x);

void save_ocsvm(const OcsvmModel& model, const std::string& path);
OcsvmModel load_ocsvm(const std::string& path);
void save_csp(const CspModel& model, const std::string& path);
CspModel load_csp(const std::string& path);

}  // namespace bvi
