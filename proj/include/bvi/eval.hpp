#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bvi/channel_select.hpp"
#include "bvi/recording.hpp"
#include "bvi/spd.hpp"

namespace bvi {

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr)
  double auc = 0.0;
  int n_pos = 0;
  int n_neg = 0;
};

// Threshold sweep with Mann-Whitney tie handling (ties step diagonally), so
// the trapezoidal AUC equals P(s1 > s0) + 1/2 P(s1 = s0).
RocCurve roc_auc(const std::vector<double>& scores0,
                 const std::vector<double>& scores1);

struct DetectorConfig {
  Metric metric = Metric::log_euclidean;
  int k = 3;
  int l = 25;
  double shrinkage = 0.01;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct FoldResult {
  std::vector<double> fold_aucs;
  double mean_auc = 0.0;
  double std_error = 0.0;
};

// V-fold cross validation over contiguous reference blocks: each fold trains
// on the first L matrices of its block and scores the reference matrices
// outside the block (class 0) plus all altered matrices (class 1). The
// learning block never appears in scoring.
FoldResult kfold_auc(const std::vector<Eigen::MatrixXd>& ref_raw,
                     const std::vector<Eigen::MatrixXd>& alt_raw,
                     const DetectorConfig& cfg, int v);

// Principal submatrix on a channel subset.
Eigen::MatrixXd submatrix(const Eigen::MatrixXd& cov,
                          const std::vector<int>& channels);

// As kfold_auc, restricted to a channel subset.
FoldResult kfold_auc_subset(const std::vector<Eigen::MatrixXd>& ref_raw,
                            const std::vector<Eigen::MatrixXd>& alt_raw,
                            const std::vector<int>& channels,
                            const DetectorConfig& cfg, int v);

struct SweepCell {
  std::vector<double> axes;
  std::vector<double> fold_aucs;
  double mean_auc = 0.0;
  double std_error = 0.0;
  bool valid = true;
};

struct SweepResult {
  std::vector<std::string> axis_names;
  std::vector<SweepCell> cells;
  int folds = 0;
};

struct PreprocessConfig {
  double low_cut_hz = 8.0;
  double high_cut_hz = 24.0;
  int fir_order = 0;  // 0 = default order for the band
  double downsample_to_hz = 0.0;  // 0 = keep rate
  double window_s = 5.0;
  double overlap_frac = 0.5;
  double amp_thresh = 0.0;  // 0 = no rejection
};

// Full chain: band-pass, optional decimation, windowing, optional amplitude
// rejection.
EpochSet preprocess(const Recording& rec, const PreprocessConfig& pp,
                    Condition condition);

// Raw covariances of every epoch.
std::vector<Eigen::MatrixXd> epoch_covariances(const EpochSet& es);

// Preprocess per band, then kfold_auc; axes = (low_hz, high_hz).
SweepResult sweep_band(const Recording& ref_rec, const Recording& alt_rec,
                       const std::vector<std::pair<double, double>>& bands,
                       const PreprocessConfig& pp, const DetectorConfig& cfg,
                       int v);

// Grid over K and L; cells with L < K are marked invalid.
SweepResult sweep_kl(const std::vector<Eigen::MatrixXd>& ref_raw,
                     const std::vector<Eigen::MatrixXd>& alt_raw,
                     const std::vector<int>& k_values,
                     const std::vector<int>& l_values,
                     const DetectorConfig& cfg, int v);

// AUC at each prefix of the ranking, from the full set down to 2 channels;
// axis = prefix size.
SweepResult electrode_curve(const std::vector<Eigen::MatrixXd>& ref_raw,
                            const std::vector<Eigen::MatrixXd>& alt_raw,
                            const RankedChannelList& ranking,
                            const DetectorConfig& cfg, int v);

void save_sweep(const SweepResult& sr, const std::string& path);

}  // namespace bvi
