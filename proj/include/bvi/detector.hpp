#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bvi/clustering.hpp"
#include "bvi/recording.hpp"
#include "bvi/spd.hpp"

namespace bvi {

struct TrainingMeta {
  double shrinkage = 0.01;
  double band_low_hz = 8.0;
  double band_high_hz = 24.0;
  double window_s = 5.0;
  std::vector<int> channel_subset;  // empty = all channels
};

struct DetectorModel {
  PrototypeSet prototypes;
  std::optional<double> kappa;  // set by calibrate_kappa
  Metric metric = Metric::log_euclidean;
  int training_count = 0;  // L
  TrainingMeta meta;
};

struct ScoreEntry {
  std::size_t epoch_index = 0;
  double delta = 0.0;
  Condition label = Condition::unknown;
};

using ScoreSeries = std::vector<ScoreEntry>;

// One-class training on L reference covariance matrices; kappa stays unset.
DetectorModel train(const std::vector<SpdMatrix>& reference, int k, Metric m,
                    std::uint64_t seed, const TrainingMeta& meta = {});

// Per-epoch distance to the closest prototype.
ScoreSeries score(const DetectorModel& model, const EpochSet& epochs);
double score_one(const DetectorModel& model, const SpdMatrix& p);

// 0 if delta <= kappa, 1 otherwise.
std::vector<int> classify(const DetectorModel& model, const ScoreSeries& s);

// kappa = empirical quantile (linear interpolation between order statistics)
// of held-out reference deltas at target_specificity.
DetectorModel calibrate_kappa(const DetectorModel& model,
                              const ScoreSeries& held_out_reference,
                              double target_specificity);

void save_model(const DetectorModel& model, const std::string& path);
DetectorModel load_model(const std::string& path);

}  // namespace bvi
