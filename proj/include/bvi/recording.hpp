#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bvi/errors.hpp"

namespace bvi {

enum class Modality { eeg, airflow };

enum class Condition { SV, SN, LD, unknown };

std::string to_string(Modality m);
std::string to_string(Condition c);
Modality modality_from_string(const std::string& s);
Condition condition_from_string(const std::string& s);

// A continuous multichannel recording, channels in rows.
struct Recording {
  Eigen::MatrixXd samples;  // channels x time
  double sample_rate_hz = 0.0;
  std::vector<std::string> channel_labels;
  Modality modality = Modality::eeg;

  Eigen::Index channel_count() const { return samples.rows(); }
  Eigen::Index sample_count() const { return samples.cols(); }
  double duration_s() const {
    return static_cast<double>(sample_count()) / sample_rate_hz;
  }

  // Throws ValidationError on violated invariants.
  void validate() const;
};

// One windowed segment, channels x samples.
struct Epoch {
  Eigen::MatrixXd data;
  Condition condition = Condition::unknown;
  double start_time_s = 0.0;
};

struct EpochSet {
  std::vector<Epoch> epochs;
  double sample_rate_hz = 0.0;
  std::vector<std::string> channel_labels;
  Modality modality = Modality::eeg;
  Eigen::Index window_samples = 0;
  double overlap_frac = 0.0;

  std::size_t size() const { return epochs.size(); }
  void validate() const;
};

struct FilterSpec {
  double low_cut_hz = 0.0;
  double high_cut_hz = 0.0;
  int order = 0;  // even; filter length = order + 1

  void validate(double sample_rate_hz) const;
};

}  // namespace bvi
