#include "bvi/recording.hpp"

#include <cmath>

namespace bvi {

std::string to_string(Modality m) {
  return m == Modality::eeg ? "eeg" : "airflow";
}

std::string to_string(Condition c) {
  switch (c) {
    case Condition::SV: return "SV";
    case Condition::SN: return "SN";
    case Condition::LD: return "LD";
    default: return "unknown";
  }
}

Modality modality_from_string(const std::string& s) {
  if (s == "eeg") return Modality::eeg;
  if (s == "airflow") return Modality::airflow;
  throw ValidationError("unknown modality: " + s);
}

Condition condition_from_string(const std::string& s) {
  if (s == "SV") return Condition::SV;
  if (s == "SN") return Condition::SN;
  if (s == "LD") return Condition::LD;
  if (s == "unknown") return Condition::unknown;
  throw ValidationError("unknown condition: " + s);
}

void Recording::validate() const {
  if (sample_rate_hz <= 0.0)
    throw ValidationError("sample_rate_hz must be positive");
  if (sample_count() < 2)
    throw ValidationError("recording needs at least 2 samples per channel");
  if (static_cast<Eigen::Index>(channel_labels.size()) != channel_count())
    throw ValidationError("channel_labels length does not match channel count");
  if (!samples.allFinite())
    throw ValidationError("recording contains non-finite samples");
}

void EpochSet::validate() const {
  if (sample_rate_hz <= 0.0)
    throw ValidationError("sample_rate_hz must be positive");
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const Epoch& e = epochs[i];
    if (e.data.rows() != static_cast<Eigen::Index>(channel_labels.size()) ||
        e.data.cols() != window_samples)
      throw ValidationError("epoch " + std::to_string(i) +
                            " has inconsistent shape");
    if (!e.data.allFinite())
      throw ValidationError("epoch " + std::to_string(i) +
                            " contains non-finite values");
  }
}

void FilterSpec::validate(double rate_hz) const {
  if (low_cut_hz < 0.0 || low_cut_hz >= high_cut_hz ||
      high_cut_hz >= rate_hz / 2.0)
    throw ValidationError(
        "filter cutoffs must satisfy 0 <= low < high < Nyquist");
  if (order < 2 || order % 2 != 0)
    throw ValidationError("FIR order must be a positive even integer");
}

}  // namespace bvi
