#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "bvi/recording.hpp"

namespace bvi {

enum class SynthCondition { ref, alt };

struct AirflowSpec {
  double breath_period_s = 4.0;
  double sniff_rate = 0.5;      // sniffs per breath in the alt condition
  double load_amplitude = 2.5;  // sniff peak relative to the base waveform
};

struct SynthSpec {
  int n_channels = 8;
  double sample_rate_hz = 250.0;
  double duration_s = 600.0;
  Eigen::MatrixXd mixing0;  // full rank, channels x sources
  Eigen::MatrixXd mixing1;
  double band_low_hz = 8.0;
  double band_high_hz = 24.0;
  std::vector<int> informative_channels;
  double snr = 10.0;  // source-to-noise power ratio
  // Per-block multiplicative gain exp(U(-j, j)), constant over gain_block_s.
  double gain_jitter = 0.0;
  double gain_block_s = 5.0;
  std::uint64_t seed = 0;
  std::optional<AirflowSpec> airflow;

  void validate() const;
};

// Named presets used by the CLI and the acceptance run. Mixing matrices are
// derived deterministically from the seed.
SynthSpec synth_separable(std::uint64_t seed);
// mixing1 = mixing0: ref and alt are identically distributed.
SynthSpec synth_null(std::uint64_t seed);
// Structural (rank-2 rotation) condition contrast plus per-epoch gain jitter
// in both conditions; stresses matrix structure rather than overall power.
SynthSpec synth_metric_stress(std::uint64_t seed);
// 14 channels of which exactly 6 differ between conditions.
SynthSpec synth_chorra14(std::uint64_t seed);

// Band-limited independent sources mixed through mixing0 (ref) or mixing1
// (alt), plus white noise at the configured SNR. Deterministic under seed.
Recording generate(const SynthSpec& spec, SynthCondition condition);

// Quasi-periodic single-channel breath waveform; the alt condition
// superposes sniff spikes.
Recording generate_airflow(const SynthSpec& spec, SynthCondition condition);

void save_synth_spec(const SynthSpec& spec, const std::string& path);
SynthSpec load_synth_spec(const std::string& path);

}  // namespace bvi
