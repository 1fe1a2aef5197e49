#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bvi/recording.hpp"

namespace bvi {

// Windowed-sinc (Hamming) band-pass taps, length spec.order + 1.
// The impulse response is symmetric (linear phase).
std::vector<double> design_fir(const FilterSpec& spec, double sample_rate_hz);

// Default order: 4 * (rate / low_cut), rounded up to even.
int default_fir_order(double sample_rate_hz, double low_cut_hz);

// Magnitude response of a tap set at frequency f_hz.
double fir_magnitude_at(const std::vector<double>& taps, double f_hz,
                        double sample_rate_hz);

// Zero-phase band-pass: linear-phase FIR applied with the group delay
// compensated by a symmetric shift. The first and last order/2 samples see
// zero-padded input.
Recording bandpass_filter(const Recording& rec, const FilterSpec& spec);

// Integer-factor decimation. The caller is responsible for prior low-pass
// filtering below the target Nyquist.
Recording downsample(const Recording& rec, double target_hz);

// Sliding-window segmentation. Window length N_t = round(window_s * rate),
// hop = round(N_t * (1 - overlap_frac)); trailing partial window discarded.
EpochSet epoch_windows(const Recording& rec, double window_s,
                       double overlap_frac, Condition condition);

struct RejectionReport {
  EpochSet kept;
  std::vector<std::size_t> rejected_indices;
};

// Drop epochs containing any |sample| > amp_thresh.
RejectionReport reject_artifacts(const EpochSet& es, double amp_thresh);

Recording load_recording(const std::string& path);
Recording read_recording(std::istream& in);
void save_recording(const Recording& rec, const std::string& path);
void write_recording(const Recording& rec, std::ostream& out);

EpochSet load_epochs(const std::string& path);
void save_epochs(const EpochSet& es, const std::string& path);

}  // namespace bvi
