#include "bvi/synth.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "bvi/signal_io.hpp"

namespace bvi {

void SynthSpec::validate() const {
  if (n_channels < 1) throw ValidationError("n_channels must be >= 1");
  if (sample_rate_hz <= 0.0) throw ValidationError("sample rate must be > 0");
  if (duration_s <= 0.0) throw ValidationError("duration must be > 0");
  if (band_low_hz < 0.0 || band_low_hz >= band_high_hz ||
      band_high_hz >= sample_rate_hz / 2.0)
    throw ValidationError("band must satisfy 0 <= low < high < Nyquist");
  for (const Eigen::MatrixXd* m : {&mixing0, &mixing1}) {
    if (m->rows() != n_channels || m->cols() != n_channels)
      throw ValidationError("mixing matrices must be n_channels square");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(*m);
    if (lu.rank() < n_channels)
      throw ValidationError("mixing matrix is rank-deficient");
  }
  for (int c : informative_channels)
    if (c < 0 || c >= n_channels)
      throw ValidationError("informative channel index out of range");
}

namespace {

std::uint64_t stream_seed(std::uint64_t seed, SynthCondition condition,
                          std::uint64_t salt) {
  std::uint64_t x = seed + salt;
  if (condition == SynthCondition::alt) x ^= 0x9E3779B97F4A7C15ULL;
  return x;
}

Eigen::MatrixXd random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd g(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) g(r, c) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Fix signs so the factorization is unique.
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < n; ++c)
    if (r(c, c) < 0.0) q.col(c) = -q.col(c);
  return q;
}

// Rotation by theta in the plane of coordinates (i, j).
Eigen::MatrixXd plane_rotation(int n, int i, int j, double theta) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n);
  r(i, i) = std::cos(theta);
  r(j, j) = std::cos(theta);
  r(i, j) = -std::sin(theta);
  r(j, i) = std::sin(theta);
  return r;
}

}  // namespace

SynthSpec synth_separable(std::uint64_t seed) {
  SynthSpec spec;
  spec.n_channels = 8;
  spec.sample_rate_hz = 250.0;
  spec.duration_s = 660.0;  // 262 epochs at 5 s / 50%: enough for V=10, L=25
  spec.band_low_hz = 8.0;
  spec.band_high_hz = 24.0;
  spec.snr = 10.0;
  spec.seed = seed;
  spec.informative_channels.resize(spec.n_channels);
  for (int i = 0; i < spec.n_channels; ++i) spec.informative_channels[i] = i;

  std::mt19937_64 rng(seed ^ 0xA5A5A5A5A5A5A5A5ULL);
  spec.mixing0 = random_orthogonal(spec.n_channels, rng);
  Eigen::VectorXd scales(spec.n_channels);
  for (int i = 0; i < spec.n_channels; ++i)
    scales(i) = i < spec.n_channels / 2 ? 2.0 : 0.5;  // condition number 4
  spec.mixing1 = spec.mixing0 *
                 plane_rotation(spec.n_channels, 0, 1, M_PI / 4.0) *
                 scales.asDiagonal();
  spec.airflow = AirflowSpec{};
  return spec;
}

SynthSpec synth_null(std::uint64_t seed) {
  SynthSpec spec = synth_separable(seed);
  spec.mixing1 = spec.mixing0;
  return spec;
}

SynthSpec synth_metric_stress(std::uint64_t seed) {
  SynthSpec spec = synth_separable(seed);
  // Ill-conditioned mixing plus common gain jitter: the condition contrast is
  // structural (a rotation ahead of the scaling), while overall power varies
  // within each condition.
  const int n = spec.n_channels;
  std::mt19937_64 rng(seed ^ 0x5C5C5C5C5C5C5C5CULL);
  const Eigen::MatrixXd q = random_orthogonal(n, rng);
  Eigen::VectorXd scales(n);
  for (int i = 0; i < n; ++i)
    scales(i) = std::pow(10.0, -1.5 * i / (n - 1.0));  // 1 down to ~0.03
  spec.mixing0 = q * scales.asDiagonal();
  spec.mixing1 = q * plane_rotation(n, 0, n - 1, M_PI / 3.0) *
                 scales.asDiagonal();
  spec.gain_jitter = std::log(2.0);  // per-block gains in [0.5, 2]
  spec.gain_block_s = 5.0;
  spec.snr = 30.0;
  return spec;
}

SynthSpec synth_chorra14(std::uint64_t seed) {
  SynthSpec spec;
  spec.n_channels = 14;
  spec.sample_rate_hz = 250.0;
  spec.duration_s = 660.0;
  spec.band_low_hz = 8.0;
  spec.band_high_hz = 24.0;
  spec.snr = 10.0;
  spec.seed = seed;
  spec.informative_channels = {1, 3, 5, 7, 9, 11};

  std::mt19937_64 rng(seed ^ 0xC3C3C3C3C3C3C3C3ULL);
  spec.mixing0 = random_orthogonal(spec.n_channels, rng);
  spec.mixing1 = spec.mixing0;
  // Equal-strength gain contrast on the informative rows only. The factor
  // keeps the full-montage AUC clearly away from both 0.5 and 1, so channel
  // rankings have usable margins.
  for (int c : spec.informative_channels) spec.mixing1.row(c) *= 1.28;
  return spec;
}

Recording generate(const SynthSpec& spec, SynthCondition condition) {
  spec.validate();
  const Eigen::Index t_count =
      std::lround(spec.duration_s * spec.sample_rate_hz);
  const int n = spec.n_channels;
  std::mt19937_64 rng(stream_seed(spec.seed, condition, 0));
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Band-limited unit-variance sources.
  Recording sources;
  sources.sample_rate_hz = spec.sample_rate_hz;
  sources.modality = Modality::eeg;
  sources.samples.resize(n, t_count);
  for (int s = 0; s < n; ++s)
    for (Eigen::Index t = 0; t < t_count; ++t)
      sources.samples(s, t) = gauss(rng);
  sources.channel_labels.assign(n, "src");
  FilterSpec band;
  band.low_cut_hz = spec.band_low_hz;
  band.high_cut_hz = spec.band_high_hz;
  band.order = default_fir_order(spec.sample_rate_hz, std::max(spec.band_low_hz, 1.0));
  sources = bandpass_filter(sources, band);
  for (int s = 0; s < n; ++s) {
    const double rms = std::sqrt(sources.samples.row(s).squaredNorm() /
                                 static_cast<double>(t_count));
    sources.samples.row(s) /= rms;
  }

  const Eigen::MatrixXd& mixing =
      condition == SynthCondition::ref ? spec.mixing0 : spec.mixing1;
  Recording rec;
  rec.sample_rate_hz = spec.sample_rate_hz;
  rec.modality = Modality::eeg;
  rec.samples = mixing * sources.samples;
  rec.channel_labels.resize(n);
  for (int c = 0; c < n; ++c)
    rec.channel_labels[c] = "ch" + std::to_string(c);

  if (spec.snr > 0.0) {
    const double noise_std = std::sqrt(1.0 / spec.snr);
    for (int c = 0; c < n; ++c)
      for (Eigen::Index t = 0; t < t_count; ++t)
        rec.samples(c, t) += noise_std * gauss(rng);
  }

  if (spec.gain_jitter > 0.0) {
    std::uniform_real_distribution<double> uni(-spec.gain_jitter,
                                               spec.gain_jitter);
    const Eigen::Index block =
        std::max<Eigen::Index>(1, std::lround(spec.gain_block_s *
                                              spec.sample_rate_hz));
    for (Eigen::Index start = 0; start < t_count; start += block) {
      const double gain = std::exp(uni(rng));
      const Eigen::Index len = std::min(block, t_count - start);
      rec.samples.middleCols(start, len) *= gain;
    }
  }
  return rec;
}

Recording generate_airflow(const SynthSpec& spec, SynthCondition condition) {
  spec.validate();
  const AirflowSpec air = spec.airflow.value_or(AirflowSpec{});
  const Eigen::Index t_count =
      std::lround(spec.duration_s * spec.sample_rate_hz);
  std::mt19937_64 rng(stream_seed(spec.seed, condition, 0xF00DULL));
  std::normal_distribution<double> gauss(0.0, 1.0);

  Recording rec;
  rec.sample_rate_hz = spec.sample_rate_hz;
  rec.modality = Modality::airflow;
  rec.channel_labels = {"flow"};
  rec.samples.resize(1, t_count);
  const double period = air.breath_period_s;
  for (Eigen::Index t = 0; t < t_count; ++t) {
    const double time = static_cast<double>(t) / spec.sample_rate_hz;
    double flow = std::sin(2.0 * M_PI * time / period);
    flow += 0.02 * gauss(rng);
    rec.samples(0, t) = flow;
  }

  if (condition == SynthCondition::alt && air.sniff_rate > 0.0) {
    // A sharp inspiratory spike on every (1/sniff_rate)-th breath, centered
    // on the inspiration peak.
    const int every = std::max(1, static_cast<int>(std::lround(1.0 / air.sniff_rate)));
    const double width = period / 20.0;
    const int n_breaths = static_cast<int>(spec.duration_s / period);
    for (int b = 0; b < n_breaths; b += every) {
      const double center = (b + 0.25) * period;  // inspiration peak of sin
      const Eigen::Index lo = std::max<Eigen::Index>(
          0, std::lround((center - 4 * width) * spec.sample_rate_hz));
      const Eigen::Index hi = std::min<Eigen::Index>(
          t_count, std::lround((center + 4 * width) * spec.sample_rate_hz));
      for (Eigen::Index t = lo; t < hi; ++t) {
        const double time = static_cast<double>(t) / spec.sample_rate_hz;
        const double z = (time - center) / width;
        rec.samples(0, t) += air.load_amplitude * std::exp(-0.5 * z * z);
      }
    }
  }
  return rec;
}

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const std::size_t rows = j.size();
  const std::size_t cols = j.at(0).size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c);
  return m;
}

}  // namespace

void save_synth_spec(const SynthSpec& spec, const std::string& path) {
  json j;
  j["type"] = "synth_spec";
  j["n_channels"] = spec.n_channels;
  j["sample_rate_hz"] = spec.sample_rate_hz;
  j["duration_s"] = spec.duration_s;
  j["mixing0"] = matrix_to_json(spec.mixing0);
  j["mixing1"] = matrix_to_json(spec.mixing1);
  j["band_low_hz"] = spec.band_low_hz;
  j["band_high_hz"] = spec.band_high_hz;
  j["informative_channels"] = spec.informative_channels;
  j["snr"] = spec.snr;
  j["gain_jitter"] = spec.gain_jitter;
  j["gain_block_s"] = spec.gain_block_s;
  j["seed"] = spec.seed;
  if (spec.airflow) {
    j["airflow"] = {{"breath_period_s", spec.airflow->breath_period_s},
                    {"sniff_rate", spec.airflow->sniff_rate},
                    {"load_amplitude", spec.airflow->load_amplitude}};
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

SynthSpec load_synth_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("synth spec: ") + e.what(), 0);
  }
  if (j.value("type", "") != "synth_spec")
    throw ValidationError("file is not a synth spec");
  SynthSpec spec;
  spec.n_channels = j.at("n_channels").get<int>();
  spec.sample_rate_hz = j.at("sample_rate_hz").get<double>();
  spec.duration_s = j.at("duration_s").get<double>();
  spec.mixing0 = matrix_from_json(j.at("mixing0"));
  spec.mixing1 = matrix_from_json(j.at("mixing1"));
  spec.band_low_hz = j.at("band_low_hz").get<double>();
  spec.band_high_hz = j.at("band_high_hz").get<double>();
  spec.informative_channels =
      j.value("informative_channels", std::vector<int>{});
  spec.snr = j.at("snr").get<double>();
  spec.gain_jitter = j.value("gain_jitter", 0.0);
  spec.gain_block_s = j.value("gain_block_s", 5.0);
  spec.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("airflow")) {
    AirflowSpec air;
    air.breath_period_s = j["airflow"].value("breath_period_s", 4.0);
    air.sniff_rate = j["airflow"].value("sniff_rate", 0.5);
    air.load_amplitude = j["airflow"].value("load_amplitude", 2.5);
    spec.airflow = air;
  }
  spec.validate();
  return spec;
}

}  // namespace bvi
