#include "bvi/signal_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "bvi/io_util.hpp"

namespace bvi {

namespace {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(M_PI * x) / (M_PI * x);
}

}  // namespace

int default_fir_order(double sample_rate_hz, double low_cut_hz) {
  if (low_cut_hz <= 0.0)
    throw ValidationError("default FIR order needs low_cut_hz > 0");
  int order = static_cast<int>(std::ceil(4.0 * sample_rate_hz / low_cut_hz));
  if (order % 2 != 0) ++order;
  return order;
}

std::vector<double> design_fir(const FilterSpec& spec, double sample_rate_hz) {
  spec.validate(sample_rate_hz);
  const int m = spec.order;
  const double fl = spec.low_cut_hz / sample_rate_hz;
  const double fh = spec.high_cut_hz / sample_rate_hz;
  std::vector<double> taps(m + 1);
  for (int n = 0; n <= m; ++n) {
    const double t = n - m / 2.0;
    const double ideal = 2.0 * fh * sinc(2.0 * fh * t) -
                         2.0 * fl * sinc(2.0 * fl * t);
    const double hamming = 0.54 - 0.46 * std::cos(2.0 * M_PI * n / m);
    taps[n] = ideal * hamming;
  }
  // Unit gain at the band center.
  const double fc = 0.5 * (spec.low_cut_hz + spec.high_cut_hz);
  const double g = fir_magnitude_at(taps, fc, sample_rate_hz);
  for (double& t : taps) t /= g;
  return taps;
}

double fir_magnitude_at(const std::vector<double>& taps, double f_hz,
                        double sample_rate_hz) {
  const double w = 2.0 * M_PI * f_hz / sample_rate_hz;
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < taps.size(); ++k) {
    re += taps[k] * std::cos(w * static_cast<double>(k));
    im -= taps[k] * std::sin(w * static_cast<double>(k));
  }
  return std::hypot(re, im);
}

Recording bandpass_filter(const Recording& rec, const FilterSpec& spec) {
  rec.validate();
  const std::vector<double> taps = design_fir(spec, rec.sample_rate_hz);
  const int m = spec.order;
  const int half = m / 2;
  const Eigen::Index nt = rec.sample_count();

  Recording out = rec;
  out.samples.setZero();
  for (Eigen::Index c = 0; c < rec.channel_count(); ++c) {
    for (Eigen::Index t = 0; t < nt; ++t) {
      double acc = 0.0;
      // Group delay compensated: tap k reads x[t + half - k].
      for (int k = 0; k <= m; ++k) {
        const Eigen::Index idx = t + half - k;
        if (idx >= 0 && idx < nt) acc += taps[k] * rec.samples(c, idx);
      }
      out.samples(c, t) = acc;
    }
  }
  return out;
}

Recording downsample(const Recording& rec, double target_hz) {
  rec.validate();
  if (target_hz <= 0.0) throw ValidationError("target rate must be positive");
  const double ratio = rec.sample_rate_hz / target_hz;
  const long factor = std::lround(ratio);
  if (factor < 1 || std::abs(ratio - factor) > 1e-9)
    throw ValidationError("sample rate " + format_g(rec.sample_rate_hz) +
                          " is not an integer multiple of target " +
                          format_g(target_hz));
  if (factor == 1) return rec;

  const Eigen::Index n_out = (rec.sample_count() - 1) / factor + 1;
  Recording out = rec;
  out.sample_rate_hz = target_hz;
  out.samples.resize(rec.channel_count(), n_out);
  for (Eigen::Index i = 0; i < n_out; ++i)
    out.samples.col(i) = rec.samples.col(i * factor);
  return out;
}

EpochSet epoch_windows(const Recording& rec, double window_s,
                       double overlap_frac, Condition condition) {
  rec.validate();
  if (overlap_frac < 0.0 || overlap_frac >= 1.0)
    throw ValidationError("overlap_frac must be in [0, 1)");
  const Eigen::Index nt = std::lround(window_s * rec.sample_rate_hz);
  if (nt < 2) throw ValidationError("window shorter than 2 samples");
  const Eigen::Index hop =
      std::max<Eigen::Index>(1, std::lround(nt * (1.0 - overlap_frac)));
  if (rec.sample_count() < nt)
    throw ValidationError("recording shorter than one window");

  EpochSet es;
  es.sample_rate_hz = rec.sample_rate_hz;
  es.channel_labels = rec.channel_labels;
  es.modality = rec.modality;
  es.window_samples = nt;
  es.overlap_frac = overlap_frac;
  const Eigen::Index count = (rec.sample_count() - nt) / hop + 1;
  es.epochs.reserve(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    Epoch e;
    e.data = rec.samples.middleCols(i * hop, nt);
    e.condition = condition;
    e.start_time_s = static_cast<double>(i * hop) / rec.sample_rate_hz;
    es.epochs.push_back(std::move(e));
  }
  return es;
}

RejectionReport reject_artifacts(const EpochSet& es, double amp_thresh) {
  if (amp_thresh <= 0.0) throw ValidationError("amp_thresh must be positive");
  RejectionReport report;
  report.kept = es;
  report.kept.epochs.clear();
  for (std::size_t i = 0; i < es.epochs.size(); ++i) {
    if (es.epochs[i].data.cwiseAbs().maxCoeff() > amp_thresh)
      report.rejected_indices.push_back(i);
    else
      report.kept.epochs.push_back(es.epochs[i]);
  }
  return report;
}

namespace {

void write_header(const Recording& meta, std::ostream& out,
                  const EpochSet* es) {
  out << "# rate_hz=" << format_g(meta.sample_rate_hz) << " channels=";
  for (std::size_t i = 0; i < meta.channel_labels.size(); ++i) {
    if (i) out << ',';
    out << meta.channel_labels[i];
  }
  out << " modality=" << to_string(meta.modality);
  if (es)
    out << " window_samples=" << es->window_samples
        << " overlap=" << format_g(es->overlap_frac);
  out << '\n';
}

void write_samples(const Eigen::MatrixXd& samples, std::ostream& out) {
  for (Eigen::Index t = 0; t < samples.cols(); ++t) {
    for (Eigen::Index c = 0; c < samples.rows(); ++c) {
      if (c) out << ',';
      out << format_g(samples(c, t));
    }
    out << '\n';
  }
}

struct HeaderFields {
  double rate_hz = 0.0;
  std::vector<std::string> labels;
  Modality modality = Modality::eeg;
  Eigen::Index window_samples = 0;
  double overlap = 0.0;
  bool has_window = false;
};

HeaderFields read_header(const std::string& line, long line_no) {
  HeaderFields h;
  bool have_rate = false, have_channels = false;
  for (const auto& [key, value] : parse_header(line, line_no)) {
    if (key == "rate_hz") {
      h.rate_hz = parse_double(value, line_no);
      have_rate = true;
    } else if (key == "channels") {
      h.labels = split(value, ',');
      have_channels = true;
    } else if (key == "modality") {
      try {
        h.modality = modality_from_string(value);
      } catch (const ValidationError& e) {
        throw ParseError(e.what(), line_no);
      }
    } else if (key == "window_samples") {
      h.window_samples = parse_long(value, line_no);
      h.has_window = true;
    } else if (key == "overlap") {
      h.overlap = parse_double(value, line_no);
    } else {
      throw ParseError("unknown header field '" + key + "'", line_no);
    }
  }
  if (!have_rate || !have_channels)
    throw ParseError("header missing rate_hz or channels", line_no);
  if (h.rate_hz <= 0.0) throw ParseError("rate_hz must be positive", line_no);
  return h;
}

Eigen::VectorXd parse_row(const std::string& line, std::size_t n_channels,
                          long line_no) {
  const std::vector<std::string> cells = split(line, ',');
  if (cells.size() != n_channels)
    throw ParseError("row has " + std::to_string(cells.size()) +
                         " values, header declares " +
                         std::to_string(n_channels) + " channels",
                     line_no);
  Eigen::VectorXd row(n_channels);
  for (std::size_t c = 0; c < n_channels; ++c) {
    row(c) = parse_double(cells[c], line_no);
    if (!std::isfinite(row(c)))
      throw ParseError("non-finite value", line_no);
  }
  return row;
}

}  // namespace

void write_recording(const Recording& rec, std::ostream& out) {
  rec.validate();
  write_header(rec, out, nullptr);
  write_samples(rec.samples, out);
}

void save_recording(const Recording& rec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  write_recording(rec, out);
}

Recording read_recording(std::istream& in) {
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty file", 1);
  ++line_no;
  const HeaderFields h = read_header(line, line_no);

  std::vector<Eigen::VectorXd> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    rows.push_back(parse_row(line, h.labels.size(), line_no));
  }
  if (rows.size() < 2) throw ParseError("recording has fewer than 2 samples", line_no);

  Recording rec;
  rec.sample_rate_hz = h.rate_hz;
  rec.channel_labels = h.labels;
  rec.modality = h.modality;
  rec.samples.resize(h.labels.size(), rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) rec.samples.col(t) = rows[t];
  rec.validate();
  return rec;
}

Recording load_recording(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return read_recording(in);
}

void save_epochs(const EpochSet& es, const std::string& path) {
  es.validate();
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  Recording meta;
  meta.sample_rate_hz = es.sample_rate_hz;
  meta.channel_labels = es.channel_labels;
  meta.modality = es.modality;
  write_header(meta, out, &es);
  for (std::size_t i = 0; i < es.epochs.size(); ++i) {
    const Epoch& e = es.epochs[i];
    out << "# epoch " << i << " condition=" << to_string(e.condition)
        << " start_s=" << format_g(e.start_time_s) << '\n';
    write_samples(e.data, out);
  }
}

EpochSet load_epochs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty file", 1);
  ++line_no;
  const HeaderFields h = read_header(line, line_no);
  if (!h.has_window)
    throw ParseError("epoch file header missing window_samples", line_no);

  EpochSet es;
  es.sample_rate_hz = h.rate_hz;
  es.channel_labels = h.labels;
  es.modality = h.modality;
  es.window_samples = h.window_samples;
  es.overlap_frac = h.overlap;

  Epoch current;
  Eigen::Index row_idx = 0;
  bool in_epoch = false;
  auto flush = [&]() {
    if (!in_epoch) return;
    if (row_idx != es.window_samples)
      throw ParseError("epoch has " + std::to_string(row_idx) +
                           " samples, expected " +
                           std::to_string(es.window_samples),
                       line_no);
    es.epochs.push_back(current);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# epoch ", 0) == 0) {
      flush();
      in_epoch = true;
      row_idx = 0;
      current.data.resize(h.labels.size(), es.window_samples);
      current.condition = Condition::unknown;
      current.start_time_s = 0.0;
      std::istringstream iss(line.substr(8));
      std::string idx_tok;
      iss >> idx_tok;
      std::string kv;
      while (iss >> kv) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
          throw ParseError("malformed epoch header token '" + kv + "'",
                           line_no);
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        if (key == "condition")
          current.condition = condition_from_string(value);
        else if (key == "start_s")
          current.start_time_s = parse_double(value, line_no);
        else
          throw ParseError("unknown epoch field '" + key + "'", line_no);
      }
    } else {
      if (!in_epoch) throw ParseError("sample row before any epoch header", line_no);
      if (row_idx >= es.window_samples)
        throw ParseError("epoch has more samples than window_samples", line_no);
      current.data.col(row_idx++) = parse_row(line, h.labels.size(), line_no);
    }
  }
  flush();
  es.validate();
  return es;
}

}  // namespace bvi
