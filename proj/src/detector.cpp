#include "bvi/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace bvi {

DetectorModel train(const std::vector<SpdMatrix>& reference, int k, Metric m,
                    std::uint64_t seed, const TrainingMeta& meta) {
  if (static_cast<int>(reference.size()) < k)
    throw ValidationError("train: L=" + std::to_string(reference.size()) +
                          " is smaller than K=" + std::to_string(k));
  DetectorModel model;
  model.prototypes = kmeans_fit(reference, k, m, seed);
  model.metric = m;
  model.training_count = static_cast<int>(reference.size());
  model.meta = meta;
  return model;
}

double score_one(const DetectorModel& model, const SpdMatrix& p) {
  return assign(p, model.prototypes).second;
}

ScoreSeries score(const DetectorModel& model, const EpochSet& epochs) {
  const Eigen::Index expect = model.prototypes.prototypes.front().dim();
  ScoreSeries out;
  out.reserve(epochs.size());
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const Epoch& e = epochs.epochs[i];
    Epoch sub = e;
    if (!model.meta.channel_subset.empty()) {
      sub.data.resize(model.meta.channel_subset.size(), e.data.cols());
      for (std::size_t c = 0; c < model.meta.channel_subset.size(); ++c) {
        const int ch = model.meta.channel_subset[c];
        if (ch < 0 || ch >= e.data.rows())
          throw ValidationError("score: channel subset index " +
                                std::to_string(ch) + " out of range");
        sub.data.row(c) = e.data.row(ch);
      }
    }
    if (sub.data.rows() != expect)
      throw ValidationError(
          "score: epoch has " + std::to_string(sub.data.rows()) +
          " channels, model expects " + std::to_string(expect));
    const SpdMatrix p = sample_covariance(sub, model.meta.shrinkage);
    out.push_back({i, score_one(model, p), e.condition});
  }
  return out;
}

std::vector<int> classify(const DetectorModel& model, const ScoreSeries& s) {
  if (!model.kappa)
    throw ValidationError("classify: kappa is unset; calibrate first");
  std::vector<int> out;
  out.reserve(s.size());
  for (const ScoreEntry& e : s) out.push_back(e.delta <= *model.kappa ? 0 : 1);
  return out;
}

DetectorModel calibrate_kappa(const DetectorModel& model,
                              const ScoreSeries& held_out_reference,
                              double target_specificity) {
  if (held_out_reference.empty())
    throw ValidationError("calibrate_kappa: no held-out reference scores");
  if (target_specificity <= 0.0 || target_specificity >= 1.0)
    throw ValidationError("target specificity must be in (0, 1)");
  std::vector<double> deltas;
  deltas.reserve(held_out_reference.size());
  for (const ScoreEntry& e : held_out_reference) deltas.push_back(e.delta);
  std::sort(deltas.begin(), deltas.end());

  // Quantile with linear interpolation between order statistics
  // (position p*(n+1), clamped to the sample range).
  const double n = static_cast<double>(deltas.size());
  const double h = target_specificity * (n + 1.0);
  DetectorModel out = model;
  if (h <= 1.0) {
    out.kappa = deltas.front();
  } else if (h >= n) {
    out.kappa = deltas.back();
  } else {
    const std::size_t i = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(i);
    out.kappa = deltas[i - 1] + frac * (deltas[i] - deltas[i - 1]);
  }
  return out;
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
  if (rows == 0) throw ValidationError("model file: empty matrix");
  const std::size_t cols = j.at(0).size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j.at(r).size() != cols)
      throw ValidationError("model file: ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c);
  }
  return m;
}

}  // namespace

void save_model(const DetectorModel& model, const std::string& path) {
  json j;
  j["type"] = "riemann_detector";
  j["metric"] = to_string(model.metric);
  j["K"] = model.prototypes.k();
  j["L"] = model.training_count;
  j["seed"] = model.prototypes.seed;
  j["inertia"] = model.prototypes.inertia;
  if (model.kappa) j["kappa"] = *model.kappa;
  j["shrinkage"] = model.meta.shrinkage;
  j["band_low_hz"] = model.meta.band_low_hz;
  j["band_high_hz"] = model.meta.band_high_hz;
  j["window_s"] = model.meta.window_s;
  j["channel_subset"] = model.meta.channel_subset;
  json protos = json::array();
  for (const SpdMatrix& p : model.prototypes.prototypes)
    protos.push_back(matrix_to_json(p.values()));
  j["prototypes"] = std::move(protos);

  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

DetectorModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what(), 0);
  }
  if (j.value("type", "") != "riemann_detector")
    throw ValidationError("model file is not a riemann_detector model");

  DetectorModel model;
  model.metric = metric_from_string(j.at("metric").get<std::string>());
  model.training_count = j.at("L").get<int>();
  if (j.contains("kappa")) model.kappa = j.at("kappa").get<double>();
  model.meta.shrinkage = j.at("shrinkage").get<double>();
  model.meta.band_low_hz = j.value("band_low_hz", 0.0);
  model.meta.band_high_hz = j.value("band_high_hz", 0.0);
  model.meta.window_s = j.value("window_s", 0.0);
  model.meta.channel_subset =
      j.value("channel_subset", std::vector<int>{});
  model.prototypes.metric = model.metric;
  model.prototypes.seed = j.value("seed", std::uint64_t{0});
  model.prototypes.inertia = j.value("inertia", 0.0);
  for (const json& p : j.at("prototypes"))
    model.prototypes.prototypes.emplace_back(matrix_from_json(p));
  if (model.prototypes.prototypes.empty())
    throw ValidationError("model file has no prototypes");
  return model;
}

}  // namespace bvi
