#include "bvi/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <thread>

#include "bvi/detector.hpp"
#include "bvi/io_util.hpp"
#include "bvi/signal_io.hpp"

namespace bvi {

namespace {

// Runs fn(0..n-1) on up to `jobs` threads; results must be written to
// per-index slots so ordering is independent of scheduling.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

double sample_std_error(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  if (xs.size() < 2) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / (n - 1.0)) / std::sqrt(n);
}

}  // namespace

RocCurve roc_auc(const std::vector<double>& scores0,
                 const std::vector<double>& scores1) {
  if (scores0.empty() || scores1.empty())
    throw ValidationError("roc_auc: both score sets must be nonempty");

  struct Tagged {
    double score;
    bool positive;
  };
  std::vector<Tagged> all;
  all.reserve(scores0.size() + scores1.size());
  for (double s : scores0) all.push_back({s, false});
  for (double s : scores1) all.push_back({s, true});
  std::sort(all.begin(), all.end(),
            [](const Tagged& a, const Tagged& b) { return a.score > b.score; });

  RocCurve roc;
  roc.n_neg = static_cast<int>(scores0.size());
  roc.n_pos = static_cast<int>(scores1.size());
  roc.points.emplace_back(0.0, 0.0);
  double auc = 0.0;
  long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < all.size()) {
    // Tied scores advance in one diagonal step.
    std::size_t j = i;
    long d_tp = 0, d_fp = 0;
    while (j < all.size() && all[j].score == all[i].score) {
      if (all[j].positive)
        ++d_tp;
      else
        ++d_fp;
      ++j;
    }
    const double prev_tpr = static_cast<double>(tp) / roc.n_pos;
    tp += d_tp;
    fp += d_fp;
    const double tpr = static_cast<double>(tp) / roc.n_pos;
    const double fpr = static_cast<double>(fp) / roc.n_neg;
    auc += (static_cast<double>(d_fp) / roc.n_neg) * 0.5 * (prev_tpr + tpr);
    roc.points.emplace_back(fpr, tpr);
    i = j;
  }
  roc.auc = auc;
  return roc;
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& cov,
                          const std::vector<int>& channels) {
  Eigen::MatrixXd out(channels.size(), channels.size());
  for (std::size_t r = 0; r < channels.size(); ++r)
    for (std::size_t c = 0; c < channels.size(); ++c) {
      if (channels[r] < 0 || channels[r] >= cov.rows())
        throw ValidationError("submatrix: channel index out of range");
      out(r, c) = cov(channels[r], channels[c]);
    }
  return out;
}

FoldResult kfold_auc(const std::vector<Eigen::MatrixXd>& ref_raw,
                     const std::vector<Eigen::MatrixXd>& alt_raw,
                     const DetectorConfig& cfg, int v) {
  if (v < 2) throw ValidationError("kfold_auc: V must be >= 2");
  const int n = static_cast<int>(ref_raw.size());
  const int min_needed = v * cfg.l;
  if (n < min_needed)
    throw ValidationError("kfold_auc: need at least " +
                          std::to_string(min_needed) +
                          " reference epochs for V=" + std::to_string(v) +
                          ", L=" + std::to_string(cfg.l) + "; have " +
                          std::to_string(n));
  if (alt_raw.empty())
    throw ValidationError("kfold_auc: no altered epochs");

  std::vector<SpdMatrix> alt_cov;
  alt_cov.reserve(alt_raw.size());
  for (const Eigen::MatrixXd& p : alt_raw)
    alt_cov.push_back(shrink(p, cfg.shrinkage));
  std::vector<SpdMatrix> ref_cov;
  ref_cov.reserve(ref_raw.size());
  for (const Eigen::MatrixXd& p : ref_raw)
    ref_cov.push_back(shrink(p, cfg.shrinkage));

  FoldResult result;
  result.fold_aucs.resize(v);
  parallel_for(v, cfg.jobs, [&](int fold) {
    // Contiguous blocks: overlapping windows never straddle the boundary
    // between learning and scoring.
    const int lo = static_cast<int>(static_cast<long>(fold) * n / v);
    const int hi = static_cast<int>(static_cast<long>(fold + 1) * n / v);
    std::vector<SpdMatrix> learn(ref_cov.begin() + lo,
                                 ref_cov.begin() + lo + cfg.l);
    DetectorModel model =
        train(learn, cfg.k, cfg.metric, cfg.seed + static_cast<std::uint64_t>(fold));
    std::vector<double> s0, s1;
    for (int i = 0; i < n; ++i)
      if (i < lo || i >= hi) s0.push_back(score_one(model, ref_cov[i]));
    for (const SpdMatrix& p : alt_cov) s1.push_back(score_one(model, p));
    result.fold_aucs[fold] = roc_auc(s0, s1).auc;
  });
  result.mean_auc =
      std::accumulate(result.fold_aucs.begin(), result.fold_aucs.end(), 0.0) /
      v;
  result.std_error = sample_std_error(result.fold_aucs);
  return result;
}

FoldResult kfold_auc_subset(const std::vector<Eigen::MatrixXd>& ref_raw,
                            const std::vector<Eigen::MatrixXd>& alt_raw,
                            const std::vector<int>& channels,
                            const DetectorConfig& cfg, int v) {
  std::vector<Eigen::MatrixXd> ref_sub, alt_sub;
  ref_sub.reserve(ref_raw.size());
  alt_sub.reserve(alt_raw.size());
  for (const Eigen::MatrixXd& p : ref_raw)
    ref_sub.push_back(submatrix(p, channels));
  for (const Eigen::MatrixXd& p : alt_raw)
    alt_sub.push_back(submatrix(p, channels));
  return kfold_auc(ref_sub, alt_sub, cfg, v);
}

EpochSet preprocess(const Recording& rec, const PreprocessConfig& pp,
                    Condition condition) {
  FilterSpec spec;
  spec.low_cut_hz = pp.low_cut_hz;
  spec.high_cut_hz = pp.high_cut_hz;
  spec.order = pp.fir_order > 0
                   ? pp.fir_order
                   : default_fir_order(rec.sample_rate_hz, pp.low_cut_hz);
  Recording filtered = bandpass_filter(rec, spec);
  if (pp.downsample_to_hz > 0.0)
    filtered = downsample(filtered, pp.downsample_to_hz);
  EpochSet es =
      epoch_windows(filtered, pp.window_s, pp.overlap_frac, condition);
  if (pp.amp_thresh > 0.0) es = reject_artifacts(es, pp.amp_thresh).kept;
  return es;
}

std::vector<Eigen::MatrixXd> epoch_covariances(const EpochSet& es) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(es.size());
  for (const Epoch& e : es.epochs) out.push_back(raw_covariance(e));
  return out;
}

SweepResult sweep_band(const Recording& ref_rec, const Recording& alt_rec,
                       const std::vector<std::pair<double, double>>& bands,
                       const PreprocessConfig& pp, const DetectorConfig& cfg,
                       int v) {
  SweepResult sr;
  sr.axis_names = {"low_hz", "high_hz"};
  sr.folds = v;
  sr.cells.resize(bands.size());
  parallel_for(static_cast<int>(bands.size()), cfg.jobs, [&](int i) {
    PreprocessConfig band_pp = pp;
    band_pp.low_cut_hz = bands[i].first;
    band_pp.high_cut_hz = bands[i].second;
    band_pp.fir_order = pp.fir_order;
    const auto ref_covs =
        epoch_covariances(preprocess(ref_rec, band_pp, Condition::SV));
    const auto alt_covs =
        epoch_covariances(preprocess(alt_rec, band_pp, Condition::unknown));
    DetectorConfig cell_cfg = cfg;
    cell_cfg.jobs = 1;
    const FoldResult fr = kfold_auc(ref_covs, alt_covs, cell_cfg, v);
    sr.cells[i] = {{bands[i].first, bands[i].second},
                   fr.fold_aucs,
                   fr.mean_auc,
                   fr.std_error,
                   true};
  });
  return sr;
}

SweepResult sweep_kl(const std::vector<Eigen::MatrixXd>& ref_raw,
                     const std::vector<Eigen::MatrixXd>& alt_raw,
                     const std::vector<int>& k_values,
                     const std::vector<int>& l_values,
                     const DetectorConfig& cfg, int v) {
  SweepResult sr;
  sr.axis_names = {"K", "L"};
  sr.folds = v;
  const int nk = static_cast<int>(k_values.size());
  const int nl = static_cast<int>(l_values.size());
  sr.cells.resize(nk * nl);
  parallel_for(nk * nl, cfg.jobs, [&](int i) {
    const int k = k_values[i / nl];
    const int l = l_values[i % nl];
    SweepCell& cell = sr.cells[i];
    cell.axes = {static_cast<double>(k), static_cast<double>(l)};
    if (l < k) {
      cell.valid = false;
      return;
    }
    DetectorConfig cell_cfg = cfg;
    cell_cfg.k = k;
    cell_cfg.l = l;
    cell_cfg.jobs = 1;
    const FoldResult fr = kfold_auc(ref_raw, alt_raw, cell_cfg, v);
    cell.fold_aucs = fr.fold_aucs;
    cell.mean_auc = fr.mean_auc;
    cell.std_error = fr.std_error;
  });
  return sr;
}

SweepResult electrode_curve(const std::vector<Eigen::MatrixXd>& ref_raw,
                            const std::vector<Eigen::MatrixXd>& alt_raw,
                            const RankedChannelList& ranking,
                            const DetectorConfig& cfg, int v) {
  const int nc = static_cast<int>(ranking.order.size());
  if (ref_raw.empty() || ref_raw.front().rows() != nc)
    throw ValidationError("electrode_curve: ranking does not cover channels");
  SweepResult sr;
  sr.axis_names = {"channels"};
  sr.folds = v;
  sr.cells.resize(nc - 1);
  parallel_for(nc - 1, cfg.jobs, [&](int i) {
    const int size = nc - i;
    std::vector<int> subset(ranking.order.begin(),
                            ranking.order.begin() + size);
    std::sort(subset.begin(), subset.end());
    DetectorConfig cell_cfg = cfg;
    cell_cfg.jobs = 1;
    const FoldResult fr = kfold_auc_subset(ref_raw, alt_raw, subset, cell_cfg, v);
    sr.cells[i] = {{static_cast<double>(size)},
                   fr.fold_aucs,
                   fr.mean_auc,
                   fr.std_error,
                   true};
  });
  return sr;
}

void save_sweep(const SweepResult& sr, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << "# folds=" << sr.folds << " axes=";
  for (std::size_t i = 0; i < sr.axis_names.size(); ++i) {
    if (i) out << ';';
    out << sr.axis_names[i];
  }
  out << '\n';
  for (std::size_t i = 0; i < sr.axis_names.size(); ++i)
    out << sr.axis_names[i] << ',';
  out << "mean_auc,std_error,valid,fold_aucs\n";
  for (const SweepCell& cell : sr.cells) {
    for (double a : cell.axes) out << format_g(a) << ',';
    out << format_g(cell.mean_auc) << ',' << format_g(cell.std_error) << ','
        << (cell.valid ? 1 : 0);
    for (double f : cell.fold_aucs) out << ',' << format_g(f);
    out << '\n';
  }
}

}  // namespace bvi
