#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <vector>

#include "bvi/eval.hpp"
#include "test_util.hpp"

using namespace bvi;

namespace {

double mann_whitney(const std::vector<double>& s0,
                    const std::vector<double>& s1) {
  double wins = 0.0;
  for (double a : s1)
    for (double b : s0) {
      if (a > b)
        wins += 1.0;
      else if (a == b)
        wins += 0.5;
    }
  return wins / (s0.size() * s1.size());
}

std::vector<Eigen::MatrixXd> raw_cloud(int n, int dim, double scale,
                                       std::mt19937_64& rng) {
  std::vector<Eigen::MatrixXd> out;
  for (int i = 0; i < n; ++i)
    out.push_back(scale * bvi_test::random_spd(dim, rng));
  return out;
}

}  // namespace

TEST_CASE("ROC endpoints: perfect separation and identical classes") {
  const RocCurve perfect = roc_auc({1, 2, 3}, {4, 5, 6});
  CHECK(perfect.auc == doctest::Approx(1.0));
  CHECK(perfect.n_pos == 3);
  CHECK(perfect.n_neg == 3);

  const RocCurve chance = roc_auc({1, 2, 3}, {1, 2, 3});
  CHECK(chance.auc == doctest::Approx(0.5));

  const RocCurve inverted = roc_auc({4, 5, 6}, {1, 2, 3});
  CHECK(inverted.auc == doctest::Approx(0.0));
}

TEST_CASE("ROC curve runs from (0,0) to (1,1) monotonically") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> s0(50), s1(50);
  for (auto& v : s0) v = g(rng);
  for (auto& v : s1) v = g(rng) + 0.5;
  const RocCurve roc = roc_auc(s0, s1);
  REQUIRE(!roc.points.empty());
  CHECK(roc.points.front() == std::pair<double, double>{0.0, 0.0});
  CHECK(roc.points.back() == std::pair<double, double>{1.0, 1.0});
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    CHECK(roc.points[i].first >= roc.points[i - 1].first);
    CHECK(roc.points[i].second >= roc.points[i - 1].second);
  }
}

TEST_CASE("trapezoidal AUC equals the Mann-Whitney statistic exactly") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> coarse(0, 9);  // forces ties
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s0(30), s1(40);
    for (auto& v : s0) v = coarse(rng);
    for (auto& v : s1) v = coarse(rng) + (trial % 2);
    const double auc = roc_auc(s0, s1).auc;
    CHECK(std::abs(auc - mann_whitney(s0, s1)) < 1e-12);
  }
}

TEST_CASE("swapping the classes complements the AUC") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> s0(25), s1(35);
  for (auto& v : s0) v = g(rng);
  for (auto& v : s1) v = g(rng) + 1.0;
  const double auc = roc_auc(s0, s1).auc;
  CHECK(roc_auc(s1, s0).auc == doctest::Approx(1.0 - auc).epsilon(1e-12));
}

TEST_CASE("AUC is invariant under monotone score transforms") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> s0(30), s1(30);
  for (auto& v : s0) v = g(rng);
  for (auto& v : s1) v = g(rng) + 0.8;
  const double auc = roc_auc(s0, s1).auc;
  auto warp = [](std::vector<double> v) {
    for (auto& x : v) x = std::exp(0.5 * x) + 3.0;
    return v;
  };
  CHECK(roc_auc(warp(s0), warp(s1)).auc == doctest::Approx(auc));
}

TEST_CASE("ROC rejects empty classes") {
  CHECK_THROWS_AS(roc_auc({}, {1.0}), ValidationError);
  CHECK_THROWS_AS(roc_auc({1.0}, {}), ValidationError);
}

TEST_CASE("principal submatrix extraction") {
  Eigen::MatrixXd m(3, 3);
  m << 1, 2, 3, 2, 5, 6, 3, 6, 9;
  const Eigen::MatrixXd s = submatrix(m, {0, 2});
  REQUIRE(s.rows() == 2);
  CHECK(s(0, 0) == 1);
  CHECK(s(0, 1) == 3);
  CHECK(s(1, 1) == 9);
  const Eigen::MatrixXd one = submatrix(m, {1});
  CHECK(one(0, 0) == 5);
}

TEST_CASE("cross-validated AUC: chance on identical distributions") {
  std::mt19937_64 rng(5);
  const auto ref = raw_cloud(60, 4, 1.0, rng);
  const auto alt = raw_cloud(30, 4, 1.0, rng);
  DetectorConfig cfg;
  cfg.k = 2;
  cfg.l = 10;
  cfg.seed = 1;
  const FoldResult r = kfold_auc(ref, alt, cfg, 4);
  REQUIRE(r.fold_aucs.size() == 4);
  CHECK(r.mean_auc == doctest::Approx(0.5).epsilon(0.15));
  CHECK(r.std_error >= 0.0);
}

TEST_CASE("cross-validated AUC: near 1 on well-separated distributions") {
  std::mt19937_64 rng(6);
  const auto ref = raw_cloud(60, 4, 1.0, rng);
  const auto alt = raw_cloud(30, 4, 16.0, rng);
  DetectorConfig cfg;
  cfg.k = 2;
  cfg.l = 10;
  cfg.seed = 1;
  const FoldResult r = kfold_auc(ref, alt, cfg, 4);
  CHECK(r.mean_auc >= 0.95);
}

TEST_CASE("cross-validation is deterministic and thread-count independent") {
  std::mt19937_64 rng(7);
  const auto ref = raw_cloud(40, 3, 1.0, rng);
  const auto alt = raw_cloud(20, 3, 3.0, rng);
  DetectorConfig cfg;
  cfg.k = 2;
  cfg.l = 8;
  cfg.seed = 9;
  cfg.jobs = 1;
  const FoldResult a = kfold_auc(ref, alt, cfg, 4);
  cfg.jobs = 4;
  const FoldResult b = kfold_auc(ref, alt, cfg, 4);
  CHECK(a.fold_aucs == b.fold_aucs);
  CHECK(a.mean_auc == b.mean_auc);
}

TEST_CASE("too few reference epochs for the fold layout is an error") {
  std::mt19937_64 rng(8);
  const auto ref = raw_cloud(15, 3, 1.0, rng);
  const auto alt = raw_cloud(10, 3, 2.0, rng);
  DetectorConfig cfg;
  cfg.k = 1;
  cfg.l = 4;
  CHECK_THROWS_AS(kfold_auc(ref, alt, cfg, 4), ValidationError);
}

TEST_CASE("channel-restricted cross validation sees only the subset") {
  std::mt19937_64 rng(9);
  // Contrast lives purely in channel 0.
  auto make = [&](double boost) {
    std::vector<Eigen::MatrixXd> out;
    for (int i = 0; i < 30; ++i) {
      Eigen::MatrixXd m = bvi_test::random_spd(3, rng);
      m(0, 0) += boost;
      out.push_back(m);
    }
    return out;
  };
  const auto ref = make(0.0);
  const auto alt = make(8.0);
  DetectorConfig cfg;
  cfg.k = 1;
  cfg.l = 6;
  cfg.seed = 2;
  const double with0 = kfold_auc_subset(ref, alt, {0, 1}, cfg, 3).mean_auc;
  const double without0 = kfold_auc_subset(ref, alt, {1, 2}, cfg, 3).mean_auc;
  CHECK(with0 > 0.9);
  CHECK(without0 < 0.75);
}

TEST_CASE("K/L sweep covers the grid and flags L < K as invalid") {
  std::mt19937_64 rng(10);
  const auto ref = raw_cloud(40, 3, 1.0, rng);
  const auto alt = raw_cloud(20, 3, 4.0, rng);
  DetectorConfig cfg;
  cfg.seed = 3;
  const SweepResult sr = sweep_kl(ref, alt, {1, 3, 6}, {4, 8}, cfg, 4);
  CHECK(sr.axis_names == std::vector<std::string>{"K", "L"});
  REQUIRE(sr.cells.size() == 6);
  for (const SweepCell& cell : sr.cells) {
    const int k = static_cast<int>(cell.axes[0]);
    const int l = static_cast<int>(cell.axes[1]);
    CHECK(cell.valid == (l >= k));
    if (cell.valid) {
      CHECK(cell.fold_aucs.size() == 4);
      CHECK(cell.mean_auc > 0.5);
    }
  }
}

TEST_CASE("electrode curve walks ranking prefixes down to 2 channels") {
  std::mt19937_64 rng(11);
  const auto ref = raw_cloud(40, 4, 1.0, rng);
  const auto alt = raw_cloud(20, 4, 4.0, rng);
  RankedChannelList ranking;
  ranking.order = {2, 0, 3, 1};
  ranking.scores = {4, 3, 2, 1};
  DetectorConfig cfg;
  cfg.k = 1;
  cfg.l = 8;
  cfg.seed = 4;
  const SweepResult sr = electrode_curve(ref, alt, ranking, cfg, 4);
  REQUIRE(sr.cells.size() == 3);  // prefixes of size 4, 3, 2
  CHECK(sr.cells[0].axes[0] == 4.0);
  CHECK(sr.cells[1].axes[0] == 3.0);
  CHECK(sr.cells[2].axes[0] == 2.0);
  for (const SweepCell& cell : sr.cells) CHECK(cell.mean_auc > 0.8);
}

TEST_CASE("preprocess chains filtering, decimation, and windowing") {
  std::mt19937_64 rng(12);
  Recording rec;
  rec.sample_rate_hz = 200.0;
  rec.samples = bvi_test::random_gaussian(3, 200 * 30, rng);
  rec.channel_labels = {"a", "b", "c"};
  PreprocessConfig pp;
  pp.low_cut_hz = 8.0;
  pp.high_cut_hz = 24.0;
  pp.downsample_to_hz = 100.0;
  pp.window_s = 2.0;
  pp.overlap_frac = 0.5;
  const EpochSet es = preprocess(rec, pp, Condition::SV);
  CHECK(es.sample_rate_hz == 100.0);
  CHECK(es.window_samples == 200);
  // (3000 - 200) / 100 + 1 epochs after decimation to 100 Hz.
  CHECK(es.size() == 29);
  const auto covs = epoch_covariances(es);
  CHECK(covs.size() == es.size());
  CHECK(covs.front().rows() == 3);
}

TEST_CASE("band sweep evaluates every requested band") {
  std::mt19937_64 rng(13);
  Recording ref_rec, alt_rec;
  ref_rec.sample_rate_hz = alt_rec.sample_rate_hz = 100.0;
  ref_rec.samples = bvi_test::random_gaussian(3, 100 * 40, rng);
  alt_rec.samples = 3.0 * bvi_test::random_gaussian(3, 100 * 40, rng);
  ref_rec.channel_labels = alt_rec.channel_labels = {"a", "b", "c"};
  PreprocessConfig pp;
  pp.window_s = 1.0;
  pp.overlap_frac = 0.5;
  DetectorConfig cfg;
  cfg.k = 1;
  cfg.l = 5;
  cfg.seed = 6;
  const SweepResult sr =
      sweep_band(ref_rec, alt_rec, {{4.0, 20.0}, {20.0, 40.0}}, pp, cfg, 3);
  CHECK(sr.axis_names == std::vector<std::string>{"low_hz", "high_hz"});
  REQUIRE(sr.cells.size() == 2);
  CHECK(sr.cells[0].axes == std::vector<double>{4.0, 20.0});
  // The amplitude contrast shows up in every band.
  for (const SweepCell& cell : sr.cells) CHECK(cell.mean_auc > 0.9);
}

TEST_CASE("sweep files carry the grid and per-fold results") {
  SweepResult sr;
  sr.axis_names = {"K", "L"};
  sr.folds = 2;
  SweepCell c;
  c.axes = {1, 4};
  c.fold_aucs = {0.9, 1.0};
  c.mean_auc = 0.95;
  c.std_error = 0.05;
  sr.cells.push_back(c);
  SweepCell bad;
  bad.axes = {6, 4};
  bad.valid = false;
  sr.cells.push_back(bad);
  const std::string path = "/tmp/bvi_sweep_test.csv";
  save_sweep(sr, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line.find("folds=2") != std::string::npos);
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') ++rows;
  CHECK(rows == 3);  // column header + 2 cells
  std::remove(path.c_str());
}
