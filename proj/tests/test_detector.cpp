#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <random>
#include <vector>

#include "bvi/detector.hpp"
#include "test_util.hpp"

using namespace bvi;

namespace {

std::vector<SpdMatrix> spd_cloud(int n, int dim, std::mt19937_64& rng) {
  std::vector<SpdMatrix> out;
  for (int i = 0; i < n; ++i) out.emplace_back(bvi_test::random_spd(dim, rng));
  return out;
}

ScoreSeries series_from(const std::vector<double>& deltas) {
  ScoreSeries s;
  for (std::size_t i = 0; i < deltas.size(); ++i)
    s.push_back({i, deltas[i], Condition::SV});
  return s;
}

}  // namespace

TEST_CASE("training produces K prototypes and records the setup") {
  std::mt19937_64 rng(2);
  const auto ref = spd_cloud(25, 4, rng);
  TrainingMeta meta;
  meta.shrinkage = 0.05;
  const DetectorModel m = train(ref, 3, Metric::affine_invariant, 9, meta);
  CHECK(m.prototypes.k() == 3);
  CHECK(m.metric == Metric::affine_invariant);
  CHECK(m.training_count == 25);
  CHECK(!m.kappa.has_value());
  CHECK(m.meta.shrinkage == 0.05);

  const DetectorModel m2 = train(ref, 3, Metric::affine_invariant, 9, meta);
  for (int i = 0; i < 3; ++i)
    CHECK(m.prototypes.prototypes[i].values() ==
          m2.prototypes.prototypes[i].values());
}

TEST_CASE("a prototype scores zero against itself") {
  std::mt19937_64 rng(4);
  const auto ref = spd_cloud(10, 3, rng);
  for (const Metric metric :
       {Metric::euclidean, Metric::affine_invariant, Metric::log_euclidean}) {
    const DetectorModel m = train(ref, 2, metric, 1);
    for (const auto& p : m.prototypes.prototypes)
      CHECK(score_one(m, p) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("score is the distance to the nearest prototype") {
  std::mt19937_64 rng(6);
  const auto ref = spd_cloud(12, 3, rng);
  const DetectorModel m = train(ref, 3, Metric::log_euclidean, 5);
  const SpdMatrix probe(bvi_test::random_spd(3, rng));
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : m.prototypes.prototypes)
    best = std::min(best, distance(probe, c, Metric::log_euclidean));
  CHECK(score_one(m, probe) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("classification is 0 iff delta <= kappa, including the boundary") {
  std::mt19937_64 rng(8);
  const auto ref = spd_cloud(8, 3, rng);
  DetectorModel m = train(ref, 2, Metric::euclidean, 0);
  m.kappa = 1.0;
  const ScoreSeries s = series_from({0.5, 1.0, 1.0000001, 2.0});
  const std::vector<int> y = classify(m, s);
  CHECK(y == std::vector<int>{0, 0, 1, 1});
}

TEST_CASE("classification without a calibrated threshold is an error") {
  std::mt19937_64 rng(10);
  const auto ref = spd_cloud(8, 3, rng);
  const DetectorModel m = train(ref, 2, Metric::euclidean, 0);
  CHECK_THROWS_AS(classify(m, series_from({1.0})), ValidationError);
}

TEST_CASE("kappa at 0.5 specificity is the empirical median") {
  std::mt19937_64 rng(12);
  const auto ref = spd_cloud(8, 3, rng);
  const DetectorModel base = train(ref, 2, Metric::euclidean, 0);
  // Odd count: exact middle order statistic.
  const DetectorModel odd =
      calibrate_kappa(base, series_from({9, 1, 5, 3, 7, 2, 8, 4, 6}), 0.5);
  CHECK(odd.kappa.value() == doctest::Approx(5.0));
  // Even count: interpolation lands halfway between the middle pair.
  const DetectorModel even =
      calibrate_kappa(base, series_from({4, 1, 3, 2}), 0.5);
  CHECK(even.kappa.value() == doctest::Approx(2.5));
}

TEST_CASE("specificity targets near 1 accept every held-out score") {
  std::mt19937_64 rng(14);
  const auto ref = spd_cloud(8, 3, rng);
  const DetectorModel base = train(ref, 2, Metric::euclidean, 0);
  const std::vector<double> deltas = {0.3, 1.7, 0.9, 1.1, 0.2};
  const double eps = 1.0 / (2.0 * deltas.size());
  DetectorModel m = calibrate_kappa(base, series_from(deltas), 1.0 - eps);
  CHECK(m.kappa.value() >= 1.7);
  // Monotone in the target.
  const double k25 = calibrate_kappa(base, series_from(deltas), 0.25)
                         .kappa.value();
  const double k75 = calibrate_kappa(base, series_from(deltas), 0.75)
                         .kappa.value();
  CHECK(k25 <= k75);
}

TEST_CASE("calibrated threshold hits the target specificity on fresh data") {
  std::mt19937_64 rng(16);
  const auto ref = spd_cloud(8, 3, rng);
  const DetectorModel base = train(ref, 2, Metric::euclidean, 0);
  std::gamma_distribution<double> gamma(2.0, 1.0);
  std::vector<double> held(400);
  for (auto& d : held) d = gamma(rng);
  const DetectorModel m = calibrate_kappa(base, series_from(held), 0.9);
  int accepted = 0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i)
    if (gamma(rng) <= m.kappa.value()) ++accepted;
  const double spec = static_cast<double>(accepted) / trials;
  CHECK(spec == doctest::Approx(0.9).epsilon(0.05));
}

TEST_CASE("affine-invariant scores survive congruence transforms") {
  std::mt19937_64 rng(18);
  const auto ref = spd_cloud(10, 3, rng);
  const SpdMatrix probe(bvi_test::random_spd(3, rng));
  const Eigen::MatrixXd w = bvi_test::random_invertible(3, rng);
  std::vector<SpdMatrix> ref_t;
  for (const auto& p : ref)
    ref_t.emplace_back(w * p.values() * w.transpose());
  const SpdMatrix probe_t(w * probe.values() * w.transpose());
  const DetectorModel m = train(ref, 2, Metric::affine_invariant, 3);
  const DetectorModel mt = train(ref_t, 2, Metric::affine_invariant, 3);
  CHECK(score_one(m, probe) ==
        doctest::Approx(score_one(mt, probe_t)).epsilon(1e-6));
}

TEST_CASE("model save/load round trip") {
  std::mt19937_64 rng(20);
  const auto ref = spd_cloud(9, 4, rng);
  TrainingMeta meta;
  meta.band_low_hz = 10.0;
  meta.band_high_hz = 30.0;
  meta.channel_subset = {0, 2, 3};
  DetectorModel m = train(ref, 3, Metric::log_euclidean, 77, meta);
  m.kappa = 0.625;
  const std::string path = "/tmp/bvi_model_test.json";
  save_model(m, path);
  const DetectorModel back = load_model(path);
  CHECK(back.metric == m.metric);
  CHECK(back.training_count == m.training_count);
  CHECK(back.kappa.value() == m.kappa.value());
  CHECK(back.meta.band_low_hz == 10.0);
  CHECK(back.meta.channel_subset == meta.channel_subset);
  REQUIRE(back.prototypes.k() == 3);
  for (int i = 0; i < 3; ++i)
    CHECK((back.prototypes.prototypes[i].values() -
           m.prototypes.prototypes[i].values())
              .cwiseAbs()
              .maxCoeff() < 1e-15);
  // Scores computed from the reloaded model agree exactly.
  const SpdMatrix probe(bvi_test::random_spd(4, rng));
  CHECK(score_one(back, probe) == doctest::Approx(score_one(m, probe)));
  std::remove(path.c_str());
}

TEST_CASE("score over an epoch set carries labels and indices through") {
  std::mt19937_64 rng(22);
  EpochSet es;
  es.sample_rate_hz = 100.0;
  es.channel_labels = {"a", "b", "c"};
  es.window_samples = 200;
  for (int i = 0; i < 5; ++i) {
    Epoch e;
    e.data = bvi_test::random_gaussian(3, 200, rng);
    e.condition = i < 3 ? Condition::SV : Condition::SN;
    e.start_time_s = i * 1.0;
    es.epochs.push_back(e);
  }
  const auto ref = spd_cloud(6, 3, rng);
  const DetectorModel m = train(ref, 2, Metric::log_euclidean, 0);
  const ScoreSeries s = score(m, es);
  REQUIRE(s.size() == 5);
  CHECK(s[0].label == Condition::SV);
  CHECK(s[4].label == Condition::SN);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i].epoch_index == i);
    CHECK(s[i].delta > 0.0);
  }
}
