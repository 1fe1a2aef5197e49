#include <doctest.h>

#include <cmath>
#include <random>

#include "bvi/spd.hpp"
#include "test_util.hpp"

using namespace bvi;
using bvi_test::random_gaussian;
using bvi_test::random_invertible;
using bvi_test::random_orthogonal;
using bvi_test::random_spd;

namespace {

SpdMatrix spd(std::initializer_list<std::initializer_list<double>> rows) {
  const int n = rows.size();
  Eigen::MatrixXd m(n, n);
  int r = 0;
  for (const auto& row : rows) {
    int c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return SpdMatrix(m);
}

Epoch epoch_from(std::initializer_list<std::initializer_list<double>> rows) {
  Epoch e;
  const int nc = rows.size();
  const int nt = rows.begin()->size();
  e.data.resize(nc, nt);
  int r = 0;
  for (const auto& row : rows) {
    int c = 0;
    for (double v : row) e.data(r, c++) = v;
    ++r;
  }
  return e;
}

}  // namespace

TEST_CASE("SpdMatrix construction rejects bad inputs") {
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0.5, -0.5, 1;
  CHECK_THROWS_AS(SpdMatrix{asym}, ValidationError);

  Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(2, 2);
  singular(0, 0) = 1.0;
  CHECK_THROWS_AS(SpdMatrix{singular}, ValidationError);

  Eigen::MatrixXd indef(2, 2);
  indef << 1, 0, 0, -1;
  CHECK_THROWS_AS(SpdMatrix{indef}, ValidationError);
}

TEST_CASE("sample_covariance hand example with shrinkage") {
  const Epoch e = epoch_from({{1, -1}, {0, 0}});
  const SpdMatrix p = sample_covariance(e, 0.5);
  CHECK(p.values()(0, 0) == doctest::Approx(1.5));
  CHECK(p.values()(1, 1) == doctest::Approx(0.5));
  CHECK(p.values()(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("sample_covariance shrinkage endpoints") {
  const Epoch e = epoch_from({{1, -1}, {0, 0}});
  // gamma = 0 on a zero-variance channel is singular.
  CHECK_THROWS_AS(sample_covariance(e, 0.0), ValidationError);
  // gamma = 1 collapses to (tr P / N_c) I.
  const SpdMatrix p1 = sample_covariance(e, 1.0);
  CHECK(p1.values().isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-12));
}

TEST_CASE("sample_covariance of iid unit noise approaches identity") {
  std::mt19937_64 rng(7);
  Epoch e;
  e.data = random_gaussian(4, 100000, rng);
  const SpdMatrix p = sample_covariance(e, 0.0);
  CHECK((p.values() - Eigen::MatrixXd::Identity(4, 4)).norm() < 0.1);
}

TEST_CASE("shrunk covariance minimum eigenvalue bound") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Epoch e;
    e.data = random_gaussian(5, 40, rng);
    const double gamma = 0.2;
    const Eigen::MatrixXd raw = raw_covariance(e);
    const SpdMatrix p = shrink(raw, gamma);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.values());
    const double bound = gamma * raw.trace() / 5.0;
    CHECK(es.eigenvalues().minCoeff() + 1e-12 >= bound);
  }
}

TEST_CASE("distance identity and simple closed forms") {
  std::mt19937_64 rng(3);
  const SpdMatrix p(random_spd(4, rng));
  for (Metric m : {Metric::euclidean, Metric::affine_invariant,
                   Metric::log_euclidean})
    CHECK(distance(p, p, m) == doctest::Approx(0.0).epsilon(1e-9));

  const SpdMatrix eye = spd({{1, 0}, {0, 1}});
  const SpdMatrix de = spd({{std::exp(1.0), 0}, {0, 1}});
  CHECK(distance(eye, de, Metric::affine_invariant) == doctest::Approx(1.0));

  const SpdMatrix e2 = spd({{std::exp(2.0), 0}, {0, 1}});
  CHECK(distance(eye, e2, Metric::log_euclidean) == doctest::Approx(2.0));

  CHECK_THROWS_AS(
      distance(eye, SpdMatrix(random_spd(3, rng)), Metric::euclidean),
      ValidationError);
}

TEST_CASE("affine-invariant distance is congruence invariant") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 5;
    const SpdMatrix p1(random_spd(n, rng));
    const SpdMatrix p2(random_spd(n, rng));
    const Eigen::MatrixXd w = random_invertible(n, rng);
    const SpdMatrix q1(w * p1.values() * w.transpose());
    const SpdMatrix q2(w * p2.values() * w.transpose());
    const double d = distance(p1, p2, Metric::affine_invariant);
    const double dw = distance(q1, q2, Metric::affine_invariant);
    CHECK(std::abs(d - dw) < 1e-8 * std::max(1.0, d));
  }
}

TEST_CASE("inversion invariance of affine-invariant and log-Euclidean") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const SpdMatrix p1(random_spd(4, rng));
    const SpdMatrix p2(random_spd(4, rng));
    const SpdMatrix i1(p1.inverse());
    const SpdMatrix i2(p2.inverse());
    for (Metric m : {Metric::affine_invariant, Metric::log_euclidean}) {
      const double d = distance(p1, p2, m);
      CHECK(std::abs(distance(i1, i2, m) - d) < 1e-8 * std::max(1.0, d));
    }
  }
}

TEST_CASE("rotation and scale invariance of log-Euclidean distance") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    const SpdMatrix p1(random_spd(4, rng));
    const SpdMatrix p2(random_spd(4, rng));
    const Eigen::MatrixXd r = random_orthogonal(4, rng);
    const double s = 0.3 + 2.0 * (trial % 7) / 7.0;
    const SpdMatrix q1(s * r * p1.values() * r.transpose());
    const SpdMatrix q2(s * r * p2.values() * r.transpose());
    const double d = distance(p1, p2, Metric::log_euclidean);
    CHECK(std::abs(distance(q1, q2, Metric::log_euclidean) - d) <
          1e-8 * std::max(1.0, d));
  }
}

TEST_CASE("metric axioms on random triples") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 4;
    const SpdMatrix a(random_spd(n, rng));
    const SpdMatrix b(random_spd(n, rng));
    const SpdMatrix c(random_spd(n, rng));
    for (Metric m : {Metric::euclidean, Metric::affine_invariant,
                     Metric::log_euclidean}) {
      const double ab = distance(a, b, m);
      const double ba = distance(b, a, m);
      const double ac = distance(a, c, m);
      const double bc = distance(b, c, m);
      CHECK(ab >= 0.0);
      CHECK(std::abs(ab - ba) < 1e-9 * std::max(1.0, ab));
      CHECK(ac <= ab + bc + 1e-9);
    }
  }
}

TEST_CASE("log_map special cases") {
  std::mt19937_64 rng(37);
  const SpdMatrix q(random_spd(4, rng));
  CHECK(log_map(q, q).values.norm() < 1e-10);

  const SpdMatrix eye(Eigen::MatrixXd::Identity(4, 4));
  const SpdMatrix p(random_spd(4, rng));
  CHECK(log_map(eye, p).values.isApprox(p.log(), 1e-10));
}

TEST_CASE("tangent norm at Q equals affine-invariant distance") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const SpdMatrix q(random_spd(4, rng));
    const SpdMatrix p(random_spd(4, rng));
    const TangentVector s = log_map(q, p);
    const Eigen::MatrixXd qi = q.inverse();
    const double norm_q =
        std::sqrt((s.values * qi * s.values * qi).trace());
    const double d = distance(p, q, Metric::affine_invariant);
    CHECK(std::abs(norm_q - d) < 1e-8 * std::max(1.0, d));
  }
}

TEST_CASE("exp_map special cases and round trip") {
  std::mt19937_64 rng(43);
  const SpdMatrix q(random_spd(4, rng));
  TangentVector zero{Eigen::MatrixXd::Zero(4, 4), q};
  CHECK(exp_map(q, zero).values().isApprox(q.values(), 1e-12));

  const SpdMatrix eye(Eigen::MatrixXd::Identity(3, 3));
  Eigen::MatrixXd s = random_gaussian(3, 3, rng);
  s = 0.5 * (s + s.transpose());
  CHECK(exp_map(eye, TangentVector{s, eye}).values().isApprox(sym_expm(s),
                                                              1e-10));

  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 6;
    const SpdMatrix base(random_spd(n, rng));
    const SpdMatrix target(random_spd(n, rng));
    const SpdMatrix back = exp_map(base, log_map(base, target));
    CHECK((back.values() - target.values()).norm() <
          1e-8 * target.values().norm());
  }

  const SpdMatrix other(random_spd(4, rng));
  CHECK_THROWS_AS(exp_map(other, zero), ValidationError);
}

TEST_CASE("matrix log/exp are inverse on random SPD") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 50; ++trial) {
    const SpdMatrix p(random_spd(5, rng));
    CHECK((sym_expm(p.log()) - p.values()).norm() <
          1e-9 * p.values().norm());
  }
}

TEST_CASE("mean of a singleton is the element") {
  std::mt19937_64 rng(53);
  const SpdMatrix p(random_spd(4, rng));
  for (Metric m : {Metric::euclidean, Metric::affine_invariant,
                   Metric::log_euclidean})
    CHECK(mean({p}, m).mean.values().isApprox(p.values(), 1e-9));
}

TEST_CASE("commuting-matrix means equal the elementwise geometric mean") {
  const SpdMatrix a = spd({{1, 0}, {0, 4}});
  const SpdMatrix b = spd({{4, 0}, {0, 1}});
  const Eigen::MatrixXd expected = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  CHECK(mean({a, b}, Metric::affine_invariant).mean.values().isApprox(
      expected, 1e-10));
  CHECK(mean({a, b}, Metric::log_euclidean).mean.values().isApprox(expected,
                                                                   1e-10));
}

TEST_CASE("Karcher mean satisfies the first-order condition") {
  std::mt19937_64 rng(59);
  std::vector<SpdMatrix> set;
  for (int i = 0; i < 12; ++i) set.emplace_back(random_spd(5, rng));
  const MeanResult res = mean(set, Metric::affine_invariant, 1e-9, 100);
  Eigen::MatrixXd tangent_sum = Eigen::MatrixXd::Zero(5, 5);
  for (const SpdMatrix& p : set) tangent_sum += log_map(res.mean, p).values;
  CHECK(tangent_sum.norm() <= 1e-9);
  CHECK(res.final_grad_norm <= 1e-9);
  CHECK(res.iterations >= 1);
}

TEST_CASE("Karcher objective is lower at the mean than at any member") {
  std::mt19937_64 rng(61);
  std::vector<SpdMatrix> set;
  for (int i = 0; i < 8; ++i) set.emplace_back(random_spd(4, rng));
  const SpdMatrix m = mean(set, Metric::affine_invariant).mean;
  auto objective = [&](const SpdMatrix& c) {
    double acc = 0.0;
    for (const SpdMatrix& p : set) {
      const double d = distance(p, c, Metric::affine_invariant);
      acc += d * d;
    }
    return acc;
  };
  const double at_mean = objective(m);
  for (const SpdMatrix& p : set) CHECK(at_mean <= objective(p) + 1e-9);
}

TEST_CASE("Karcher non-convergence carries the last iterate") {
  std::mt19937_64 rng(67);
  std::vector<SpdMatrix> set;
  for (int i = 0; i < 6; ++i) set.emplace_back(random_spd(4, rng));
  CHECK_THROWS_AS(mean(set, Metric::affine_invariant, 1e-30, 2),
                  MeanNonConvergence);
  try {
    mean(set, Metric::affine_invariant, 1e-30, 2);
  } catch (const MeanNonConvergence& e) {
    CHECK(e.last_iterate().dim() == 4);
    CHECK(e.iterations() == 2);
  }
}

TEST_CASE("mean input validation") {
  CHECK_THROWS_AS(mean({}, Metric::euclidean), ValidationError);
}

TEST_CASE("default shrinkage policy") {
  CHECK(default_shrinkage(1250, 14) == doctest::Approx(0.01));
  CHECK(default_shrinkage(50, 14) == doctest::Approx(0.1));
}
