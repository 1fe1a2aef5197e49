#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bvi/spd.hpp"

namespace bvi {

struct PrototypeSet {
  std::vector<SpdMatrix> prototypes;
  Metric metric = Metric::log_euclidean;
  double inertia = 0.0;  // sum of squared distances to assigned prototypes
  std::uint64_t seed = 0;
  std::vector<double> inertia_history;  // one entry per iteration

  int k() const { return static_cast<int>(prototypes.size()); }
};

// Geodesic K-means: seeded random initialization from the input set,
// nearest-prototype assignment, metric-mean update, until assignments are
// stable or max_iter. Empty clusters are re-seeded with the sample farthest
// from its current prototype.
PrototypeSet kmeans_fit(const std::vector<SpdMatrix>& set, int k, Metric m,
                        std::uint64_t seed, int max_iter = 50);

// Nearest prototype (ties -> lowest index) and its distance.
std::pair<int, double> assign(const SpdMatrix& p, const PrototypeSet& ps);

}  // namespace bvi
