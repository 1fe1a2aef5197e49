#include "bvi/clustering.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace bvi {

std::pair<int, double> assign(const SpdMatrix& p, const PrototypeSet& ps) {
  if (ps.prototypes.empty())
    throw ValidationError("assign: empty prototype set");
  int best = 0;
  double best_d = distance(p, ps.prototypes[0], ps.metric);
  for (int k = 1; k < ps.k(); ++k) {
    const double d = distance(p, ps.prototypes[k], ps.metric);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return {best, best_d};
}

PrototypeSet kmeans_fit(const std::vector<SpdMatrix>& set, int k, Metric m,
                        std::uint64_t seed, int max_iter) {
  const int n = static_cast<int>(set.size());
  if (k < 1) throw ValidationError("kmeans_fit: K must be >= 1");
  if (k > n)
    throw ValidationError("kmeans_fit: K=" + std::to_string(k) +
                          " exceeds the " + std::to_string(n) +
                          " training matrices");
  for (const SpdMatrix& p : set)
    if (p.dim() != set.front().dim())
      throw ValidationError("kmeans_fit: dimension mismatch");

  std::mt19937_64 rng(seed);
  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);
  std::vector<int> chosen;
  std::sample(indices.begin(), indices.end(), std::back_inserter(chosen), k,
              rng);

  PrototypeSet ps;
  ps.metric = m;
  ps.seed = seed;
  for (int idx : chosen) ps.prototypes.push_back(set[idx]);

  std::vector<int> assignment(n, -1);
  std::vector<double> deltas(n, 0.0);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (int i = 0; i < n; ++i) {
      auto [idx, d] = assign(set[i], ps);
      if (idx != assignment[i]) changed = true;
      assignment[i] = idx;
      deltas[i] = d;
      inertia += d * d;
    }
    ps.inertia = inertia;
    ps.inertia_history.push_back(inertia);
    if (!changed && iter > 0) break;

    // Re-seed empty clusters with the sample farthest from its prototype.
    for (int c = 0; c < k; ++c) {
      if (std::find(assignment.begin(), assignment.end(), c) !=
          assignment.end())
        continue;
      int farthest = static_cast<int>(
          std::max_element(deltas.begin(), deltas.end()) - deltas.begin());
      ps.prototypes[c] = set[farthest];
      assignment[farthest] = c;
      deltas[farthest] = 0.0;
    }

    for (int c = 0; c < k; ++c) {
      std::vector<SpdMatrix> members;
      for (int i = 0; i < n; ++i)
        if (assignment[i] == c) members.push_back(set[i]);
      ps.prototypes[c] = mean(members, m).mean;
    }
  }
  return ps;
}

}  // namespace bvi
