#include "influ/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "influ/common.hpp"
#include "influ/metrics.hpp"

namespace influ {

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

size_t weighted_pick(const std::vector<double>& weights, double total, std::mt19937_64& rng) {
  double r = uniform01(rng) * total;
  double cumulative = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    cumulative += weights[i];
    if (r < cumulative) return i;
  }
  return weights.size() - 1;
}

std::vector<std::vector<double>> seed_plus_plus(const std::vector<std::vector<double>>& points,
                                                int k, std::mt19937_64& rng) {
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  size_t first = static_cast<size_t>(uniform01(rng) * points.size());
  if (first >= points.size()) first = points.size() - 1;
  centroids.push_back(points[first]);

  std::vector<double> dist2(points.size());
  for (size_t i = 0; i < points.size(); ++i) dist2[i] = squared_distance(points[i], centroids[0]);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (double d : dist2) total += d;
    size_t pick;
    if (total <= 0.0) {
      // All remaining mass on already-chosen points; fall back to uniform.
      pick = static_cast<size_t>(uniform01(rng) * points.size());
      if (pick >= points.size()) pick = points.size() - 1;
    } else {
      pick = weighted_pick(dist2, total, rng);
    }
    centroids.push_back(points[pick]);
    for (size_t i = 0; i < points.size(); ++i)
      dist2[i] = std::min(dist2[i], squared_distance(points[i], centroids.back()));
  }
  return centroids;
}

}  // namespace

std::vector<Trajectory> build_trajectories(const Snapshot& snapshot,
                                           const std::vector<int>& offsets,
                                           bool dataset_papers_only) {
  if (offsets.empty()) throw DataError("trajectory offsets must be non-empty");
  for (size_t i = 1; i < offsets.size(); ++i)
    if (offsets[i] <= offsets[i - 1]) throw DataError("trajectory offsets must increase");

  std::set<std::string> wanted;
  if (dataset_papers_only) {
    for (const auto& [id, d] : snapshot.datasets)
      if (d.paper_id) wanted.insert(*d.paper_id);
  } else {
    for (const auto& [id, p] : snapshot.papers) wanted.insert(id);
  }

  auto coverage = snapshot.max_observed_year();
  int max_offset = offsets.back();

  std::vector<Trajectory> out;
  for (const auto& paper_id : wanted) {
    auto it = snapshot.papers.find(paper_id);
    if (it == snapshot.papers.end()) continue;
    const PaperRecord& paper = it->second;
    if (!paper.publication_year || !paper.cits_fetched) continue;
    if (!coverage || *paper.publication_year + max_offset > *coverage) continue;

    Trajectory t;
    t.paper_id = paper_id;
    t.offsets = offsets;
    for (int offset : offsets)
      t.values.push_back(
          citations_in_window(snapshot, paper_id, Window3{*paper.publication_year + offset}));
    out.push_back(std::move(t));
  }
  return out;
}

ClusterModel lloyd(const std::vector<std::vector<double>>& points,
                   std::vector<std::vector<double>> centroids) {
  const int k = static_cast<int>(centroids.size());
  const size_t n = points.size();
  const size_t dim = points.empty() ? 0 : points[0].size();

  ClusterModel model;
  model.k = k;
  model.assignments.assign(n, -1);

  for (int iteration = 0; iteration < 500; ++iteration) {
    // Assignment step; ties go to the lowest centroid index.
    bool changed = false;
    double inertia = 0.0;
    for (size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(points[i], centroids[0]);
      for (int c = 1; c < k; ++c) {
        double d = squared_distance(points[i], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (model.assignments[i] != best) {
        model.assignments[i] = best;
        changed = true;
      }
      inertia += best_d;
    }
    if (!model.inertia_trace.empty() &&
        inertia > model.inertia_trace.back() + 1e-9 * std::max(1.0, model.inertia_trace.back()))
      throw std::logic_error("kmeans inertia increased between iterations");
    model.inertia_trace.push_back(inertia);
    model.inertia = inertia;
    if (!changed && iteration > 0) break;

    // Update step: centroid = mean of its members; empty clusters move to the
    // point farthest from its assigned centroid.
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<int64_t> counts(k, 0);
    for (size_t i = 0; i < n; ++i) {
      counts[model.assignments[i]]++;
      for (size_t d = 0; d < dim; ++d) sums[model.assignments[i]][d] += points[i][d];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        size_t farthest = 0;
        double worst = -1.0;
        for (size_t i = 0; i < n; ++i) {
          double d = squared_distance(points[i], centroids[model.assignments[i]]);
          if (d > worst) {
            worst = d;
            farthest = i;
          }
        }
        centroids[c] = points[farthest];
        continue;
      }
      for (size_t d = 0; d < dim; ++d) centroids[c][d] = sums[c][d] / counts[c];
    }
  }
  model.centroids = std::move(centroids);
  return model;
}

ClusterModel kmeans(const std::vector<std::vector<double>>& points, int k, uint64_t seed) {
  if (k < 1) throw DataError("k must be positive");
  if (static_cast<size_t>(k) > points.size())
    throw DataError("k (" + std::to_string(k) + ") exceeds the number of points (" +
                    std::to_string(points.size()) + ")");
  for (const auto& p : points)
    if (p.size() != points[0].size()) throw DataError("points must share one dimension");

  std::mt19937_64 rng(seed);
  return lloyd(points, seed_plus_plus(points, k, rng));
}

ClusterModel kmeans_best_of(const std::vector<std::vector<double>>& points, int k, uint64_t seed,
                            int restarts) {
  if (restarts < 1) throw DataError("restarts must be positive");
  ClusterModel best;
  for (int r = 0; r < restarts; ++r) {
    ClusterModel model = kmeans(points, k, seed + 0x9e3779b97f4a7c15ULL * (r + 1));
    if (r == 0 || model.inertia < best.inertia) best = std::move(model);
  }
  return best;
}

ElbowSeries elbow(const std::vector<std::vector<double>>& points, int k_min, int k_max,
                  uint64_t seed, int restarts) {
  if (k_min < 1 || k_max < k_min) throw DataError("invalid k range");
  if (static_cast<size_t>(k_max) > points.size())
    throw DataError("k range exceeds the number of points");
  ElbowSeries series;
  for (int k = k_min; k <= k_max; ++k) {
    ClusterModel model = kmeans_best_of(points, k, seed + 1315423911ULL * k, restarts);
    if (!series.inertia_by_k.empty() &&
        model.inertia > series.inertia_by_k.back().second + 1e-9)
      series.warnings.push_back("inertia increased from k=" + std::to_string(k - 1) + " to k=" +
                                std::to_string(k) + "; consider more restarts");
    series.inertia_by_k.emplace_back(k, model.inertia);
  }
  return series;
}

}  // namespace influ
