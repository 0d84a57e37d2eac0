#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "influ/corpus.hpp"

namespace influ {

// Citations in a trailing 3-year window at fixed offsets from the paper's
// publication year (negative offsets capture preprint citations).
struct Trajectory {
  std::string paper_id;
  std::vector<int> offsets;
  std::vector<int64_t> values;
};

inline const std::vector<int> kDefaultTrajectoryOffsets = {-1, 0, 1, 2};

// One trajectory per paper with a publication year and a fetched citation
// list. Papers whose last offset reaches past the snapshot's coverage are
// excluded. By default only papers linked from datasets are featurized.
std::vector<Trajectory> build_trajectories(
    const Snapshot& snapshot, const std::vector<int>& offsets = kDefaultTrajectoryOffsets,
    bool dataset_papers_only = true);

struct ClusterModel {
  int k = 0;
  std::vector<std::vector<double>> centroids;
  std::vector<int> assignments;       // aligned with the input points
  double inertia = 0.0;               // total within-cluster squared distance
  std::vector<double> inertia_trace;  // per Lloyd iteration, non-increasing
};

// Lloyd iterations from the given centroids until the assignment fixpoint
// (cap 500). Empty clusters are reseeded to the point farthest from its
// assigned centroid. Deterministic; independent of point order.
ClusterModel lloyd(const std::vector<std::vector<double>>& points,
                   std::vector<std::vector<double>> centroids);

// k-means++ seeding followed by Lloyd. Fully reproducible from (points, k,
// seed). Throws DataError when k exceeds the number of points.
ClusterModel kmeans(const std::vector<std::vector<double>>& points, int k, uint64_t seed);

// Best of `restarts` seeded runs by inertia.
ClusterModel kmeans_best_of(const std::vector<std::vector<double>>& points, int k, uint64_t seed,
                            int restarts);

struct ElbowSeries {
  std::vector<std::pair<int, double>> inertia_by_k;
  std::vector<std::string> warnings;  // restart-budget violations of monotonicity
};

ElbowSeries elbow(const std::vector<std::vector<double>>& points, int k_min, int k_max,
                  uint64_t seed, int restarts = 10);

}  // namespace influ
