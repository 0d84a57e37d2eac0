#include "influ/influence.hpp"

#include <algorithm>

#include "influ/common.hpp"

namespace influ {

std::optional<double> influence_feature_value(const FeatureVector& fv, int index) {
  auto as_double = [](const auto& opt) -> std::optional<double> {
    if (!opt) return std::nullopt;
    return static_cast<double>(*opt);
  };
  switch (index) {
    case 0: return as_double(fv.n_cit3);
    case 1: return as_double(fv.cit_h3);
    case 2: return as_double(fv.ref_h3);
    case 3: return as_double(fv.aut_mu_h3);
    case 4: return as_double(fv.n_frames);
    case 5: return as_double(fv.n_sensors);
    case 6: return as_double(fv.aas_curr);
    case 7: return as_double(fv.n_readers);
    default: throw DataError("influence feature index out of range");
  }
}

double percentile_rank(double value, const std::vector<double>& sorted_peer_values) {
  if (sorted_peer_values.empty()) throw DataError("empty peer group for percentile_rank");
  auto at_or_below =
      std::upper_bound(sorted_peer_values.begin(), sorted_peer_values.end(), value) -
      sorted_peer_values.begin();
  return static_cast<double>(at_or_below) / static_cast<double>(sorted_peer_values.size());
}

PercentileTable build_percentile_table(const std::vector<FeatureVector>& peer_group,
                                       int eval_year) {
  PercentileTable table;
  table.eval_year = eval_year;
  for (const auto& fv : peer_group) {
    for (int i = 0; i < kInfluenceFeatureCount; ++i) {
      auto value = influence_feature_value(fv, i);
      if (value) table.sorted_values[i].push_back(*value);
    }
  }
  for (auto& values : table.sorted_values) std::sort(values.begin(), values.end());
  return table;
}

std::optional<double> mean_of_available(
    const std::array<std::optional<double>, kInfluenceFeatureCount>& percentiles,
    int* n_available) {
  double sum = 0.0;
  int n = 0;
  for (const auto& p : percentiles) {
    if (!p) continue;
    sum += *p;
    ++n;
  }
  if (n_available) *n_available = n;
  if (n == 0) return std::nullopt;
  return sum / n;
}

InfluenceResult influence_score(const FeatureVector& fv, const PercentileTable& table) {
  InfluenceResult result;
  result.dataset_id = fv.dataset_id;
  result.eval_year = table.eval_year;
  for (int i = 0; i < kInfluenceFeatureCount; ++i) {
    auto value = influence_feature_value(fv, i);
    if (!value || table.sorted_values[i].empty()) continue;
    result.percentiles[i] = percentile_rank(*value, table.sorted_values[i]);
  }
  result.is_score = mean_of_available(result.percentiles, &result.n_available);
  return result;
}

namespace {

// Datasets published by eval_year, with their features at that year.
std::vector<FeatureVector> peer_features(const Snapshot& s, int eval_year) {
  std::vector<FeatureVector> peers;
  for (const auto& [id, dataset] : s.datasets) {
    FeatureVector fv = extract_features(s, id, eval_year);
    if (fv.a_pub && *fv.a_pub <= eval_year) peers.push_back(std::move(fv));
  }
  return peers;
}

}  // namespace

std::vector<InfluenceResult> rank_datasets(const Snapshot& s, int eval_year,
                                           std::optional<int> release_year) {
  auto peers = peer_features(s, eval_year);
  PercentileTable table = build_percentile_table(peers, eval_year);

  std::vector<InfluenceResult> results;
  for (const auto& fv : peers) {
    if (release_year && fv.a_pub != release_year) continue;
    results.push_back(influence_score(fv, table));
  }
  std::sort(results.begin(), results.end(), [](const InfluenceResult& a, const InfluenceResult& b) {
    double sa = a.is_score.value_or(-1.0);
    double sb = b.is_score.value_or(-1.0);
    if (sa != sb) return sa > sb;
    return a.dataset_id < b.dataset_id;
  });
  return results;
}

std::vector<InfluenceResult> score_history(const Snapshot& s, const std::string& dataset_id,
                                           int first_year, int last_year) {
  if (!s.datasets.count(dataset_id)) throw DataError("unknown dataset: " + dataset_id);
  std::vector<InfluenceResult> series;
  for (int year = first_year; year <= last_year; ++year) {
    FeatureVector fv = extract_features(s, dataset_id, year);
    if (!fv.a_pub || *fv.a_pub > year) {
      InfluenceResult empty;
      empty.dataset_id = dataset_id;
      empty.eval_year = year;
      series.push_back(std::move(empty));
      continue;
    }
    auto peers = peer_features(s, year);
    PercentileTable table = build_percentile_table(peers, year);
    series.push_back(influence_score(fv, table));
  }
  return series;
}

}  // namespace influ
