#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "influ/metrics.hpp"

namespace influ {

// The eight features that enter the Influence Score, in report column order
// (n_cit3 first, matching the ranked-report layout).
inline constexpr std::array<const char*, 8> kInfluenceFeatureNames = {
    "n_cit3", "cit_h3", "ref_h3", "aut_mu_h3", "n_frames", "n_sensors", "aas_curr", "n_readers"};
inline constexpr int kInfluenceFeatureCount = 8;

// Raw value of influence feature `index` from a feature vector, absent when
// the underlying data is missing.
std::optional<double> influence_feature_value(const FeatureVector& fv, int index);

// Weak-inequality percentile: #{v <= value} / N. The maximum always scores
// 1.0 and the minimum 1/N; ties share identical ranks. Throws DataError on an
// empty peer group.
double percentile_rank(double value, const std::vector<double>& sorted_peer_values);

// Per-feature sorted value lists over the peer group; built only from
// datasets where the feature is present.
struct PercentileTable {
  int eval_year = 0;
  std::array<std::vector<double>, kInfluenceFeatureCount> sorted_values;
};

PercentileTable build_percentile_table(const std::vector<FeatureVector>& peer_group,
                                       int eval_year);

struct InfluenceResult {
  std::string dataset_id;
  int eval_year = 0;
  std::array<std::optional<double>, kInfluenceFeatureCount> percentiles;
  int n_available = 0;
  std::optional<double> is_score;  // in (0,1] when any feature is available
};

// Plain arithmetic mean over the present percentiles; absent when none are.
std::optional<double> mean_of_available(
    const std::array<std::optional<double>, kInfluenceFeatureCount>& percentiles,
    int* n_available = nullptr);

// Percentile each available feature against the table and average them.
InfluenceResult influence_score(const FeatureVector& fv, const PercentileTable& table);

// Scores every dataset published by eval_year against that peer group.
// Sorted by descending score, ties broken by dataset id. When release_year is
// given, only datasets first published that year are reported (the peer group
// is unaffected).
std::vector<InfluenceResult> rank_datasets(const Snapshot& snapshot, int eval_year,
                                           std::optional<int> release_year = std::nullopt);

// One result per year in [first_year, last_year], each scored against that
// year's peer group. Years before the dataset's publication yield an entry
// with no available features.
std::vector<InfluenceResult> score_history(const Snapshot& snapshot,
                                           const std::string& dataset_id, int first_year,
                                           int last_year);

}  // namespace influ
