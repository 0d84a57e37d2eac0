#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "influ/corpus.hpp"

namespace influ {

// A trailing three-year citation window, inclusive on both ends.
struct Window3 {
  int end_year = 0;
  int first_year() const { return end_year - 2; }
  bool contains(int year) const { return year >= first_year() && year <= end_year; }
};

// Largest h such that at least h entries are >= h.
int64_t h_index(std::vector<int64_t> citation_counts);

// Citations received by paper_id with citing_year inside the window.
// Year-less edges never count. Throws DataError for unknown papers.
int64_t citations_in_window(const Snapshot& snapshot, const std::string& paper_id, Window3 window);

// h-index over the windowed citation counts of the paper's references.
// Absent while the reference list or any reference's citations are unfetched.
std::optional<int64_t> reference_h3(const Snapshot& snapshot, const std::string& paper_id,
                                    Window3 window);

// Arithmetic mean of the authors' h-indices, each over the windowed citation
// counts of that author's publications. Absent without fetched author data.
std::optional<double> author_mean_h3(const Snapshot& snapshot, const std::string& paper_id,
                                     Window3 window);

// h-index over the windowed citation counts of the papers citing paper_id.
// Absent while the citing list or any citing paper's own citations are unfetched.
std::optional<int64_t> citation_h3(const Snapshot& snapshot, const std::string& paper_id,
                                   Window3 window);

// Citations received by year's end (citing_year <= year), used as the
// regression dependent. Year-less edges are excluded.
int64_t citations_by_year_end(const Snapshot& snapshot, const std::string& paper_id, int year);

// The full feature catalogue for one dataset at one evaluation year. Features
// whose source data is missing stay absent; they are never coerced to zero.
struct FeatureVector {
  std::string dataset_id;
  int eval_year = 0;
  std::optional<int64_t> n_frames;
  std::optional<int64_t> n_sensors;
  std::optional<int> a_pub;
  std::optional<int64_t> ref_h3;
  std::optional<double> aut_mu_h3;
  std::optional<int64_t> n_cit3;
  std::optional<int64_t> cit_h3;
  std::optional<double> aas_curr;
  std::optional<double> aas_3m;
  std::optional<int64_t> n_readers;
  std::vector<std::string> quality_flags;
};

FeatureVector extract_features(const Snapshot& snapshot, const std::string& dataset_id,
                               int eval_year);

// One vector per dataset, ordered by dataset id.
std::vector<FeatureVector> extract_all_features(const Snapshot& snapshot, int eval_year);

// CSV export, one row per (dataset, eval_year); absent values are empty
// cells; feature columns follow the catalogue order above.
std::string feature_table_csv(const std::vector<FeatureVector>& rows);

}  // namespace influ
