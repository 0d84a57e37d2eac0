#include "influ/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "influ/common.hpp"

namespace influ {

namespace {

const PaperRecord& require_paper(const Snapshot& s, const std::string& paper_id) {
  auto it = s.papers.find(paper_id);
  if (it == s.papers.end()) throw DataError("unknown paper key: " + paper_id);
  return it->second;
}

// Citing papers of paper_id, derived from the edge set.
std::vector<std::string> citing_paper_ids(const Snapshot& s, const std::string& paper_id) {
  std::vector<std::string> ids;
  for (const auto& e : s.citations_to(paper_id)) ids.push_back(e.citing_paper_id);
  return ids;
}

bool citations_known(const Snapshot& s, const std::string& paper_id) {
  auto it = s.papers.find(paper_id);
  return it != s.papers.end() && it->second.cits_fetched;
}

std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  std::string out(buf, r.ptr);
  return out;
}

template <typename T>
void append_cell(std::string& row, const std::optional<T>& value) {
  row += ',';
  if (!value) return;
  if constexpr (std::is_floating_point_v<T>)
    row += format_double(*value);
  else
    row += std::to_string(*value);
}

}  // namespace

int64_t h_index(std::vector<int64_t> counts) {
  std::sort(counts.begin(), counts.end(), std::greater<int64_t>());
  int64_t h = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] >= static_cast<int64_t>(i + 1))
      h = static_cast<int64_t>(i + 1);
    else
      break;
  }
  return h;
}

int64_t citations_in_window(const Snapshot& s, const std::string& paper_id, Window3 window) {
  require_paper(s, paper_id);
  int64_t count = 0;
  for (const auto& e : s.citations_to(paper_id))
    if (e.citing_year && window.contains(*e.citing_year)) ++count;
  return count;
}

std::optional<int64_t> reference_h3(const Snapshot& s, const std::string& paper_id,
                                    Window3 window) {
  const PaperRecord& paper = require_paper(s, paper_id);
  if (!paper.refs_fetched) return std::nullopt;
  std::vector<int64_t> counts;
  counts.reserve(paper.reference_ids.size());
  for (const auto& ref : paper.reference_ids) {
    if (!citations_known(s, ref)) return std::nullopt;
    counts.push_back(citations_in_window(s, ref, window));
  }
  return h_index(std::move(counts));
}

std::optional<double> author_mean_h3(const Snapshot& s, const std::string& paper_id,
                                     Window3 window) {
  const PaperRecord& paper = require_paper(s, paper_id);
  double sum = 0.0;
  int n = 0;
  for (const auto& author_id : paper.author_ids) {
    auto it = s.authors.find(author_id);
    if (it == s.authors.end() || !it->second.papers_fetched) continue;
    std::vector<int64_t> counts;
    counts.reserve(it->second.paper_ids.size());
    for (const auto& pub : it->second.paper_ids)
      if (s.papers.count(pub)) counts.push_back(citations_in_window(s, pub, window));
    sum += static_cast<double>(h_index(std::move(counts)));
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::optional<int64_t> citation_h3(const Snapshot& s, const std::string& paper_id,
                                   Window3 window) {
  const PaperRecord& paper = require_paper(s, paper_id);
  if (!paper.cits_fetched) return std::nullopt;
  std::vector<int64_t> counts;
  for (const auto& citing : citing_paper_ids(s, paper_id)) {
    if (!citations_known(s, citing)) return std::nullopt;
    counts.push_back(citations_in_window(s, citing, window));
  }
  return h_index(std::move(counts));
}

int64_t citations_by_year_end(const Snapshot& s, const std::string& paper_id, int year) {
  require_paper(s, paper_id);
  int64_t count = 0;
  for (const auto& e : s.citations_to(paper_id))
    if (e.citing_year && *e.citing_year <= year) ++count;
  return count;
}

FeatureVector extract_features(const Snapshot& s, const std::string& dataset_id, int eval_year) {
  auto it = s.datasets.find(dataset_id);
  if (it == s.datasets.end()) throw DataError("unknown dataset: " + dataset_id);
  const DatasetEntry& dataset = it->second;

  FeatureVector fv;
  fv.dataset_id = dataset_id;
  fv.eval_year = eval_year;
  fv.n_frames = dataset.n_frames;
  fv.n_sensors = dataset.n_sensors;

  const PaperRecord* paper = nullptr;
  if (dataset.paper_id) {
    auto pit = s.papers.find(*dataset.paper_id);
    if (pit != s.papers.end()) paper = &pit->second;
  }
  if (!paper) return fv;  // dataset-level features only

  Window3 window{eval_year};
  fv.a_pub = paper->publication_year;
  fv.ref_h3 = reference_h3(s, paper->paper_id, window);
  fv.aut_mu_h3 = author_mean_h3(s, paper->paper_id, window);
  if (paper->cits_fetched) fv.n_cit3 = citations_in_window(s, paper->paper_id, window);
  fv.cit_h3 = citation_h3(s, paper->paper_id, window);

  auto ait = s.altmetrics.find(paper->paper_id);
  if (ait != s.altmetrics.end()) {
    fv.aas_curr = ait->second.aas_curr;
    fv.aas_3m = ait->second.aas_3m;
    fv.n_readers = ait->second.n_readers;
  }

  // Table-1 availability says cit_h3 is only meaningful three years past
  // publication; earlier values are kept but flagged.
  if (fv.cit_h3 && fv.a_pub && eval_year < *fv.a_pub + 3)
    fv.quality_flags.push_back("cit_h3_within_3y_of_publication");
  // Current attention score and reader counts have no history; historical
  // evaluations reuse the snapshot-time values.
  auto snapshot_year = s.max_observed_year();
  if ((fv.aas_curr || fv.n_readers) && snapshot_year && eval_year < *snapshot_year)
    fv.quality_flags.push_back("altmetric_values_stale");
  return fv;
}

std::vector<FeatureVector> extract_all_features(const Snapshot& s, int eval_year) {
  std::vector<FeatureVector> rows;
  rows.reserve(s.datasets.size());
  for (const auto& [id, dataset] : s.datasets) rows.push_back(extract_features(s, id, eval_year));
  return rows;
}

std::string feature_table_csv(const std::vector<FeatureVector>& rows) {
  std::string out =
      "dataset_id,eval_year,n_frames,n_sensors,a_pub,ref_h3,aut_mu_h3,n_cit3,cit_h3,"
      "aas_curr,aas_3m,n_readers,flags\n";
  for (const auto& fv : rows) {
    std::string row = fv.dataset_id + ',' + std::to_string(fv.eval_year);
    append_cell(row, fv.n_frames);
    append_cell(row, fv.n_sensors);
    append_cell(row, fv.a_pub);
    append_cell(row, fv.ref_h3);
    append_cell(row, fv.aut_mu_h3);
    append_cell(row, fv.n_cit3);
    append_cell(row, fv.cit_h3);
    append_cell(row, fv.aas_curr);
    append_cell(row, fv.aas_3m);
    append_cell(row, fv.n_readers);
    row += ',';
    for (size_t i = 0; i < fv.quality_flags.size(); ++i) {
      if (i) row += ';';
      row += fv.quality_flags[i];
    }
    out += row + "\n";
  }
  return out;
}

}  // namespace influ
