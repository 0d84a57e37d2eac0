#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace influ {

struct DatasetEntry {
  std::string dataset_id;
  std::string name;
  std::optional<std::string> doi;
  std::optional<std::string> arxiv_id;
  std::optional<std::string> paper_id;  // accompanying publication, once resolved
  std::optional<int64_t> n_frames;      // >= 0
  std::optional<int64_t> n_sensors;     // >= 1
  std::optional<int> publication_year;

  // Entries without any external identifier cannot be enriched from the
  // scholarly sources; they are kept and flagged, never dropped.
  bool ingestible() const { return doi.has_value() || arxiv_id.has_value(); }
};

struct PaperRecord {
  std::string paper_id;
  std::string title;
  std::optional<int> publication_year;
  std::vector<std::string> author_ids;     // ordered, duplicate-free
  std::vector<std::string> reference_ids;  // duplicate-free
  std::map<std::string, std::string> external_ids;  // e.g. "doi", "arxiv"
  bool refs_fetched = false;  // reference list is known (may be empty)
  bool cits_fetched = false;  // citing list is known (may be empty)
};

struct AuthorRecord {
  std::string author_id;
  std::string name;
  std::vector<std::string> paper_ids;  // duplicate-free, sorted
  bool papers_fetched = false;         // publication list is known (may be empty)
};

struct CitationEdge {
  std::string citing_paper_id;
  std::string cited_paper_id;
  // Year of the citing paper. May precede the cited paper's publication year
  // (preprint citations) and may be missing entirely.
  std::optional<int> citing_year;
  bool self_citation = false;

  friend bool operator<(const CitationEdge& a, const CitationEdge& b) {
    if (a.cited_paper_id != b.cited_paper_id) return a.cited_paper_id < b.cited_paper_id;
    return a.citing_paper_id < b.citing_paper_id;
  }
};

struct AltmetricRecord {
  std::string paper_key;
  double aas_curr = 0.0;            // current attention score, >= 0
  std::optional<double> aas_3m;     // three-month percentile in [0, 100]
  std::map<std::string, int64_t> readers_by_service;
  int64_t n_readers = 0;            // always the sum over services

  int64_t service_sum() const {
    int64_t total = 0;
    for (const auto& [service, count] : readers_by_service) total += count;
    return total;
  }
};

struct SnapshotHeader {
  int format_version = 1;
  std::string created_at = "1970-01-01T00:00:00Z";
  std::map<std::string, std::string> source_versions;  // free-form provenance
};

// Frozen corpus state. Immutable after load/finalize by convention; all
// downstream computation reads it concurrently without synchronization.
struct Snapshot {
  SnapshotHeader header;
  std::map<std::string, DatasetEntry> datasets;
  std::map<std::string, PaperRecord> papers;
  std::map<std::string, AuthorRecord> authors;
  std::vector<CitationEdge> citations;  // sorted by (cited, citing)
  std::map<std::string, AltmetricRecord> altmetrics;  // keyed by paper id

  // Edges pointing at the given paper. Requires rebuild_index() after any
  // direct mutation; builder and loader call it for you.
  const std::vector<CitationEdge>& citations_to(const std::string& paper_id) const;
  void rebuild_index();

  // Latest calendar year seen anywhere in the data.
  std::optional<int> max_observed_year() const;

 private:
  std::map<std::string, std::vector<CitationEdge>> by_cited_;
};

// Accumulates entities with commutative merge semantics so that the result is
// independent of insertion order (and therefore of fetch scheduling).
class SnapshotBuilder {
 public:
  void add_dataset(DatasetEntry entry);
  void merge_paper(PaperRecord record);
  void merge_author(AuthorRecord record);
  void add_citation(CitationEdge edge);
  void merge_altmetric(AltmetricRecord record);

  Snapshot finalize(SnapshotHeader header);

 private:
  Snapshot snapshot_;
  std::map<std::pair<std::string, std::string>, CitationEdge> edges_;
};

// Referential-integrity and invariant check. Returns sorted warnings; never
// mutates. Edge *citing* ids are allowed to be unmaterialized leaves (second
// level citation sources); everything else must resolve.
std::vector<std::string> validate(const Snapshot& snapshot);

// Writes the line-delimited snapshot format. Equal logical content yields
// identical bytes. Throws DataError when validation warns and allow_dangling
// is unset.
void save_snapshot(const Snapshot& snapshot, const std::string& path,
                   bool allow_dangling = false);

struct LoadResult {
  Snapshot snapshot;
  std::vector<std::string> warnings;
};

// Throws ParseError (with the line number of the last complete record) on
// malformed input and DataError on unsupported versions. Dangling references
// are reported in warnings and kept.
LoadResult load_snapshot(const std::string& path);

struct TimelinePoint {
  int year = 0;
  int64_t datasets = 0;
  int64_t citations = 0;
  int64_t cumulative_datasets = 0;
  int64_t cumulative_citations = 0;
};

// Year-by-year counts of published datasets and of citations received by
// dataset papers, with cumulative variants. Years are contiguous between the
// first and last observed; an empty snapshot yields an empty series.
std::vector<TimelinePoint> build_publication_timeline(const Snapshot& snapshot);

}  // namespace influ
