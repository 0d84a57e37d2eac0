#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "influ/corpus.hpp"
#include "influ/http_client.hpp"

namespace influ {

// Maps keys of an ad-datasets style JSON document onto DatasetEntry fields.
struct FieldMapping {
  std::string id = "id";
  std::string name = "name";
  std::string doi = "doi";
  std::string arxiv = "arxiv_id";
  std::string frames = "n_frames";
  std::string sensors = "n_sensors";
  std::string year = "publication_year";
  bool strict = false;  // strict: a mapped key missing from a record is an error
};

struct AdDatasetsLoad {
  std::vector<DatasetEntry> entries;
  int skipped = 0;          // records without a usable id
  int non_ingestible = 0;   // entries lacking both doi and arxiv id
  std::vector<std::string> warnings;
};

// Reads a JSON array (or object with a top-level array) of dataset records
// from a file path or http(s) URL. Unmappable or non-numeric size fields stay
// absent and produce warnings. Throws ParseError on malformed JSON and
// SourceError on unreachable sources.
AdDatasetsLoad load_ad_datasets(const std::string& path_or_url, const FieldMapping& mapping = {});

struct FetchPlan {
  bool fetch_references = true;
  bool fetch_citations = true;
  bool fetch_author_papers = true;
  double graph_rate = 20.0;
  double graph_burst = 10.0;
  double altmetric_rate = 20.0;
  double altmetric_burst = 10.0;
  RetryPolicy retry;
  int64_t max_edges_per_paper = 10000;  // pagination hard cap per paper
  int workers = 4;
  std::string graph_base_url;
  std::string altmetric_base_url;
  std::string graph_api_key;   // from SS_API_KEY unless overridden
  std::string altmetric_key;   // from ALTMETRIC_KEY unless overridden
  std::string cache_dir;
  bool offline = false;
};

struct GraphDelta {
  std::map<std::string, PaperRecord> papers;
  std::map<std::string, AuthorRecord> authors;
  std::vector<CitationEdge> edges;  // deduplicated, sorted
  std::map<std::string, std::string> resolved;  // requested external id -> paper id
  std::vector<std::string> misses;     // external ids the source does not know
  std::vector<std::string> truncated;  // paper ids whose citation lists hit the cap
  std::vector<std::string> failed;     // external ids abandoned after retries
  int64_t retries = 0;
};

// Pulls the nested paper graph for the given external ids ("DOI:..." or
// "ARXIV:..."): the paper itself, its references with their citing years, its
// authors with their publications and those publications' citing years, and
// its citing papers with their own citing years.
GraphDelta fetch_paper_graph(const std::vector<std::string>& external_ids, const FetchPlan& plan);

struct AltmetricFetch {
  std::map<std::string, AltmetricRecord> records_by_doi;  // paper_key left empty
  std::vector<std::string> misses;                        // DOIs not tracked
  int64_t retries = 0;
};

// One record per tracked DOI; 404s are expected and land in misses. An auth
// failure (401/403) is fatal.
AltmetricFetch fetch_altmetric(const std::vector<std::string>& dois, const FetchPlan& plan);

struct IngestOutcome {
  Snapshot snapshot;
  bool partial = false;  // a non-mandatory source was unavailable
  std::vector<std::string> warnings;
  std::map<std::string, int64_t> counts;  // per-source tallies for reporting
  std::vector<std::string> graph_misses;
  std::vector<std::string> altmetric_misses;
};

// Full pipeline: datasets -> paper graph -> altmetrics -> merged snapshot.
// Re-running against unchanged sources yields an identical snapshot;
// created_at is caller-supplied for that reason.
IngestOutcome ingest_all(const std::string& ad_datasets_path, const FieldMapping& mapping,
                         const FetchPlan& plan,
                         const std::string& created_at = "1970-01-01T00:00:00Z");

}  // namespace influ
