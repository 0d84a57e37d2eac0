#include "influ/ingest.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "influ/common.hpp"

namespace influ {

using nlohmann::json;

namespace {

// Runs fn(i) for i in [0, count) on a bounded pool; rethrows the first error.
template <typename Fn>
void parallel_for(size_t count, int workers, Fn&& fn) {
  if (count == 0) return;
  int pool = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  for (int t = 0; t < pool; ++t) threads.emplace_back(body);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

std::optional<int64_t> parse_count(const json& value, const std::string& context,
                                   std::vector<std::string>& warnings) {
  if (value.is_number_integer()) return value.get<int64_t>();
  if (value.is_number_unsigned()) return static_cast<int64_t>(value.get<uint64_t>());
  if (value.is_number_float()) {
    double d = value.get<double>();
    if (d >= 0 && d == std::floor(d)) return static_cast<int64_t>(d);
  }
  if (value.is_string()) {
    const std::string& s = value.get<std::string>();
    int64_t parsed = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), parsed);
    if (ec == std::errc{} && ptr == s.data() + s.size()) return parsed;
  }
  warnings.push_back(context + ": non-numeric value " + value.dump() + " left absent");
  return std::nullopt;
}

std::optional<std::string> parse_string_field(const json& record, const std::string& key) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) {
    std::string s = it->get<std::string>();
    if (s.empty()) return std::nullopt;
    return s;
  }
  return it->dump();
}

struct CitedBy {
  std::string citing_id;
  std::optional<int> year;
};

// One fully fetched paper as served by the academic-graph source.
struct GraphPaper {
  std::string paper_id;
  std::string title;
  std::optional<int> year;
  std::vector<std::pair<std::string, std::string>> authors;  // (id, name)
  std::vector<std::string> reference_ids;
  std::vector<CitedBy> citations;
  bool truncated = false;
};

std::optional<int> parse_year(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (it->is_number_integer()) return it->get<int>();
  return std::nullopt;
}

std::vector<CitedBy> parse_citation_list(const json& list) {
  std::vector<CitedBy> out;
  if (!list.is_array()) return out;
  for (const auto& c : list) {
    if (!c.is_object() || !c.contains("paper_id")) continue;
    out.push_back({c["paper_id"].get<std::string>(), parse_year(c, "year")});
  }
  return out;
}

// Fetches one paper with its citation list paginated to exhaustion (or the
// per-paper cap). Returns nullopt on 404.
std::optional<GraphPaper> fetch_graph_paper(HttpSource& source, const std::string& id,
                                            int64_t max_edges) {
  GraphPaper paper;
  std::string cursor;
  for (;;) {
    std::string path = "/paper/" + id;
    if (!cursor.empty()) path += "?cursor=" + cursor;
    auto res = source.get(path);
    if (res.status == 404) return std::nullopt;
    if (res.status != 200)
      throw SourceError("academic-graph returned status " + std::to_string(res.status) + " for " +
                        id);
    json j = json::parse(res.body, nullptr, false);
    if (j.is_discarded())
      throw ParseError("academic-graph returned malformed JSON for " + id);

    if (cursor.empty()) {
      paper.paper_id = j.value("paper_id", "");
      if (paper.paper_id.empty())
        throw ParseError("academic-graph response for " + id + " lacks paper_id");
      paper.title = j.value("title", "");
      paper.year = parse_year(j, "year");
      if (j.contains("authors") && j["authors"].is_array())
        for (const auto& a : j["authors"])
          if (a.contains("author_id"))
            paper.authors.emplace_back(a["author_id"].get<std::string>(), a.value("name", ""));
      if (j.contains("references") && j["references"].is_array())
        for (const auto& r : j["references"])
          if (r.contains("paper_id")) paper.reference_ids.push_back(r["paper_id"].get<std::string>());
    }
    for (auto& c : parse_citation_list(j.value("citations", json::array()))) {
      if (static_cast<int64_t>(paper.citations.size()) >= max_edges) {
        paper.truncated = true;
        break;
      }
      paper.citations.push_back(std::move(c));
    }
    if (paper.truncated) break;
    auto next = j.find("next");
    if (next == j.end() || next->is_null() || next->get<std::string>().empty()) break;
    cursor = next->get<std::string>();
  }
  return paper;
}

struct AuthorPub {
  std::string paper_id;
  std::optional<int> year;
  std::vector<CitedBy> citations;
};

// nullopt when the source does not know the author (distinct from an author
// with an empty publication list).
std::optional<std::vector<AuthorPub>> fetch_author_pubs(HttpSource& source,
                                                        const std::string& author_id) {
  std::vector<AuthorPub> pubs;
  std::string cursor;
  for (;;) {
    std::string path = "/author/" + author_id + "/papers";
    if (!cursor.empty()) path += "?cursor=" + cursor;
    auto res = source.get(path);
    if (res.status == 404) return std::nullopt;
    if (res.status != 200)
      throw SourceError("academic-graph returned status " + std::to_string(res.status) +
                        " for author " + author_id);
    json j = json::parse(res.body, nullptr, false);
    if (j.is_discarded())
      throw ParseError("academic-graph returned malformed JSON for author " + author_id);
    if (j.contains("papers") && j["papers"].is_array()) {
      for (const auto& p : j["papers"]) {
        if (!p.contains("paper_id")) continue;
        AuthorPub pub;
        pub.paper_id = p["paper_id"].get<std::string>();
        pub.year = parse_year(p, "year");
        pub.citations = parse_citation_list(p.value("citations", json::array()));
        pubs.push_back(std::move(pub));
      }
    }
    auto next = j.find("next");
    if (next == j.end() || next->is_null() || next->get<std::string>().empty()) break;
    cursor = next->get<std::string>();
  }
  return pubs;
}

// Everything learned while expanding one target; merged into the shared
// builder in deterministic (sorted) target order.
struct TargetDelta {
  std::vector<PaperRecord> papers;
  std::vector<AuthorRecord> authors;
  std::vector<CitationEdge> edges;
  std::optional<std::string> resolved_paper_id;
  bool miss = false;
  bool failed = false;
  std::vector<std::string> truncated;
};

void add_paper_with_citations(TargetDelta& delta, const GraphPaper& gp, bool refs_known) {
  PaperRecord record;
  record.paper_id = gp.paper_id;
  record.title = gp.title;
  record.publication_year = gp.year;
  for (const auto& [author_id, name] : gp.authors) record.author_ids.push_back(author_id);
  record.reference_ids = gp.reference_ids;
  record.refs_fetched = refs_known;
  record.cits_fetched = true;
  delta.papers.push_back(std::move(record));
  if (gp.truncated) delta.truncated.push_back(gp.paper_id);

  for (const auto& [author_id, name] : gp.authors) {
    AuthorRecord author;
    author.author_id = author_id;
    author.name = name;
    delta.authors.push_back(std::move(author));
  }
  for (const auto& c : gp.citations) {
    CitationEdge edge;
    edge.citing_paper_id = c.citing_id;
    edge.cited_paper_id = gp.paper_id;
    edge.citing_year = c.year;
    edge.self_citation = c.citing_id == gp.paper_id;
    delta.edges.push_back(std::move(edge));
  }
}

TargetDelta expand_target(HttpSource& source, const std::string& external_id,
                          const FetchPlan& plan) {
  TargetDelta delta;
  auto main = fetch_graph_paper(source, external_id, plan.max_edges_per_paper);
  if (!main) {
    delta.miss = true;
    return delta;
  }
  delta.resolved_paper_id = main->paper_id;
  add_paper_with_citations(delta, *main, /*refs_known=*/true);

  // Record the external identifier on the resolved paper.
  {
    PaperRecord& record = delta.papers.front();
    auto colon = external_id.find(':');
    if (colon != std::string::npos) {
      std::string scheme = external_id.substr(0, colon);
      std::transform(scheme.begin(), scheme.end(), scheme.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      record.external_ids[scheme] = external_id.substr(colon + 1);
    }
  }

  if (plan.fetch_references) {
    for (const auto& ref_id : main->reference_ids) {
      auto ref = fetch_graph_paper(source, ref_id, plan.max_edges_per_paper);
      if (ref) add_paper_with_citations(delta, *ref, /*refs_known=*/true);
    }
  }
  if (plan.fetch_citations) {
    std::set<std::string> seen;
    for (const auto& c : main->citations) {
      if (!seen.insert(c.citing_id).second || c.citing_id == main->paper_id) continue;
      auto citing = fetch_graph_paper(source, c.citing_id, plan.max_edges_per_paper);
      if (citing) add_paper_with_citations(delta, *citing, /*refs_known=*/true);
    }
  }
  if (plan.fetch_author_papers) {
    for (const auto& [author_id, name] : main->authors) {
      AuthorRecord author;
      author.author_id = author_id;
      author.name = name;
      auto pubs = fetch_author_pubs(source, author_id);
      if (pubs) {
        author.papers_fetched = true;
        for (const auto& pub : *pubs) {
          author.paper_ids.push_back(pub.paper_id);
          PaperRecord record;
          record.paper_id = pub.paper_id;
          record.publication_year = pub.year;
          record.cits_fetched = true;
          delta.papers.push_back(std::move(record));
          for (const auto& c : pub.citations) {
            CitationEdge edge;
            edge.citing_paper_id = c.citing_id;
            edge.cited_paper_id = pub.paper_id;
            edge.citing_year = c.year;
            edge.self_citation = c.citing_id == pub.paper_id;
            delta.edges.push_back(std::move(edge));
          }
        }
      }
      delta.authors.push_back(std::move(author));
    }
  }
  return delta;
}

std::string read_source_document(const std::string& path_or_url) {
  if (path_or_url.rfind("http://", 0) == 0 || path_or_url.rfind("https://", 0) == 0) {
    auto split = path_or_url.find('/', path_or_url.find("//") + 2);
    std::string host = split == std::string::npos ? path_or_url : path_or_url.substr(0, split);
    std::string path = split == std::string::npos ? "/" : path_or_url.substr(split);
    httplib::Client client(host);
    client.set_connection_timeout(5, 0);
    auto res = client.Get(path);
    if (!res || res->status != 200)
      throw SourceError("cannot fetch ad-datasets document from " + path_or_url);
    return res->body;
  }
  std::ifstream f(path_or_url, std::ios::binary);
  if (!f) throw SourceError("cannot open ad-datasets document " + path_or_url);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

}  // namespace

AdDatasetsLoad load_ad_datasets(const std::string& path_or_url, const FieldMapping& mapping) {
  std::string body = read_source_document(path_or_url);
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw ParseError("ad-datasets document is not valid JSON");

  const json* records = &doc;
  if (doc.is_object()) {
    // Accept {"datasets": [...]} style wrappers: take the first array value.
    records = nullptr;
    for (const auto& [key, value] : doc.items())
      if (value.is_array()) {
        records = &doc[key];
        break;
      }
    if (!records) throw ParseError("ad-datasets document contains no record array");
  } else if (!doc.is_array()) {
    throw ParseError("ad-datasets document must be a JSON array");
  }

  AdDatasetsLoad out;
  int index = 0;
  for (const auto& record : *records) {
    ++index;
    if (!record.is_object()) {
      out.skipped++;
      out.warnings.push_back("record #" + std::to_string(index) + ": not an object, skipped");
      continue;
    }
    if (mapping.strict) {
      for (const std::string& key : {mapping.id, mapping.name}) {
        if (!record.contains(key))
          throw DataError("record #" + std::to_string(index) + ": mapped key '" + key +
                          "' missing in strict mode");
      }
    }
    auto id = parse_string_field(record, mapping.id);
    if (!id) {
      out.skipped++;
      out.warnings.push_back("record #" + std::to_string(index) + ": no usable id, skipped");
      continue;
    }
    DatasetEntry entry;
    entry.dataset_id = *id;
    entry.name = parse_string_field(record, mapping.name).value_or(*id);
    entry.doi = parse_string_field(record, mapping.doi);
    entry.arxiv_id = parse_string_field(record, mapping.arxiv);
    if (record.contains(mapping.frames))
      entry.n_frames = parse_count(record[mapping.frames], *id + ".n_frames", out.warnings);
    if (record.contains(mapping.sensors))
      entry.n_sensors = parse_count(record[mapping.sensors], *id + ".n_sensors", out.warnings);
    if (record.contains(mapping.year)) {
      auto year = parse_count(record[mapping.year], *id + ".publication_year", out.warnings);
      if (year) entry.publication_year = static_cast<int>(*year);
    }
    if (entry.n_frames && *entry.n_frames < 0) {
      out.warnings.push_back(*id + ": negative n_frames left absent");
      entry.n_frames.reset();
    }
    if (entry.n_sensors && *entry.n_sensors < 1) {
      out.warnings.push_back(*id + ": n_sensors < 1 left absent");
      entry.n_sensors.reset();
    }
    if (!entry.ingestible()) {
      out.non_ingestible++;
      out.warnings.push_back(*id + ": no DOI or arXiv id; kept but not enrichable");
    }
    out.entries.push_back(std::move(entry));
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const DatasetEntry& a, const DatasetEntry& b) { return a.dataset_id < b.dataset_id; });
  return out;
}

GraphDelta fetch_paper_graph(const std::vector<std::string>& external_ids, const FetchPlan& plan) {
  std::vector<std::string> targets(external_ids);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  HttpSource::Options options;
  options.name = "academic_graph";
  options.base_url = plan.graph_base_url;
  options.rate = plan.graph_rate;
  options.burst = plan.graph_burst;
  options.retry = plan.retry;
  options.cache_dir = plan.cache_dir;
  options.offline = plan.offline;
  if (!plan.graph_api_key.empty()) options.headers["x-api-key"] = plan.graph_api_key;
  HttpSource source(options);

  std::vector<TargetDelta> deltas(targets.size());
  parallel_for(targets.size(), plan.workers, [&](size_t i) {
    try {
      deltas[i] = expand_target(source, targets[i], plan);
    } catch (const SourceError&) {
      deltas[i].failed = true;
    }
  });

  GraphDelta out;
  SnapshotBuilder builder;  // reuse merge semantics, then strip the container
  for (size_t i = 0; i < targets.size(); ++i) {
    const TargetDelta& delta = deltas[i];
    if (delta.miss) out.misses.push_back(targets[i]);
    if (delta.failed) out.failed.push_back(targets[i]);
    if (delta.resolved_paper_id) out.resolved[targets[i]] = *delta.resolved_paper_id;
    for (const auto& p : delta.papers) builder.merge_paper(p);
    for (const auto& a : delta.authors) builder.merge_author(a);
    for (const auto& e : delta.edges) builder.add_citation(e);
    for (const auto& t : delta.truncated) out.truncated.push_back(t);
  }
  Snapshot merged = builder.finalize(SnapshotHeader{});
  out.papers = std::move(merged.papers);
  out.authors = std::move(merged.authors);
  out.edges = std::move(merged.citations);
  std::sort(out.truncated.begin(), out.truncated.end());
  out.truncated.erase(std::unique(out.truncated.begin(), out.truncated.end()),
                      out.truncated.end());
  out.retries = source.retries();
  return out;
}

AltmetricFetch fetch_altmetric(const std::vector<std::string>& dois, const FetchPlan& plan) {
  std::vector<std::string> targets(dois);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  HttpSource::Options options;
  options.name = "altmetric";
  options.base_url = plan.altmetric_base_url;
  options.rate = plan.altmetric_rate;
  options.burst = plan.altmetric_burst;
  options.retry = plan.retry;
  options.cache_dir = plan.cache_dir;
  options.offline = plan.offline;
  if (!plan.altmetric_key.empty()) options.headers["x-api-key"] = plan.altmetric_key;
  HttpSource source(options);

  std::vector<std::optional<AltmetricRecord>> records(targets.size());
  std::vector<bool> missed(targets.size(), false);
  std::atomic<bool> auth_failure{false};
  parallel_for(targets.size(), plan.workers, [&](size_t i) {
    auto res = source.get("/doi/" + targets[i]);
    if (res.status == 404) {
      missed[i] = true;
      return;
    }
    if (res.status == 401 || res.status == 403) {
      auth_failure = true;
      return;
    }
    if (res.status != 200)
      throw SourceError("altmetric returned status " + std::to_string(res.status) + " for " +
                        targets[i]);
    json j = json::parse(res.body, nullptr, false);
    if (j.is_discarded()) throw ParseError("altmetric returned malformed JSON for " + targets[i]);
    AltmetricRecord record;
    record.aas_curr = j.value("score", 0.0);
    if (j.contains("three_month_percentile") && j["three_month_percentile"].is_number()) {
      double p = j["three_month_percentile"].get<double>();
      if (p >= 0.0 && p <= 100.0) record.aas_3m = p;
    }
    if (j.contains("readers") && j["readers"].is_object())
      for (const auto& [service, count] : j["readers"].items())
        if (count.is_number()) record.readers_by_service[service] = count.get<int64_t>();
    record.n_readers = record.service_sum();
    records[i] = std::move(record);
  });
  if (auth_failure) throw SourceError("altmetric rejected the API key (auth failure)");

  AltmetricFetch out;
  for (size_t i = 0; i < targets.size(); ++i) {
    if (missed[i]) out.misses.push_back(targets[i]);
    if (records[i]) out.records_by_doi[targets[i]] = std::move(*records[i]);
  }
  out.retries = source.retries();
  return out;
}

namespace {

std::string join(const std::vector<std::string>& xs) {
  std::string out = "[";
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += xs[i];
  }
  return out + "]";
}

}  // namespace

IngestOutcome ingest_all(const std::string& ad_datasets_path, const FieldMapping& mapping,
                         const FetchPlan& plan, const std::string& created_at) {
  IngestOutcome out;

  AdDatasetsLoad datasets;
  try {
    datasets = load_ad_datasets(ad_datasets_path, mapping);
  } catch (const ParseError& e) {
    throw SourceError(std::string("ad-datasets source failed: ") + e.what());
  }
  for (const auto& w : datasets.warnings) out.warnings.push_back("ad-datasets: " + w);

  // DOI preferred over arXiv id when both are present.
  std::map<std::string, std::string> target_by_dataset;
  std::vector<std::string> targets;
  for (const auto& entry : datasets.entries) {
    if (entry.doi)
      target_by_dataset[entry.dataset_id] = "DOI:" + *entry.doi;
    else if (entry.arxiv_id)
      target_by_dataset[entry.dataset_id] = "ARXIV:" + *entry.arxiv_id;
    else
      continue;
    targets.push_back(target_by_dataset[entry.dataset_id]);
  }

  GraphDelta graph;
  bool graph_available = true;
  try {
    graph = fetch_paper_graph(targets, plan);
  } catch (const SourceError& e) {
    graph_available = false;
    out.partial = true;
    out.warnings.push_back(std::string("academic-graph source unavailable: ") + e.what());
  }
  if (!graph.failed.empty()) {
    out.partial = true;
    out.warnings.push_back("academic-graph targets abandoned after retries: " +
                           join(graph.failed));
  }
  out.graph_misses = graph.misses;

  SnapshotBuilder builder;
  for (auto entry : datasets.entries) {
    auto target = target_by_dataset.find(entry.dataset_id);
    if (target != target_by_dataset.end()) {
      auto resolved = graph.resolved.find(target->second);
      if (resolved != graph.resolved.end()) entry.paper_id = resolved->second;
    }
    builder.add_dataset(std::move(entry));
  }
  for (const auto& [id, p] : graph.papers) builder.merge_paper(p);
  for (const auto& [id, a] : graph.authors) builder.merge_author(a);
  for (const auto& e : graph.edges) builder.add_citation(e);

  // Altmetric lookups only make sense for DOIs whose paper resolved.
  std::vector<std::string> dois;
  std::map<std::string, std::string> paper_by_doi;
  for (const auto& entry : datasets.entries) {
    if (!entry.doi) continue;
    auto resolved = graph.resolved.find("DOI:" + *entry.doi);
    if (resolved == graph.resolved.end()) continue;
    paper_by_doi[*entry.doi] = resolved->second;
    dois.push_back(*entry.doi);
  }

  AltmetricFetch altmetric;
  bool altmetric_available = true;
  if (graph_available) {
    try {
      altmetric = fetch_altmetric(dois, plan);
    } catch (const SourceError& e) {
      altmetric_available = false;
      out.partial = true;
      out.warnings.push_back(std::string("altmetric source unavailable: ") + e.what());
    }
  } else {
    altmetric_available = false;
  }
  for (auto& [doi, record] : altmetric.records_by_doi) {
    record.paper_key = paper_by_doi.at(doi);
    builder.merge_altmetric(record);
  }
  out.altmetric_misses = altmetric.misses;

  SnapshotHeader header;
  header.format_version = 1;
  header.created_at = created_at;
  header.source_versions["ad_datasets"] =
      "v1 records=" + std::to_string(datasets.entries.size()) +
      " skipped=" + std::to_string(datasets.skipped) +
      " non_ingestible=" + std::to_string(datasets.non_ingestible);
  header.source_versions["academic_graph"] =
      graph_available ? "v1 resolved=" + std::to_string(graph.resolved.size()) +
                            " missed=" + join(graph.misses) + " truncated=" +
                            join(graph.truncated) + " failed=" + join(graph.failed)
                      : "unavailable";
  header.source_versions["altmetric"] =
      altmetric_available
          ? "v1 found=" + std::to_string(altmetric.records_by_doi.size()) +
                " missed=" + join(altmetric.misses)
          : "unavailable";
  header.source_versions["status"] = out.partial ? "partial" : "complete";

  out.snapshot = builder.finalize(std::move(header));
  out.counts["datasets"] = static_cast<int64_t>(out.snapshot.datasets.size());
  out.counts["papers"] = static_cast<int64_t>(out.snapshot.papers.size());
  out.counts["authors"] = static_cast<int64_t>(out.snapshot.authors.size());
  out.counts["citations"] = static_cast<int64_t>(out.snapshot.citations.size());
  out.counts["altmetrics"] = static_cast<int64_t>(out.snapshot.altmetrics.size());
  out.counts["graph_retries"] = graph.retries;
  out.counts["altmetric_retries"] = altmetric.retries;
  out.counts["skipped_records"] = datasets.skipped;
  out.counts["non_ingestible"] = datasets.non_ingestible;
  return out;
}

}  // namespace influ
