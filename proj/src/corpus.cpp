#include "influ/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "influ/canonical_json.hpp"
#include "influ/common.hpp"

namespace influ {

using nlohmann::json;

namespace {

const std::vector<CitationEdge> kNoEdges;

// Commutative field merge helpers: the winner never depends on which
// observation arrived first, so parallel ingestion stays deterministic.
template <typename T>
void merge_optional(std::optional<T>& into, const std::optional<T>& from) {
  if (!from) return;
  if (!into) {
    into = from;
    return;
  }
  into = std::min(*into, *from);
}

void merge_string(std::string& into, const std::string& from) {
  if (from.empty()) return;
  if (into.empty() || from > into) into = from;
}

void merge_list(std::vector<std::string>& into, const std::vector<std::string>& from) {
  if (from.empty()) return;
  if (into.empty()) {
    into = from;
    return;
  }
  if (from.size() > into.size() || (from.size() == into.size() && from > into)) into = from;
}

std::vector<std::string> dedup_preserving_order(const std::vector<std::string>& xs) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& x : xs)
    if (seen.insert(x).second) out.push_back(x);
  return out;
}

json dataset_json(const DatasetEntry& d) {
  json j;
  j["kind"] = "dataset";
  j["dataset_id"] = d.dataset_id;
  j["name"] = d.name;
  if (d.doi) j["doi"] = *d.doi;
  if (d.arxiv_id) j["arxiv_id"] = *d.arxiv_id;
  if (d.paper_id) j["paper_id"] = *d.paper_id;
  if (d.n_frames) j["n_frames"] = *d.n_frames;
  if (d.n_sensors) j["n_sensors"] = *d.n_sensors;
  if (d.publication_year) j["publication_year"] = *d.publication_year;
  return j;
}

json paper_json(const PaperRecord& p) {
  json j;
  j["kind"] = "paper";
  j["paper_id"] = p.paper_id;
  j["title"] = p.title;
  if (p.publication_year) j["publication_year"] = *p.publication_year;
  j["author_ids"] = p.author_ids;
  j["reference_ids"] = p.reference_ids;
  j["external_ids"] = p.external_ids;
  j["refs_fetched"] = p.refs_fetched;
  j["cits_fetched"] = p.cits_fetched;
  return j;
}

json author_json(const AuthorRecord& a) {
  json j;
  j["kind"] = "author";
  j["author_id"] = a.author_id;
  j["name"] = a.name;
  j["paper_ids"] = a.paper_ids;
  j["papers_fetched"] = a.papers_fetched;
  return j;
}

json citation_json(const CitationEdge& c) {
  json j;
  j["kind"] = "citation";
  j["citing_paper_id"] = c.citing_paper_id;
  j["cited_paper_id"] = c.cited_paper_id;
  if (c.citing_year) j["citing_year"] = *c.citing_year;
  if (c.self_citation) j["self_citation"] = true;
  return j;
}

json altmetric_json(const AltmetricRecord& r) {
  json j;
  j["kind"] = "altmetric";
  j["paper_key"] = r.paper_key;
  j["aas_curr"] = r.aas_curr;
  if (r.aas_3m) j["aas_3m"] = *r.aas_3m;
  j["readers_by_service"] = r.readers_by_service;
  j["n_readers"] = r.n_readers;
  return j;
}

template <typename T>
std::optional<T> opt_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

template <typename T>
T req_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'");
  return it->get<T>();
}

DatasetEntry dataset_from_json(const json& j) {
  DatasetEntry d;
  d.dataset_id = req_field<std::string>(j, "dataset_id");
  d.name = j.value("name", "");
  d.doi = opt_field<std::string>(j, "doi");
  d.arxiv_id = opt_field<std::string>(j, "arxiv_id");
  d.paper_id = opt_field<std::string>(j, "paper_id");
  d.n_frames = opt_field<int64_t>(j, "n_frames");
  d.n_sensors = opt_field<int64_t>(j, "n_sensors");
  d.publication_year = opt_field<int>(j, "publication_year");
  return d;
}

PaperRecord paper_from_json(const json& j) {
  PaperRecord p;
  p.paper_id = req_field<std::string>(j, "paper_id");
  p.title = j.value("title", "");
  p.publication_year = opt_field<int>(j, "publication_year");
  p.author_ids = j.value("author_ids", std::vector<std::string>{});
  p.reference_ids = j.value("reference_ids", std::vector<std::string>{});
  p.external_ids = j.value("external_ids", std::map<std::string, std::string>{});
  p.refs_fetched = j.value("refs_fetched", false);
  p.cits_fetched = j.value("cits_fetched", false);
  return p;
}

AuthorRecord author_from_json(const json& j) {
  AuthorRecord a;
  a.author_id = req_field<std::string>(j, "author_id");
  a.name = j.value("name", "");
  a.paper_ids = j.value("paper_ids", std::vector<std::string>{});
  a.papers_fetched = j.value("papers_fetched", false);
  return a;
}

CitationEdge citation_from_json(const json& j) {
  CitationEdge c;
  c.citing_paper_id = req_field<std::string>(j, "citing_paper_id");
  c.cited_paper_id = req_field<std::string>(j, "cited_paper_id");
  c.citing_year = opt_field<int>(j, "citing_year");
  c.self_citation = j.value("self_citation", false);
  return c;
}

AltmetricRecord altmetric_from_json(const json& j) {
  AltmetricRecord r;
  r.paper_key = req_field<std::string>(j, "paper_key");
  r.aas_curr = j.value("aas_curr", 0.0);
  r.aas_3m = opt_field<double>(j, "aas_3m");
  r.readers_by_service = j.value("readers_by_service", std::map<std::string, int64_t>{});
  r.n_readers = j.value("n_readers", int64_t{0});
  return r;
}

}  // namespace

const std::vector<CitationEdge>& Snapshot::citations_to(const std::string& paper_id) const {
  auto it = by_cited_.find(paper_id);
  return it == by_cited_.end() ? kNoEdges : it->second;
}

void Snapshot::rebuild_index() {
  by_cited_.clear();
  for (const auto& edge : citations) by_cited_[edge.cited_paper_id].push_back(edge);
}

std::optional<int> Snapshot::max_observed_year() const {
  std::optional<int> year;
  auto take = [&year](const std::optional<int>& y) {
    if (y && (!year || *y > *year)) year = y;
  };
  for (const auto& [id, d] : datasets) take(d.publication_year);
  for (const auto& [id, p] : papers) take(p.publication_year);
  for (const auto& e : citations) take(e.citing_year);
  return year;
}

void SnapshotBuilder::add_dataset(DatasetEntry entry) {
  snapshot_.datasets[entry.dataset_id] = std::move(entry);
}

void SnapshotBuilder::merge_paper(PaperRecord record) {
  auto [it, inserted] = snapshot_.papers.emplace(record.paper_id, record);
  if (inserted) return;
  PaperRecord& p = it->second;
  merge_string(p.title, record.title);
  merge_optional(p.publication_year, record.publication_year);
  merge_list(p.author_ids, record.author_ids);
  merge_list(p.reference_ids, record.reference_ids);
  for (const auto& [k, v] : record.external_ids) {
    auto [eit, fresh] = p.external_ids.emplace(k, v);
    if (!fresh && v > eit->second) eit->second = v;
  }
  p.refs_fetched = p.refs_fetched || record.refs_fetched;
  p.cits_fetched = p.cits_fetched || record.cits_fetched;
}

void SnapshotBuilder::merge_author(AuthorRecord record) {
  auto [it, inserted] = snapshot_.authors.emplace(record.author_id, record);
  if (inserted) return;
  AuthorRecord& a = it->second;
  merge_string(a.name, record.name);
  merge_list(a.paper_ids, record.paper_ids);
  a.papers_fetched = a.papers_fetched || record.papers_fetched;
}

void SnapshotBuilder::add_citation(CitationEdge edge) {
  auto key = std::make_pair(edge.cited_paper_id, edge.citing_paper_id);
  auto [it, inserted] = edges_.emplace(key, edge);
  if (inserted) return;
  merge_optional(it->second.citing_year, edge.citing_year);
  it->second.self_citation = it->second.self_citation || edge.self_citation;
}

void SnapshotBuilder::merge_altmetric(AltmetricRecord record) {
  record.n_readers = record.service_sum();
  snapshot_.altmetrics[record.paper_key] = std::move(record);
}

Snapshot SnapshotBuilder::finalize(SnapshotHeader header) {
  Snapshot out = std::move(snapshot_);
  out.header = std::move(header);
  out.citations.clear();
  out.citations.reserve(edges_.size());
  for (auto& [key, edge] : edges_) out.citations.push_back(std::move(edge));
  for (auto& [id, p] : out.papers) {
    p.author_ids = dedup_preserving_order(p.author_ids);
    p.reference_ids = dedup_preserving_order(p.reference_ids);
  }
  for (auto& [id, a] : out.authors) {
    std::sort(a.paper_ids.begin(), a.paper_ids.end());
    a.paper_ids.erase(std::unique(a.paper_ids.begin(), a.paper_ids.end()), a.paper_ids.end());
  }
  out.rebuild_index();
  snapshot_ = Snapshot{};
  edges_.clear();
  return out;
}

std::vector<std::string> validate(const Snapshot& s) {
  std::set<std::string> warnings;
  auto has_paper = [&s](const std::string& id) { return s.papers.count(id) > 0; };

  for (const auto& [id, d] : s.datasets) {
    if (d.paper_id && !has_paper(*d.paper_id))
      warnings.insert("dataset " + id + ": dangling paper_id " + *d.paper_id);
    if (d.n_frames && *d.n_frames < 0)
      warnings.insert("dataset " + id + ": negative n_frames");
    if (d.n_sensors && *d.n_sensors < 1)
      warnings.insert("dataset " + id + ": n_sensors < 1");
  }
  for (const auto& [id, p] : s.papers) {
    std::set<std::string> seen;
    for (const auto& a : p.author_ids) {
      if (!seen.insert(a).second) warnings.insert("paper " + id + ": duplicate author " + a);
      if (!s.authors.count(a)) warnings.insert("paper " + id + ": dangling author " + a);
    }
    seen.clear();
    for (const auto& r : p.reference_ids) {
      if (!seen.insert(r).second) warnings.insert("paper " + id + ": duplicate reference " + r);
      if (!has_paper(r)) warnings.insert("paper " + id + ": dangling reference " + r);
    }
  }
  for (const auto& [id, a] : s.authors) {
    std::set<std::string> seen;
    for (const auto& pid : a.paper_ids) {
      if (!seen.insert(pid).second) warnings.insert("author " + id + ": duplicate paper " + pid);
      if (!has_paper(pid)) warnings.insert("author " + id + ": dangling paper " + pid);
    }
  }
  for (const auto& e : s.citations) {
    // Citing ids may be unmaterialized leaves; the cited side must resolve.
    if (!has_paper(e.cited_paper_id))
      warnings.insert("citation: dangling cited_paper_id " + e.cited_paper_id);
    if (e.citing_paper_id == e.cited_paper_id && !e.self_citation)
      warnings.insert("citation: " + e.citing_paper_id + " cites itself without self_citation flag");
  }
  for (const auto& [key, r] : s.altmetrics) {
    if (!has_paper(key)) warnings.insert("altmetric: dangling paper_key " + key);
    if (r.n_readers != r.service_sum())
      warnings.insert("altmetric " + key + ": n_readers does not equal the service sum");
    if (r.aas_3m && (*r.aas_3m < 0.0 || *r.aas_3m > 100.0))
      warnings.insert("altmetric " + key + ": aas_3m outside [0,100]");
    if (r.aas_curr < 0.0) warnings.insert("altmetric " + key + ": negative aas_curr");
  }
  return {warnings.begin(), warnings.end()};
}

void save_snapshot(const Snapshot& s, const std::string& path, bool allow_dangling) {
  if (!allow_dangling) {
    auto warnings = validate(s);
    if (!warnings.empty())
      throw DataError("snapshot failed integrity validation: " + warnings.front() +
                      (warnings.size() > 1 ? " (+" + std::to_string(warnings.size() - 1) + " more)" : ""));
  }

  std::string out;
  json header;
  header["format_version"] = s.header.format_version;
  header["created_at"] = s.header.created_at;
  header["source_versions"] = s.header.source_versions;
  out += canonical_dump(header);
  out += '\n';

  // Canonical entity order: (kind, id), kinds lexicographic.
  for (const auto& [key, r] : s.altmetrics) out += canonical_dump(altmetric_json(r)) + "\n";
  for (const auto& [id, a] : s.authors) out += canonical_dump(author_json(a)) + "\n";
  std::vector<CitationEdge> edges = s.citations;
  std::sort(edges.begin(), edges.end());
  for (const auto& e : edges) out += canonical_dump(citation_json(e)) + "\n";
  for (const auto& [id, d] : s.datasets) out += canonical_dump(dataset_json(d)) + "\n";
  for (const auto& [id, p] : s.papers) out += canonical_dump(paper_json(p)) + "\n";

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write snapshot to " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  f.flush();
  if (!f) throw DataError("short write to " + path);
}

LoadResult load_snapshot(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open snapshot " + path);

  SnapshotBuilder builder;
  SnapshotHeader header;
  std::string line;
  int line_no = 0;
  int last_complete = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("snapshot parse error at line " + std::to_string(line_no) +
                       " (last complete record at line " + std::to_string(last_complete) +
                       "): " + e.what());
    }
    try {
      if (line_no == 1) {
        header.format_version = req_field<int>(j, "format_version");
        if (header.format_version != 1)
          throw DataError("unsupported snapshot format_version " +
                          std::to_string(header.format_version));
        header.created_at = j.value("created_at", "");
        header.source_versions = j.value("source_versions", std::map<std::string, std::string>{});
      } else {
        auto kind = req_field<std::string>(j, "kind");
        if (kind == "dataset")
          builder.add_dataset(dataset_from_json(j));
        else if (kind == "paper")
          builder.merge_paper(paper_from_json(j));
        else if (kind == "author")
          builder.merge_author(author_from_json(j));
        else if (kind == "citation")
          builder.add_citation(citation_from_json(j));
        else if (kind == "altmetric")
          builder.merge_altmetric(altmetric_from_json(j));
        else
          throw ParseError("unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError("snapshot parse error at line " + std::to_string(line_no) +
                       " (last complete record at line " + std::to_string(last_complete) +
                       "): " + e.what());
    }
    last_complete = line_no;
  }
  if (line_no == 0) throw ParseError("snapshot " + path + " is empty (missing header)");

  LoadResult result;
  result.snapshot = builder.finalize(std::move(header));
  result.warnings = validate(result.snapshot);
  return result;
}

std::vector<TimelinePoint> build_publication_timeline(const Snapshot& s) {
  std::set<std::string> dataset_papers;
  std::map<int, TimelinePoint> by_year;

  for (const auto& [id, d] : s.datasets) {
    if (d.paper_id) dataset_papers.insert(*d.paper_id);
    std::optional<int> year = d.publication_year;
    if (!year && d.paper_id) {
      auto it = s.papers.find(*d.paper_id);
      if (it != s.papers.end()) year = it->second.publication_year;
    }
    if (year) by_year[*year].datasets += 1;
  }
  for (const auto& e : s.citations) {
    if (!e.citing_year) continue;
    if (dataset_papers.count(e.cited_paper_id)) by_year[*e.citing_year].citations += 1;
  }
  if (by_year.empty()) return {};

  std::vector<TimelinePoint> series;
  int first = by_year.begin()->first;
  int last = by_year.rbegin()->first;
  int64_t cum_datasets = 0;
  int64_t cum_citations = 0;
  for (int year = first; year <= last; ++year) {
    TimelinePoint point;
    point.year = year;
    auto it = by_year.find(year);
    if (it != by_year.end()) {
      point.datasets = it->second.datasets;
      point.citations = it->second.citations;
    }
    cum_datasets += point.datasets;
    cum_citations += point.citations;
    point.cumulative_datasets = cum_datasets;
    point.cumulative_citations = cum_citations;
    series.push_back(point);
  }
  return series;
}

}  // namespace influ
