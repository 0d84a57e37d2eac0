#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "influ/corpus.hpp"

namespace testsup {

inline std::string fixtures_dir() { return INFLU_FIXTURES_DIR; }

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE_MESSAGE(bool(f), ("cannot open " + path));
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
}

// Unique temp directory per test run, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    auto base = std::filesystem::temp_directory_path();
    path_ = base / ("influ_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline influ::PaperRecord paper(const std::string& id, std::optional<int> year,
                                std::vector<std::string> authors = {},
                                std::vector<std::string> refs = {}, bool refs_fetched = true,
                                bool cits_fetched = true) {
  influ::PaperRecord p;
  p.paper_id = id;
  p.title = "Paper " + id;
  p.publication_year = year;
  p.author_ids = std::move(authors);
  p.reference_ids = std::move(refs);
  p.refs_fetched = refs_fetched;
  p.cits_fetched = cits_fetched;
  return p;
}

inline influ::CitationEdge edge(const std::string& citing, const std::string& cited,
                                std::optional<int> year) {
  influ::CitationEdge e;
  e.citing_paper_id = citing;
  e.cited_paper_id = cited;
  e.citing_year = year;
  return e;
}

inline influ::DatasetEntry dataset(const std::string& id, std::optional<std::string> paper_id,
                                   std::optional<int64_t> frames = {},
                                   std::optional<int64_t> sensors = {}) {
  influ::DatasetEntry d;
  d.dataset_id = id;
  d.name = "Dataset " + id;
  d.doi = "10.0/" + id;
  d.paper_id = std::move(paper_id);
  d.n_frames = frames;
  d.n_sensors = sensors;
  return d;
}

}  // namespace testsup
