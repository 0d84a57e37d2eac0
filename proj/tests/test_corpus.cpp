#include <doctest.h>

#include <unistd.h>

#include "influ/canonical_json.hpp"
#include "influ/common.hpp"
#include "influ/corpus.hpp"
#include "test_support.hpp"

using namespace influ;
using namespace testsup;

TEST_CASE("canonical_dump sorts keys and keeps number types apart") {
  nlohmann::json j;
  j["b"] = 3;
  j["a"] = 82.0;
  j["c"] = 45.5;
  j["d"] = nlohmann::json::array({1, 2.5});
  CHECK(canonical_dump(j) == R"({"a":82.0,"b":3,"c":45.5,"d":[1,2.5]})");
  CHECK(canonical_dump(nlohmann::json(1e21)) == "1000000000000000000000.0");
}

TEST_CASE("empty snapshot saves as a lone header and loads back empty") {
  TempDir dir;
  Snapshot empty;
  save_snapshot(empty, dir.file("empty.jsonl"));
  std::string bytes = read_file(dir.file("empty.jsonl"));
  CHECK(std::count(bytes.begin(), bytes.end(), '\n') == 1);

  auto loaded = load_snapshot(dir.file("empty.jsonl"));
  CHECK(loaded.snapshot.datasets.empty());
  CHECK(loaded.snapshot.papers.empty());
  CHECK(loaded.snapshot.citations.empty());
  CHECK(loaded.warnings.empty());
  CHECK(build_publication_timeline(loaded.snapshot).empty());
}

TEST_CASE("snapshot with one dataset and one paper is three stable lines") {
  TempDir dir;
  SnapshotBuilder builder;
  builder.merge_paper(paper("p1", 2020));
  builder.add_dataset(dataset("d1", "p1", 100, 3));
  Snapshot snapshot = builder.finalize(SnapshotHeader{});

  save_snapshot(snapshot, dir.file("a.jsonl"));
  save_snapshot(snapshot, dir.file("b.jsonl"));
  std::string a = read_file(dir.file("a.jsonl"));
  CHECK(std::count(a.begin(), a.end(), '\n') == 3);
  CHECK(a == read_file(dir.file("b.jsonl")));
}

TEST_CASE("save(load(F)) is byte-identical for a feature-complete fixture") {
  TempDir dir;
  SnapshotBuilder builder;
  builder.merge_paper(paper("p1", 2019, {"a1"}, {"p2"}));
  builder.merge_paper(paper("p2", 2015));
  AuthorRecord author;
  author.author_id = "a1";
  author.name = "Ann";
  author.paper_ids = {"p1"};
  author.papers_fetched = true;
  builder.merge_author(author);
  builder.add_citation(edge("p1", "p2", 2019));
  builder.add_citation(edge("x-leaf", "p1", std::nullopt));
  AltmetricRecord alt;
  alt.paper_key = "p1";
  alt.aas_curr = 45.5;
  alt.aas_3m = 82.0;
  alt.readers_by_service = {{"mendeley", 100}, {"zotero", 20}};
  builder.merge_altmetric(alt);
  builder.add_dataset(dataset("d1", "p1", 120000, 5));
  SnapshotHeader header;
  header.created_at = "2023-01-04T00:00:00Z";
  header.source_versions = {{"ad_datasets", "v1"}};
  Snapshot snapshot = builder.finalize(header);

  save_snapshot(snapshot, dir.file("f.jsonl"));
  std::string original = read_file(dir.file("f.jsonl"));
  auto loaded = load_snapshot(dir.file("f.jsonl"));
  CHECK(loaded.warnings.empty());
  save_snapshot(loaded.snapshot, dir.file("g.jsonl"));
  CHECK(read_file(dir.file("g.jsonl")) == original);

  // Round-trip again from the reloaded snapshot: still identical.
  auto reloaded = load_snapshot(dir.file("g.jsonl"));
  save_snapshot(reloaded.snapshot, dir.file("h.jsonl"));
  CHECK(read_file(dir.file("h.jsonl")) == original);
}

TEST_CASE("deleting a cited paper's line surfaces exactly one dangling warning") {
  TempDir dir;
  SnapshotBuilder builder;
  builder.merge_paper(paper("p1", 2019));
  builder.merge_paper(paper("p2", 2015));
  builder.add_citation(edge("p1", "p2", 2019));
  save_snapshot(builder.finalize(SnapshotHeader{}), dir.file("f.jsonl"));

  std::istringstream in(read_file(dir.file("f.jsonl")));
  std::string line, kept;
  while (std::getline(in, line))
    if (line.find("\"paper_id\":\"p2\"") == std::string::npos) kept += line + "\n";
  write_file(dir.file("dangling.jsonl"), kept);

  auto loaded = load_snapshot(dir.file("dangling.jsonl"));
  REQUIRE(loaded.warnings.size() == 1);
  CHECK(loaded.warnings[0].find("dangling cited_paper_id p2") != std::string::npos);
  CHECK(loaded.snapshot.citations.size() == 1);  // kept, not pruned

  // Saving a dangling snapshot requires the explicit allow flag.
  CHECK_THROWS_AS(save_snapshot(loaded.snapshot, dir.file("x.jsonl")), DataError);
  save_snapshot(loaded.snapshot, dir.file("x.jsonl"), /*allow_dangling=*/true);

  // Validation is idempotent and side-effect free.
  CHECK(validate(loaded.snapshot) == loaded.warnings);
  CHECK(validate(loaded.snapshot) == loaded.warnings);
}

TEST_CASE("truncated snapshot names the last complete line") {
  TempDir dir;
  SnapshotBuilder builder;
  builder.merge_paper(paper("p1", 2019));
  builder.merge_paper(paper("p2", 2015));
  save_snapshot(builder.finalize(SnapshotHeader{}), dir.file("f.jsonl"));
  std::string bytes = read_file(dir.file("f.jsonl"));
  write_file(dir.file("cut.jsonl"), bytes.substr(0, bytes.size() - 10));

  try {
    load_snapshot(dir.file("cut.jsonl"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    std::string message = e.what();
    CHECK(message.find("line 3") != std::string::npos);
    CHECK(message.find("last complete record at line 2") != std::string::npos);
  }
}

TEST_CASE("unsupported format version is rejected") {
  TempDir dir;
  write_file(dir.file("v9.jsonl"), "{\"format_version\":9}\n");
  CHECK_THROWS_AS(load_snapshot(dir.file("v9.jsonl")), DataError);
  write_file(dir.file("junk.jsonl"), "not json\n");
  CHECK_THROWS_AS(load_snapshot(dir.file("junk.jsonl")), ParseError);
}

TEST_CASE("timeline counts datasets and dataset-paper citations per year") {
  SnapshotBuilder builder;
  builder.merge_paper(paper("p1", 2019));
  builder.merge_paper(paper("p2", 2019));
  builder.add_dataset(dataset("d1", "p1"));
  builder.add_dataset(dataset("d2", "p2"));
  builder.add_citation(edge("c1", "p1", 2020));
  builder.add_citation(edge("c2", "p2", 2020));
  builder.add_citation(edge("c3", "p1", 2021));
  Snapshot snapshot = builder.finalize(SnapshotHeader{});

  auto series = build_publication_timeline(snapshot);
  REQUIRE(series.size() == 3);
  CHECK(series[0].year == 2019);
  CHECK(series[0].datasets == 2);
  CHECK(series[0].citations == 0);
  CHECK(series[1].year == 2020);
  CHECK(series[1].datasets == 0);
  CHECK(series[1].citations == 2);
  CHECK(series[2].year == 2021);
  CHECK(series[2].citations == 1);

  // Cumulative series is the prefix sum; totals match entity counts.
  int64_t datasets = 0, citations = 0;
  for (const auto& p : series) {
    datasets += p.datasets;
    citations += p.citations;
    CHECK(p.cumulative_datasets == datasets);
    CHECK(p.cumulative_citations == citations);
  }
  CHECK(datasets == 2);
  CHECK(citations == 3);
}

TEST_CASE("timeline falls back to the linked paper year") {
  SnapshotBuilder builder;
  builder.merge_paper(paper("p1", 2018));
  auto d = dataset("d1", "p1");
  d.publication_year.reset();
  builder.add_dataset(d);
  auto series = build_publication_timeline(builder.finalize(SnapshotHeader{}));
  REQUIRE(series.size() == 1);
  CHECK(series[0].year == 2018);
  CHECK(series[0].datasets == 1);
}

TEST_CASE("builder merge is commutative across arrival orders") {
  PaperRecord first = paper("p1", 2020, {"a1"}, {});
  first.title = "";
  first.cits_fetched = false;
  PaperRecord second = paper("p1", 2020, {"a1", "a2"}, {"r1"});

  SnapshotBuilder ab, ba;
  ab.merge_paper(first);
  ab.merge_paper(second);
  ba.merge_paper(second);
  ba.merge_paper(first);
  // Close the dangling ends so the comparison sees clean snapshots.
  for (auto* b : {&ab, &ba}) b->merge_paper(paper("r1", 2000));

  TempDir dir;
  save_snapshot(ab.finalize(SnapshotHeader{}), dir.file("ab.jsonl"), true);
  save_snapshot(ba.finalize(SnapshotHeader{}), dir.file("ba.jsonl"), true);
  CHECK(read_file(dir.file("ab.jsonl")) == read_file(dir.file("ba.jsonl")));
}
