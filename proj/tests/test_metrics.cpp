#include <doctest.h>

#include <algorithm>
#include <random>

#include "influ/common.hpp"
#include "influ/corpus.hpp"
#include "influ/metrics.hpp"
#include "test_support.hpp"

using namespace influ;
using namespace testsup;

namespace {

// Independent oracle: max{h : #{x >= h} >= h} by direct enumeration.
int64_t h_index_oracle(const std::vector<int64_t>& counts) {
  int64_t best = 0;
  for (int64_t h = 0; h <= static_cast<int64_t>(counts.size()); ++h) {
    int64_t at_least = std::count_if(counts.begin(), counts.end(),
                                     [h](int64_t x) { return x >= h; });
    if (at_least >= h) best = h;
  }
  return best;
}

Snapshot one_paper_with_edges(const std::vector<int>& years) {
  SnapshotBuilder builder;
  builder.merge_paper(paper("p1", 2015));
  for (size_t i = 0; i < years.size(); ++i)
    builder.add_citation(edge("c" + std::to_string(i), "p1", years[i]));
  return builder.finalize(SnapshotHeader{});
}

}  // namespace

TEST_CASE("h_index matches the catalogue examples") {
  CHECK(h_index({}) == 0);
  CHECK(h_index({3, 0, 6, 1, 5}) == 3);
  CHECK(h_index({10, 10, 10}) == 3);
}

TEST_CASE("h_index equals the brute-force oracle on random instances") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    size_t length = rng() % 51;
    std::vector<int64_t> counts(length);
    for (auto& c : counts) c = static_cast<int64_t>(rng() % 101);
    CAPTURE(trial);
    CHECK(h_index(counts) == h_index_oracle(counts));
  }
}

TEST_CASE("h_index properties: bounds, monotonicity, permutation invariance") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    size_t length = 1 + rng() % 30;
    std::vector<int64_t> counts(length);
    for (auto& c : counts) c = static_cast<int64_t>(rng() % 40);
    int64_t h = h_index(counts);
    CHECK(h <= static_cast<int64_t>(counts.size()));
    CHECK(h <= *std::max_element(counts.begin(), counts.end()));

    auto grown = counts;
    grown.push_back(static_cast<int64_t>(rng() % 40));
    CHECK(h_index(grown) >= h);

    auto bumped = counts;
    bumped[rng() % bumped.size()] += 1 + rng() % 5;
    CHECK(h_index(bumped) >= h);

    auto shuffled = counts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(h_index(shuffled) == h);
  }
}

TEST_CASE("citations_in_window counts inclusive 3-year spans") {
  Snapshot s = one_paper_with_edges({2019, 2020, 2021, 2022, 2022});
  CHECK(citations_in_window(s, "p1", Window3{2022}) == 4);
  CHECK(citations_in_window(s, "p1", Window3{2019}) == 1);
  CHECK(citations_in_window(s, "p1", Window3{2010}) == 0);
  CHECK_THROWS_AS(citations_in_window(s, "nope", Window3{2022}), DataError);

  Snapshot none = one_paper_with_edges({});
  CHECK(citations_in_window(none, "p1", Window3{2022}) == 0);
}

TEST_CASE("citations_in_window is additive over disjoint covering windows") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> years;
    size_t edges = rng() % 40;
    for (size_t i = 0; i < edges; ++i) years.push_back(2000 + static_cast<int>(rng() % 12));
    Snapshot s = one_paper_with_edges(years);
    // Four back-to-back 3-year windows cover 2000..2011 exactly once.
    int64_t total = 0;
    for (int end : {2002, 2005, 2008, 2011}) total += citations_in_window(s, "p1", Window3{end});
    CHECK(total == static_cast<int64_t>(years.size()));
  }
}

TEST_CASE("year-less edges never enter windowed counts") {
  SnapshotBuilder builder;
  builder.merge_paper(paper("p1", 2015));
  builder.add_citation(edge("c1", "p1", 2020));
  builder.add_citation(edge("c2", "p1", std::nullopt));
  Snapshot s = builder.finalize(SnapshotHeader{});
  CHECK(citations_in_window(s, "p1", Window3{2020}) == 1);
  CHECK(citations_by_year_end(s, "p1", 2025) == 1);
}

TEST_CASE("reference_h3 over the reference list") {
  // References with windowed counts [5, 2, 2, 1] -> h = 2.
  SnapshotBuilder builder;
  std::vector<int> counts = {5, 2, 2, 1};
  std::vector<std::string> refs;
  for (size_t r = 0; r < counts.size(); ++r) {
    std::string id = "r" + std::to_string(r);
    refs.push_back(id);
    builder.merge_paper(paper(id, 2010));
    for (int i = 0; i < counts[r]; ++i)
      builder.add_citation(edge("c" + id + std::to_string(i), id, 2021));
  }
  builder.merge_paper(paper("p1", 2015, {}, refs));
  builder.merge_paper(paper("p0", 2015, {}, {}));  // zero references
  Snapshot s = builder.finalize(SnapshotHeader{});

  CHECK(reference_h3(s, "p1", Window3{2022}) == 2);
  CHECK(reference_h3(s, "p0", Window3{2022}) == 0);

  // Saturation: every reference cited >= #refs times.
  SnapshotBuilder sat;
  for (int r = 0; r < 3; ++r) {
    std::string id = "r" + std::to_string(r);
    sat.merge_paper(paper(id, 2010));
    for (int i = 0; i < 7; ++i) sat.add_citation(edge("e" + id + std::to_string(i), id, 2022));
  }
  sat.merge_paper(paper("p1", 215, {}, {"r0", "r1", "r2"}));
  CHECK(reference_h3(sat.finalize(SnapshotHeader{}), "p1", Window3{2022}) == 3);
}

TEST_CASE("reference_h3 distinguishes unfetched from empty") {
  SnapshotBuilder builder;
  builder.merge_paper(paper("p1", 2015, {}, {}, /*refs_fetched=*/false));
  builder.merge_paper(paper("p2", 2015, {}, {"r1"}, /*refs_fetched=*/true));
  builder.merge_paper(paper("r1", 2010, {}, {}, true, /*cits_fetched=*/false));
  Snapshot s = builder.finalize(SnapshotHeader{});
  CHECK(!reference_h3(s, "p1", Window3{2022}).has_value());   // list unknown
  CHECK(!reference_h3(s, "p2", Window3{2022}).has_value());   // reference's citations unknown
}

TEST_CASE("author_mean_h3 averages per-author h3 values") {
  SnapshotBuilder builder;
  // Author a1: publications with windowed counts [2, 2] -> h = 2.
  builder.merge_paper(paper("q1", 2018));
  builder.merge_paper(paper("q2", 2019));
  for (int i = 0; i < 2; ++i) builder.add_citation(edge("cq1" + std::to_string(i), "q1", 2021));
  for (int i = 0; i < 2; ++i) builder.add_citation(edge("cq2" + std::to_string(i), "q2", 2022));
  AuthorRecord a1;
  a1.author_id = "a1";
  a1.paper_ids = {"q1", "q2"};
  a1.papers_fetched = true;
  builder.merge_author(a1);
  builder.merge_paper(paper("p1", 2020, {"a1"}));
  Snapshot s = builder.finalize(SnapshotHeader{});
  CHECK(author_mean_h3(s, "p1", Window3{2022}) == 2.0);

  // Two authors with h3 = 3 and 1 -> mean 2.0; empty author contributes 0.
  SnapshotBuilder two;
  for (int i = 0; i < 3; ++i) {
    std::string id = "w" + std::to_string(i);
    two.merge_paper(paper(id, 2018));
    for (int c = 0; c < 3; ++c) two.add_citation(edge("cw" + id + std::to_string(c), id, 2022));
  }
  two.merge_paper(paper("v0", 2018));
  two.add_citation(edge("cv", "v0", 2022));
  AuthorRecord strong{.author_id = "s", .name = "S", .paper_ids = {"w0", "w1", "w2"},
                      .papers_fetched = true};
  AuthorRecord weak{.author_id = "w", .name = "W", .paper_ids = {"v0"}, .papers_fetched = true};
  AuthorRecord empty{.author_id = "e", .name = "E", .paper_ids = {}, .papers_fetched = true};
  two.merge_author(strong);
  two.merge_author(weak);
  two.merge_author(empty);
  two.merge_paper(paper("p1", 2020, {"s", "w"}));
  two.merge_paper(paper("p2", 2020, {"s", "w", "e"}));
  two.merge_paper(paper("p3", 2020, {"e"}));
  two.merge_paper(paper("p4", 2020, {"ghost"}));
  Snapshot t = two.finalize(SnapshotHeader{});
  CHECK(author_mean_h3(t, "p1", Window3{2022}) == 2.0);
  CHECK(author_mean_h3(t, "p2", Window3{2022}) == doctest::Approx(4.0 / 3.0));
  CHECK(author_mean_h3(t, "p3", Window3{2022}) == 0.0);
  CHECK(!author_mean_h3(t, "p4", Window3{2022}).has_value());  // no author data
}

TEST_CASE("citation_h3 over citing papers' own windowed citations") {
  // Citing papers with windowed counts [4, 1, 0] -> h = 1.
  SnapshotBuilder builder;
  builder.merge_paper(paper("p1", 2015));
  std::vector<int> second_level = {4, 1, 0};
  for (size_t c = 0; c < second_level.size(); ++c) {
    std::string id = "c" + std::to_string(c);
    builder.merge_paper(paper(id, 2019));
    builder.add_citation(edge(id, "p1", 2019));
    for (int i = 0; i < second_level[c]; ++i)
      builder.add_citation(edge("e" + id + std::to_string(i), id, 2021));
  }
  builder.merge_paper(paper("p0", 2015));  // never cited
  Snapshot s = builder.finalize(SnapshotHeader{});
  CHECK(citation_h3(s, "p1", Window3{2022}) == 1);
  CHECK(citation_h3(s, "p0", Window3{2022}) == 0);

  // Saturation: N citing papers each cited >= N times -> N.
  SnapshotBuilder sat;
  sat.merge_paper(paper("p1", 2015));
  for (int c = 0; c < 4; ++c) {
    std::string id = "c" + std::to_string(c);
    sat.merge_paper(paper(id, 2019));
    sat.add_citation(edge(id, "p1", 2019));
    for (int i = 0; i < 4; ++i) sat.add_citation(edge("e" + id + std::to_string(i), id, 2022));
  }
  CHECK(citation_h3(sat.finalize(SnapshotHeader{}), "p1", Window3{2022}) == 4);

  // Unfetched second level -> absent.
  SnapshotBuilder unf;
  unf.merge_paper(paper("p1", 2015));
  unf.merge_paper(paper("c0", 2019, {}, {}, true, /*cits_fetched=*/false));
  unf.add_citation(edge("c0", "p1", 2019));
  CHECK(!citation_h3(unf.finalize(SnapshotHeader{}), "p1", Window3{2022}).has_value());
}

TEST_CASE("golden snapshot: hand-computed feature vector for ds-alpha at 2022") {
  auto loaded = load_snapshot(fixtures_dir() + std::string("/golden_snapshot.jsonl"));
  REQUIRE(loaded.warnings.empty());
  const Snapshot& s = loaded.snapshot;

  FeatureVector fv = extract_features(s, "ds-alpha", 2022);
  CHECK(fv.n_frames == 120000);
  CHECK(fv.n_sensors == 5);
  CHECK(fv.a_pub == 2019);
  CHECK(fv.ref_h3 == 2);
  CHECK(fv.aut_mu_h3 == 2.0);
  CHECK(fv.n_cit3 == 6);
  CHECK(fv.cit_h3 == 2);
  CHECK(fv.aas_curr == 45.5);
  CHECK(fv.aas_3m == 82.0);
  CHECK(fv.n_readers == 120);
  CHECK(fv.quality_flags.empty());

  // Absence propagation: no altmetric record, unparseable frame count.
  FeatureVector charlie = extract_features(s, "ds-charlie", 2022);
  CHECK(!charlie.n_frames.has_value());
  CHECK(!charlie.aas_curr.has_value());
  CHECK(!charlie.aas_3m.has_value());
  CHECK(!charlie.n_readers.has_value());
  CHECK(charlie.n_sensors == 2);
  CHECK(charlie.ref_h3 == 0);  // fetched and empty, not absent

  // Two datasets sharing one paper carry identical paper-derived features.
  FeatureVector delta = extract_features(s, "ds-delta", 2022);
  FeatureVector echo = extract_features(s, "ds-echo", 2022);
  CHECK(delta.a_pub == echo.a_pub);
  CHECK(delta.ref_h3 == echo.ref_h3);
  CHECK(delta.aut_mu_h3 == echo.aut_mu_h3);
  CHECK(delta.n_cit3 == echo.n_cit3);
  CHECK(delta.cit_h3 == echo.cit_h3);
  CHECK(delta.aas_curr == echo.aas_curr);
  CHECK(delta.n_frames != echo.n_frames);
  CHECK(delta.aut_mu_h3 == doctest::Approx(4.0 / 3.0));
  CHECK(delta.ref_h3 == 2);
  CHECK(delta.n_cit3 == 2);
  CHECK(delta.cit_h3 == 1);
  // Published 2022, evaluated 2022: cit_h3 exists but predates +3y availability.
  CHECK(std::count(delta.quality_flags.begin(), delta.quality_flags.end(),
                   "cit_h3_within_3y_of_publication") == 1);

  // Extraction is a pure function of its inputs.
  FeatureVector again = extract_features(s, "ds-alpha", 2022);
  CHECK(again.n_cit3 == fv.n_cit3);
  CHECK(again.quality_flags == fv.quality_flags);

  // Historical evaluation keeps snapshot-time altmetrics, flagged stale.
  FeatureVector alpha2020 = extract_features(s, "ds-alpha", 2020);
  CHECK(alpha2020.aas_curr == 45.5);
  CHECK(std::count(alpha2020.quality_flags.begin(), alpha2020.quality_flags.end(),
                   "altmetric_values_stale") == 1);

  CHECK_THROWS_AS(extract_features(s, "no-such-dataset", 2022), DataError);
}

TEST_CASE("feature CSV keeps catalogue column order and empty absent cells") {
  SnapshotBuilder builder;
  builder.merge_paper(paper("p1", 2020));
  builder.add_dataset(dataset("d1", "p1", 100, {}));
  Snapshot s = builder.finalize(SnapshotHeader{});
  std::string csv = feature_table_csv(extract_all_features(s, 2022));
  CHECK(csv ==
        "dataset_id,eval_year,n_frames,n_sensors,a_pub,ref_h3,aut_mu_h3,n_cit3,cit_h3,"
        "aas_curr,aas_3m,n_readers,flags\n"
        "d1,2022,100,,2020,0,,0,0,,,,cit_h3_within_3y_of_publication\n");
}
