#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "influ/cluster.hpp"
#include "influ/common.hpp"
#include "influ/corpus.hpp"
#include "influ/influence.hpp"
#include "influ/ingest.hpp"
#include "influ/metrics.hpp"
#include "influ/regress.hpp"
#include "influ/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitSource = 3;

struct GlobalOptions {
  std::string snapshot_path;
  std::optional<int> year;
  std::string format = "markdown";
  uint64_t seed = 42;
  bool offline = false;
};

influ::Snapshot load_or_die(const std::string& path, bool print_warnings = true) {
  if (path.empty()) throw influ::DataError("--snapshot is required for this command");
  auto loaded = influ::load_snapshot(path);
  if (print_warnings)
    for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
  return std::move(loaded.snapshot);
}

int require_year(const influ::Snapshot& snapshot, const std::optional<int>& year) {
  if (year) return *year;
  auto observed = snapshot.max_observed_year();
  if (!observed) throw influ::DataError("snapshot carries no years; pass --year");
  return *observed;
}

void emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty())
    std::cout << content;
  else
    influ::atomic_write(out_path, content);
}

std::string getenv_or(const char* name, const std::string& fallback) {
  const char* value = std::getenv(name);
  return value ? value : fallback;
}

int cmd_ingest(const GlobalOptions& global, const std::string& ad_datasets,
               const influ::FieldMapping& mapping, influ::FetchPlan plan,
               const std::string& out_path, const std::string& created_at) {
  plan.offline = plan.offline || global.offline;
  if (plan.graph_api_key.empty()) plan.graph_api_key = getenv_or("SS_API_KEY", "");
  if (plan.altmetric_key.empty()) plan.altmetric_key = getenv_or("ALTMETRIC_KEY", "");

  auto outcome = influ::ingest_all(ad_datasets, mapping, plan, created_at);
  for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";

  influ::save_snapshot(outcome.snapshot, out_path, /*allow_dangling=*/true);
  for (const auto& [key, value] : outcome.counts) std::cout << key << ": " << value << "\n";
  auto print_list = [](const char* label, const std::vector<std::string>& xs) {
    std::cout << label << ":";
    for (const auto& x : xs) std::cout << " " << x;
    std::cout << "\n";
  };
  print_list("graph_misses", outcome.graph_misses);
  print_list("altmetric_misses", outcome.altmetric_misses);
  std::cout << "status: " << (outcome.partial ? "partial" : "complete") << "\n";
  std::cout << "snapshot: " << out_path << "\n";
  return kExitOk;
}

int cmd_features(const GlobalOptions& global, const std::string& out_path) {
  auto snapshot = load_or_die(global.snapshot_path);
  int year = require_year(snapshot, global.year);
  emit(influ::feature_table_csv(influ::extract_all_features(snapshot, year)), out_path);
  return kExitOk;
}

int cmd_rank(const GlobalOptions& global, const std::string& out_path,
             const std::string& histogram_stem) {
  auto snapshot = load_or_die(global.snapshot_path);
  int year = require_year(snapshot, global.year);
  std::optional<int> release_filter = global.year;  // --year also filters the report
  auto results = influ::rank_datasets(snapshot, year, release_filter);
  emit(influ::render_rank_report(results, influ::parse_report_format(global.format)), out_path);
  if (!histogram_stem.empty()) {
    influ::atomic_write(histogram_stem + ".csv", influ::render_is_histogram_csv(results));
    influ::atomic_write(histogram_stem + ".svg", influ::render_is_histogram_svg(results));
  }
  return kExitOk;
}

int cmd_history(const GlobalOptions& global, const std::string& dataset_id,
                std::optional<int> from, std::optional<int> to, const std::string& out_stem) {
  auto snapshot = load_or_die(global.snapshot_path);
  auto it = snapshot.datasets.find(dataset_id);
  if (it == snapshot.datasets.end()) throw influ::DataError("unknown dataset: " + dataset_id);

  int last = to ? *to : require_year(snapshot, std::nullopt);
  int first;
  if (from) {
    first = *from;
  } else {
    auto fv = influ::extract_features(snapshot, dataset_id, last);
    first = fv.a_pub ? *fv.a_pub : last;
  }
  if (first > last) throw influ::DataError("history range is empty");

  auto series = influ::score_history(snapshot, dataset_id, first, last);
  if (out_stem.empty()) {
    std::cout << influ::render_history_csv(series);
  } else {
    influ::atomic_write(out_stem + ".csv", influ::render_history_csv(series));
    influ::atomic_write(out_stem + ".svg", influ::render_history_svg(series, dataset_id));
  }
  return kExitOk;
}

int cmd_regress(const GlobalOptions& global, const std::string& out_path) {
  auto snapshot = load_or_die(global.snapshot_path);
  int eval_year = require_year(snapshot, global.year);

  influ::ObsTable table;
  table.columns = {"ref_h3", "aut_mu_h3", "a_pub", "n_sensors", "aas_3m", "cit_1y"};
  int considered = 0;
  for (const auto& fv : influ::extract_all_features(snapshot, eval_year)) {
    if (!fv.a_pub || *fv.a_pub + 1 > eval_year) continue;  // needs a one-year record
    ++considered;
    const auto& dataset = snapshot.datasets.at(fv.dataset_id);
    std::vector<std::optional<double>> row(6);
    if (fv.ref_h3) row[0] = static_cast<double>(*fv.ref_h3);
    if (fv.aut_mu_h3) row[1] = *fv.aut_mu_h3;
    row[2] = static_cast<double>(*fv.a_pub);
    if (fv.n_sensors) row[3] = static_cast<double>(*fv.n_sensors);
    if (fv.aas_3m) row[4] = *fv.aas_3m;
    if (dataset.paper_id && snapshot.papers.count(*dataset.paper_id))
      row[5] = static_cast<double>(
          influ::citations_by_year_end(snapshot, *dataset.paper_id, *fv.a_pub + 1));
    table.row_ids.push_back(fv.dataset_id);
    table.values.push_back(std::move(row));
  }

  auto report = influ::run_citation_regression(table);
  std::cout << "complete cases: " << report.n_obs << " of " << considered
            << " datasets released by " << eval_year - 1 << "\n";
  emit(influ::render_regression_report(report, influ::parse_report_format(global.format)),
       out_path);
  return kExitOk;
}

int cmd_cluster(const GlobalOptions& global, int k, int restarts, int k_min, int k_max,
                const std::string& out_stem, bool all_papers) {
  auto snapshot = load_or_die(global.snapshot_path);
  auto trajectories = influ::build_trajectories(snapshot, influ::kDefaultTrajectoryOffsets,
                                                /*dataset_papers_only=*/!all_papers);
  std::vector<std::vector<double>> points;
  points.reserve(trajectories.size());
  for (const auto& t : trajectories) {
    std::vector<double> p;
    for (int64_t v : t.values) p.push_back(static_cast<double>(v));
    points.push_back(std::move(p));
  }

  auto model = influ::kmeans_best_of(points, k, global.seed, restarts);
  auto series = influ::elbow(points, k_min, std::min<int>(k_max, static_cast<int>(points.size())),
                             global.seed, restarts);
  for (const auto& w : series.warnings) std::cerr << "warning: " << w << "\n";

  if (out_stem.empty()) {
    std::cout << "# assignments\n" << influ::render_assignments_csv(trajectories, model);
    std::cout << "# cluster means\n" << influ::render_cluster_means_csv(trajectories, model);
    std::cout << "# elbow\n" << influ::render_elbow_csv(series);
  } else {
    influ::atomic_write(out_stem + "_assignments.csv",
                        influ::render_assignments_csv(trajectories, model));
    influ::atomic_write(out_stem + "_clusters.csv",
                        influ::render_cluster_means_csv(trajectories, model));
    influ::atomic_write(out_stem + "_elbow.csv", influ::render_elbow_csv(series));
  }
  return kExitOk;
}

int cmd_timeline(const GlobalOptions& global, const std::string& out_stem) {
  auto snapshot = load_or_die(global.snapshot_path);
  auto series = influ::build_publication_timeline(snapshot);
  if (out_stem.empty()) {
    std::cout << influ::render_timeline_csv(series);
  } else {
    influ::atomic_write(out_stem + ".csv", influ::render_timeline_csv(series));
    influ::atomic_write(out_stem + ".svg", influ::render_timeline_svg(series));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scientometric scoring of autonomous-driving datasets"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--snapshot", global.snapshot_path, "Snapshot file to read");
  app.add_option("--year", global.year, "Evaluation / filter year");
  app.add_option("--format", global.format, "Report format: markdown|csv|json");
  app.add_option("--seed", global.seed, "Root seed for randomized steps");
  app.add_flag("--offline", global.offline, "Serve all HTTP from the response cache");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Pull the three sources and write a snapshot");
  std::string ad_datasets, ingest_out, created_at = "1970-01-01T00:00:00Z";
  influ::FetchPlan plan;
  influ::FieldMapping mapping;
  std::vector<std::string> field_map_kv;
  ingest->add_option("--ad-datasets", ad_datasets, "Path or URL of the dataset catalogue")
      ->required();
  ingest->add_option("--out", ingest_out, "Snapshot output path")->required();
  ingest->add_option("--ss-base-url", plan.graph_base_url, "Academic-graph base URL")->required();
  ingest->add_option("--altmetric-base-url", plan.altmetric_base_url, "Altmetric base URL")
      ->required();
  ingest->add_option("--cache-dir", plan.cache_dir, "HTTP response cache directory");
  ingest->add_option("--created-at", created_at, "Timestamp recorded in the snapshot header");
  ingest->add_option("--workers", plan.workers, "Fetch workers per source");
  ingest->add_option("--graph-rate", plan.graph_rate, "Academic-graph requests per second");
  ingest->add_option("--graph-burst", plan.graph_burst, "Academic-graph burst size");
  ingest->add_option("--altmetric-rate", plan.altmetric_rate, "Altmetric requests per second");
  ingest->add_option("--altmetric-burst", plan.altmetric_burst, "Altmetric burst size");
  ingest->add_option("--max-edges", plan.max_edges_per_paper, "Citation cap per paper");
  ingest->add_option("--retries", plan.retry.max_attempts, "Attempts per request");
  ingest->add_option("--field-map", field_map_kv,
                     "Catalogue key overrides, e.g. frames=nFrames (repeatable)");
  ingest->add_flag("--strict-mapping", mapping.strict, "Missing mapped keys are fatal");
  ingest->add_flag("--no-references", [&plan](int64_t) { plan.fetch_references = false; },
                   "Skip reference expansion");
  ingest->add_flag("--no-citations", [&plan](int64_t) { plan.fetch_citations = false; },
                   "Skip citing-paper expansion");
  ingest->add_flag("--no-author-papers", [&plan](int64_t) { plan.fetch_author_papers = false; },
                   "Skip author publication lists");

  // features / rank / regress
  std::string out_path;
  auto* features = app.add_subcommand("features", "Export the feature table as CSV");
  features->add_option("--out", out_path, "Output file (default stdout)");
  auto* rank = app.add_subcommand("rank", "Ranked Influence Score report");
  rank->add_option("--out", out_path, "Output file (default stdout)");
  std::string histogram_stem;
  rank->add_option("--histogram", histogram_stem,
                   "Also write the IS distribution as <stem>.csv and <stem>.svg");
  auto* regress = app.add_subcommand("regress", "Citation regression with diagnostics");
  regress->add_option("--out", out_path, "Output file (default stdout)");

  // history
  auto* history = app.add_subcommand("history", "Per-year Influence Score for one dataset");
  std::string dataset_id, out_stem;
  std::optional<int> from, to;
  history->add_option("dataset", dataset_id, "Dataset id")->required();
  history->add_option("--from", from, "First year (default: publication year)");
  history->add_option("--to", to, "Last year (default: snapshot coverage)");
  history->add_option("--out", out_stem, "Output stem; writes <stem>.csv and <stem>.svg");

  // cluster
  auto* cluster = app.add_subcommand("cluster", "k-means over citation trajectories");
  int k = 6, restarts = 10, k_min = 1, k_max = 10;
  bool all_papers = false;
  cluster->add_option("--k", k, "Cluster count");
  cluster->add_option("--restarts", restarts, "Seeded restarts per k");
  cluster->add_option("--k-min", k_min, "Elbow range start");
  cluster->add_option("--k-max", k_max, "Elbow range end");
  cluster->add_flag("--all-papers", all_papers, "Cluster every paper, not only dataset papers");
  cluster->add_option("--out", out_stem,
                      "Output stem; writes _assignments/_clusters/_elbow CSVs");

  // timeline
  auto* timeline = app.add_subcommand("timeline", "Datasets and citations per year");
  timeline->add_option("--out", out_stem, "Output stem; writes <stem>.csv and <stem>.svg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    for (const auto& kv : field_map_kv) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw influ::DataError("--field-map expects key=value: " + kv);
      std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
      if (key == "id") mapping.id = value;
      else if (key == "name") mapping.name = value;
      else if (key == "doi") mapping.doi = value;
      else if (key == "arxiv") mapping.arxiv = value;
      else if (key == "frames") mapping.frames = value;
      else if (key == "sensors") mapping.sensors = value;
      else if (key == "year") mapping.year = value;
      else throw influ::DataError("--field-map: unknown field " + key);
    }

    if (ingest->parsed())
      return cmd_ingest(global, ad_datasets, mapping, plan, ingest_out, created_at);
    if (features->parsed()) return cmd_features(global, out_path);
    if (rank->parsed()) return cmd_rank(global, out_path, histogram_stem);
    if (regress->parsed()) return cmd_regress(global, out_path);
    if (history->parsed()) return cmd_history(global, dataset_id, from, to, out_stem);
    if (cluster->parsed())
      return cmd_cluster(global, k, restarts, k_min, k_max, out_stem, all_papers);
    if (timeline->parsed()) return cmd_timeline(global, out_stem);
    return kExitUsage;
  } catch (const influ::SourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
