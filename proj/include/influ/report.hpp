#pragma once

#include <string>
#include <vector>

#include "influ/cluster.hpp"
#include "influ/corpus.hpp"
#include "influ/influence.hpp"
#include "influ/regress.hpp"

namespace influ {

enum class ReportFormat { kMarkdown, kCsv, kJson };

ReportFormat parse_report_format(const std::string& name);

// Ranked report: one row per dataset, IS first, then the per-feature
// percentiles in catalogue order. Values are shown with two decimals, absent
// cells as "--", and the top three distinct values of each feature column are
// marked (bold in Markdown, '*' in CSV, a flag list in JSON).
std::string render_rank_report(const std::vector<InfluenceResult>& results, ReportFormat format);

// Coefficient table in design order plus a diagnostics block (VIF, LM tests).
std::string render_regression_report(const RegressionReport& report, ReportFormat format);

// Influence Score distribution over the scored rows: ten fixed-width bins on
// (0, 1]; the counts sum to the number of scored datasets.
std::string render_is_histogram_csv(const std::vector<InfluenceResult>& results);
std::string render_is_histogram_svg(const std::vector<InfluenceResult>& results);

std::string render_timeline_csv(const std::vector<TimelinePoint>& series);
std::string render_timeline_svg(const std::vector<TimelinePoint>& series);

std::string render_history_csv(const std::vector<InfluenceResult>& series);
std::string render_history_svg(const std::vector<InfluenceResult>& series,
                               const std::string& dataset_id);

std::string render_assignments_csv(const std::vector<Trajectory>& trajectories,
                                   const ClusterModel& model);
// Per-cluster mean trajectory with cluster sizes.
std::string render_cluster_means_csv(const std::vector<Trajectory>& trajectories,
                                     const ClusterModel& model);
std::string render_elbow_csv(const ElbowSeries& series);

// Writes via a temp file in the same directory plus rename.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace influ
