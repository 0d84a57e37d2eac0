#include "influ/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "influ/canonical_json.hpp"
#include "influ/common.hpp"

namespace influ {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// Threshold marking the top three distinct present values of a column.
std::optional<double> top3_threshold(const std::vector<std::optional<double>>& column) {
  std::set<double, std::greater<double>> distinct;
  for (const auto& v : column)
    if (v) distinct.insert(*v);
  if (distinct.empty()) return std::nullopt;
  auto it = distinct.begin();
  std::advance(it, std::min<size_t>(2, distinct.size() - 1));
  return *it;
}

struct Svg {
  std::ostringstream out;
  double width, height;

  Svg(double w, double h) : width(w), height(h) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 12,
            const std::string& anchor = "start") {
    out << "<text x=\"" << fixed(x, 1) << "\" y=\"" << fixed(y, 1) << "\" font-size=\"" << size
        << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\">" << s << "</text>\n";
  }
  void line(double x1, double y1, double x2, double y2, const std::string& stroke = "#888") {
    out << "<line x1=\"" << fixed(x1, 1) << "\" y1=\"" << fixed(y1, 1) << "\" x2=\""
        << fixed(x2, 1) << "\" y2=\"" << fixed(y2, 1) << "\" stroke=\"" << stroke << "\"/>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                double stroke_width = 1.5) {
    out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
        << fixed(stroke_width, 2) << "\" points=\"";
    for (size_t i = 0; i < pts.size(); ++i) {
      if (i) out << ' ';
      out << fixed(pts[i].first, 2) << ',' << fixed(pts[i].second, 2);
    }
    out << "\"/>\n";
  }
  std::string finish() {
    out << "</svg>\n";
    return out.str();
  }
};

const std::vector<std::string> kPalette = {"#1b6ca8", "#d1495b", "#66a182", "#edae49",
                                           "#8d6a9f", "#454e56", "#00798c", "#b36a5e"};

struct ChartSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // data coordinates
};

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::vector<ChartSeries>& series) {
  const double w = 760, h = 420, ml = 64, mr = 160, mt = 40, mb = 48;
  Svg svg(w, h);
  svg.text(w / 2, 22, title, 14, "middle");

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool any = false;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (!any) {
        xmin = xmax = x;
        ymin = ymax = y;
        any = true;
      }
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  ymin = std::min(ymin, 0.0);

  auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto sy = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

  svg.line(ml, h - mb, w - mr, h - mb);
  svg.line(ml, mt, ml, h - mb);
  svg.text(ml - 6, sy(ymin) + 4, fixed(ymin, 1), 11, "end");
  svg.text(ml - 6, sy(ymax) + 4, fixed(ymax, 1), 11, "end");
  svg.text(sx(xmin), h - mb + 18, fixed(xmin, 0), 11, "middle");
  svg.text(sx(xmax), h - mb + 18, fixed(xmax, 0), 11, "middle");
  svg.text((ml + w - mr) / 2, h - 12, x_label, 12, "middle");

  for (size_t i = 0; i < series.size(); ++i) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [x, y] : series[i].points) pts.emplace_back(sx(x), sy(y));
    const std::string& color = kPalette[i % kPalette.size()];
    svg.polyline(pts, color);
    svg.text(w - mr + 12, mt + 16 * static_cast<double>(i) + 12, series[i].label, 11);
    svg.line(w - mr + 2, mt + 16 * static_cast<double>(i) + 8, w - mr + 10,
             mt + 16 * static_cast<double>(i) + 8, color);
  }
  return svg.finish();
}

}  // namespace

ReportFormat parse_report_format(const std::string& name) {
  if (name == "markdown" || name == "md") return ReportFormat::kMarkdown;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  throw DataError("unknown report format: " + name);
}

std::string render_rank_report(const std::vector<InfluenceResult>& results, ReportFormat format) {
  // Column-wise top-3 thresholds over the report rows.
  std::array<std::optional<double>, kInfluenceFeatureCount> thresholds;
  for (int c = 0; c < kInfluenceFeatureCount; ++c) {
    std::vector<std::optional<double>> column;
    column.reserve(results.size());
    for (const auto& r : results) column.push_back(r.percentiles[c]);
    thresholds[c] = top3_threshold(column);
  }
  auto is_top3 = [&](const InfluenceResult& r, int c) {
    return r.percentiles[c] && thresholds[c] && *r.percentiles[c] >= *thresholds[c];
  };

  if (format == ReportFormat::kJson) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : results) {
      nlohmann::json row;
      row["dataset_id"] = r.dataset_id;
      row["eval_year"] = r.eval_year;
      if (r.is_score) row["is"] = *r.is_score;
      row["n_available"] = r.n_available;
      nlohmann::json percentiles;
      nlohmann::json top3 = nlohmann::json::array();
      for (int c = 0; c < kInfluenceFeatureCount; ++c) {
        if (r.percentiles[c]) percentiles[kInfluenceFeatureNames[c]] = *r.percentiles[c];
        if (is_top3(r, c)) top3.push_back(kInfluenceFeatureNames[c]);
      }
      row["percentiles"] = percentiles;
      row["top3"] = top3;
      rows.push_back(row);
    }
    return canonical_dump(rows) + "\n";
  }

  const bool markdown = format == ReportFormat::kMarkdown;
  std::string out;
  if (markdown) {
    out = "| dataset | IS |";
    for (const auto* name : kInfluenceFeatureNames) out += std::string(" ") + name + " |";
    out += "\n|---|---|";
    for (int c = 0; c < kInfluenceFeatureCount; ++c) out += "---|";
    out += "\n";
  } else {
    out = "dataset,is";
    for (const auto* name : kInfluenceFeatureNames) out += std::string(",") + name;
    out += "\n";
  }
  for (const auto& r : results) {
    std::string row = markdown ? "| " + r.dataset_id + " | " : r.dataset_id + ",";
    row += r.is_score ? fixed(*r.is_score, 2) : "--";
    for (int c = 0; c < kInfluenceFeatureCount; ++c) {
      std::string cell = r.percentiles[c] ? fixed(*r.percentiles[c], 2) : "--";
      if (is_top3(r, c)) cell = markdown ? "**" + cell + "**" : cell + "*";
      row += markdown ? " | " + cell : "," + cell;
    }
    out += markdown ? row + " |\n" : row + "\n";
  }
  return out;
}

std::string render_regression_report(const RegressionReport& report, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    nlohmann::json j;
    j["n_obs"] = report.n_obs;
    j["se_kind"] = report.se_kind;
    nlohmann::json coefs = nlohmann::json::array();
    for (const auto& c : report.coefficients) {
      nlohmann::json row;
      row["name"] = c.name;
      row["coef"] = c.coef;
      row["std_err"] = c.se;
      row["z"] = c.z;
      row["p"] = c.p;
      row["ci_low"] = c.ci_low;
      row["ci_high"] = c.ci_high;
      coefs.push_back(row);
    }
    j["coefficients"] = coefs;
    nlohmann::json vifs;
    for (const auto& [name, value] : report.vif)
      vifs[name] = std::isinf(value) ? nlohmann::json("inf") : nlohmann::json(value);
    j["vif"] = vifs;
    j["breusch_pagan"] = {{"stat", report.breusch_pagan.stat},
                          {"p", report.breusch_pagan.p},
                          {"df", report.breusch_pagan.df}};
    j["white"] = {{"stat", report.white.stat}, {"p", report.white.p}, {"df", report.white.df}};
    j["dropped_white_terms"] = report.dropped_white_terms;
    return canonical_dump(j) + "\n";
  }

  const bool markdown = format == ReportFormat::kMarkdown;
  std::string out;
  if (markdown) {
    out += "| term | coef | std err | z | P>\\|z\\| | 0.025 | 0.975 |\n";
    out += "|---|---|---|---|---|---|---|\n";
  } else {
    out += "term,coef,std_err,z,p,ci_low,ci_high\n";
  }
  for (const auto& c : report.coefficients) {
    std::vector<std::string> cells = {c.name,           fixed(c.coef, 4), fixed(c.se, 4),
                                      fixed(c.z, 4),    fixed(c.p, 4),    fixed(c.ci_low, 4),
                                      fixed(c.ci_high, 4)};
    if (markdown) {
      out += "|";
      for (const auto& cell : cells) out += " " + cell + " |";
      out += "\n";
    } else {
      for (size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
      out += "\n";
    }
  }
  std::string prefix = markdown ? "\n" : "#";
  out += prefix + std::string(markdown ? "n_obs: " : " n_obs: ") + std::to_string(report.n_obs) +
         (markdown ? "; standard errors: " : "; standard errors: ") + report.se_kind + "\n";
  out += (markdown ? "\nVIF: " : "# VIF: ");
  for (size_t i = 0; i < report.vif.size(); ++i) {
    if (i) out += ", ";
    out += report.vif[i].first + "=" +
           (std::isinf(report.vif[i].second) ? "inf" : fixed(report.vif[i].second, 3));
  }
  out += "\n";
  out += (markdown ? "\nBreusch-Pagan: " : "# Breusch-Pagan: ");
  out += "stat=" + fixed(report.breusch_pagan.stat, 4) + ", p=" + fixed(report.breusch_pagan.p, 4) +
         ", df=" + std::to_string(report.breusch_pagan.df) + "\n";
  out += (markdown ? "\nWhite: " : "# White: ");
  out += "stat=" + fixed(report.white.stat, 4) + ", p=" + fixed(report.white.p, 4) +
         ", df=" + std::to_string(report.white.df);
  if (!report.dropped_white_terms.empty()) {
    out += " (dropped:";
    for (const auto& t : report.dropped_white_terms) out += " " + t;
    out += ")";
  }
  out += "\n";
  return out;
}

namespace {

std::array<int64_t, 10> histogram_bins(const std::vector<InfluenceResult>& results) {
  std::array<int64_t, 10> bins{};
  for (const auto& r : results) {
    if (!r.is_score) continue;
    int bin = std::min(9, static_cast<int>(*r.is_score * 10.0));
    bins[bin]++;
  }
  return bins;
}

}  // namespace

std::string render_is_histogram_csv(const std::vector<InfluenceResult>& results) {
  auto bins = histogram_bins(results);
  std::string out = "bin_low,bin_high,count\n";
  for (int b = 0; b < 10; ++b)
    out += fixed(b / 10.0, 1) + "," + fixed((b + 1) / 10.0, 1) + "," + std::to_string(bins[b]) +
           "\n";
  return out;
}

std::string render_is_histogram_svg(const std::vector<InfluenceResult>& results) {
  auto bins = histogram_bins(results);
  int64_t peak = 1;
  for (int64_t c : bins) peak = std::max(peak, c);
  const double w = 560, h = 360, ml = 48, mt = 40, mb = 44;
  Svg svg(w, h);
  svg.text(w / 2, 22, "Influence Score distribution", 14, "middle");
  svg.line(ml, h - mb, w - 16, h - mb);
  double band = (w - 16 - ml) / 10.0;
  for (int b = 0; b < 10; ++b) {
    double height = (h - mt - mb) * static_cast<double>(bins[b]) / static_cast<double>(peak);
    double x = ml + band * b;
    svg.out << "<rect x=\"" << fixed(x + 2, 1) << "\" y=\"" << fixed(h - mb - height, 1)
            << "\" width=\"" << fixed(band - 4, 1) << "\" height=\"" << fixed(height, 1)
            << "\" fill=\"#1b6ca8\"/>\n";
    svg.text(x + band / 2, h - mb + 16, fixed(b / 10.0, 1), 10, "middle");
    if (bins[b] > 0) svg.text(x + band / 2, h - mb - height - 4, std::to_string(bins[b]), 10, "middle");
  }
  return svg.finish();
}

std::string render_timeline_csv(const std::vector<TimelinePoint>& series) {
  std::string out = "year,datasets,citations,cumulative_datasets,cumulative_citations\n";
  for (const auto& p : series)
    out += std::to_string(p.year) + "," + std::to_string(p.datasets) + "," +
           std::to_string(p.citations) + "," + std::to_string(p.cumulative_datasets) + "," +
           std::to_string(p.cumulative_citations) + "\n";
  return out;
}

std::string render_timeline_svg(const std::vector<TimelinePoint>& series) {
  std::vector<ChartSeries> chart(2);
  chart[0].label = "datasets (cumulative)";
  chart[1].label = "citations (cumulative)";
  for (const auto& p : series) {
    chart[0].points.emplace_back(p.year, static_cast<double>(p.cumulative_datasets));
    chart[1].points.emplace_back(p.year, static_cast<double>(p.cumulative_citations));
  }
  return line_chart("Published datasets and citations", "year", chart);
}

std::string render_history_csv(const std::vector<InfluenceResult>& series) {
  std::string out = "year,is,n_available";
  for (const auto* name : kInfluenceFeatureNames) out += std::string(",") + name;
  out += "\n";
  for (const auto& r : series) {
    out += std::to_string(r.eval_year) + ",";
    out += r.is_score ? fixed(*r.is_score, 2) : "";
    out += "," + std::to_string(r.n_available);
    for (int c = 0; c < kInfluenceFeatureCount; ++c) {
      out += ",";
      if (r.percentiles[c]) out += fixed(*r.percentiles[c], 2);
    }
    out += "\n";
  }
  return out;
}

std::string render_history_svg(const std::vector<InfluenceResult>& series,
                               const std::string& dataset_id) {
  std::vector<ChartSeries> chart;
  ChartSeries is_series;
  is_series.label = "IS";
  for (const auto& r : series)
    if (r.is_score) is_series.points.emplace_back(r.eval_year, *r.is_score);
  chart.push_back(std::move(is_series));
  for (int c = 0; c < kInfluenceFeatureCount; ++c) {
    ChartSeries s;
    s.label = kInfluenceFeatureNames[c];
    for (const auto& r : series)
      if (r.percentiles[c]) s.points.emplace_back(r.eval_year, *r.percentiles[c]);
    if (!s.points.empty()) chart.push_back(std::move(s));
  }
  return line_chart("Influence Score history: " + dataset_id, "year", chart);
}

std::string render_assignments_csv(const std::vector<Trajectory>& trajectories,
                                   const ClusterModel& model) {
  std::string out = "paper_id,cluster\n";
  for (size_t i = 0; i < trajectories.size(); ++i)
    out += trajectories[i].paper_id + "," + std::to_string(model.assignments[i]) + "\n";
  return out;
}

std::string render_cluster_means_csv(const std::vector<Trajectory>& trajectories,
                                     const ClusterModel& model) {
  std::string out = "cluster,size";
  if (!trajectories.empty())
    for (int offset : trajectories[0].offsets) out += ",offset_" + std::to_string(offset);
  out += "\n";
  std::vector<int64_t> sizes(model.k, 0);
  for (int a : model.assignments) sizes[a]++;
  for (int c = 0; c < model.k; ++c) {
    out += std::to_string(c) + "," + std::to_string(sizes[c]);
    for (double v : model.centroids[c]) out += "," + fixed(v, 4);
    out += "\n";
  }
  return out;
}

std::string render_elbow_csv(const ElbowSeries& series) {
  std::string out = "k,inertia\n";
  for (const auto& [k, inertia] : series.inertia_by_k)
    out += std::to_string(k) + "," + fixed(inertia, 6) + "\n";
  return out;
}

void atomic_write(const std::string& path, const std::string& content) {
  std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + tmp);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) throw DataError("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace influ
