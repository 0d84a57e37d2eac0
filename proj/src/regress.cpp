#include "influ/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "influ/common.hpp"

namespace influ {

namespace {

constexpr double kEps = 1e-12;

int column_index(const ObsTable& table, const std::string& name) {
  auto it = std::find(table.columns.begin(), table.columns.end(), name);
  if (it == table.columns.end()) throw DataError("unknown feature column: " + name);
  return static_cast<int>(it - table.columns.begin());
}

// Centered R^2 of regressing y on X (X already contains an intercept).
// A constant dependent yields 0 by convention.
double centered_r2(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  double mean = y.mean();
  double sst = (y.array() - mean).square().sum();
  if (sst <= kEps) return 0.0;
  Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
  double ssr = (y - X * beta).squaredNorm();
  double r2 = 1.0 - ssr / sst;
  return std::clamp(r2, 0.0, 1.0);
}

}  // namespace

std::vector<double> standardize(const std::vector<double>& values) {
  if (values.size() < 2) throw DataError("standardize needs at least two values");
  double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= values.size();  // population convention
  if (var <= kEps) throw DataError("zero variance input to standardize");
  double sd = std::sqrt(var);
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back((v - mean) / sd);
  return out;
}

std::vector<double> log1p_transform(const std::vector<double>& values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) {
    if (v < 0) throw DataError("log1p input must be non-negative");
    out.push_back(std::log1p(v));
  }
  return out;
}

namespace {

std::vector<double> apply_transform(std::vector<double> values, Transform t,
                                    const std::string& name) {
  try {
    switch (t) {
      case Transform::kNone:
        return values;
      case Transform::kStandardize:
        return standardize(values);
      case Transform::kLog1p:
        return log1p_transform(values);
      case Transform::kLog1pStandardize:
        return standardize(log1p_transform(values));
    }
  } catch (const DataError& e) {
    throw DataError("feature '" + name + "': " + e.what());
  }
  throw DataError("unknown transform");
}

}  // namespace

Design build_design(const ObsTable& table, const DesignSpec& spec) {
  std::vector<int> regressor_cols;
  for (const auto& r : spec.regressors) regressor_cols.push_back(column_index(table, r.name));
  int dependent_col = column_index(table, spec.dependent.name);

  for (const auto& q : spec.quadratic_terms) {
    bool declared = std::any_of(spec.regressors.begin(), spec.regressors.end(),
                                [&q](const RegressorSpec& r) { return r.name == q; });
    if (!declared) throw DataError("quadratic term '" + q + "' is not a declared regressor");
  }

  Design design;
  for (size_t row = 0; row < table.values.size(); ++row) {
    bool complete = table.values[row][dependent_col].has_value();
    for (int col : regressor_cols) complete = complete && table.values[row][col].has_value();
    if (complete) design.used_rows.push_back(static_cast<int>(row));
  }
  int n = static_cast<int>(design.used_rows.size());
  if (n < 2) throw DataError("fewer than 2 complete cases (" + std::to_string(n) + ")");

  auto column_values = [&](int col) {
    std::vector<double> out;
    out.reserve(design.used_rows.size());
    for (int row : design.used_rows) out.push_back(*table.values[row][col]);
    return out;
  };

  std::vector<std::vector<double>> base_columns;
  for (size_t i = 0; i < spec.regressors.size(); ++i)
    base_columns.push_back(apply_transform(column_values(regressor_cols[i]),
                                           spec.regressors[i].transform, spec.regressors[i].name));

  int k = static_cast<int>(spec.regressors.size() + spec.quadratic_terms.size()) +
          (spec.intercept ? 1 : 0);
  design.X.resize(n, k);
  int out_col = 0;
  for (size_t i = 0; i < base_columns.size(); ++i, ++out_col) {
    design.column_names.push_back(spec.regressors[i].name);
    for (int row = 0; row < n; ++row) design.X(row, out_col) = base_columns[i][row];
  }
  for (const auto& q : spec.quadratic_terms) {
    size_t base = 0;
    while (spec.regressors[base].name != q) ++base;
    design.column_names.push_back(q + "^2");
    for (int row = 0; row < n; ++row)
      design.X(row, out_col) = base_columns[base][row] * base_columns[base][row];
    ++out_col;
  }
  if (spec.intercept) {
    design.column_names.push_back("intercept");
    for (int row = 0; row < n; ++row) design.X(row, out_col) = 1.0;
  }

  auto y_values =
      apply_transform(column_values(dependent_col), spec.dependent.transform, spec.dependent.name);
  design.y = Eigen::Map<Eigen::VectorXd>(y_values.data(), n);
  return design;
}

OlsFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const std::vector<std::string>* column_names) {
  const int n = static_cast<int>(X.rows());
  const int k = static_cast<int>(X.cols());
  if (n <= k) throw DataError("need more observations than regressors");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    // Identify the first column linearly dependent on its predecessors.
    std::string offender = "?";
    for (int j = 1; j < k; ++j) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> sub(X.leftCols(j + 1));
      sub.setThreshold(1e-10);
      if (sub.rank() < j + 1) {
        offender = column_names && j < static_cast<int>(column_names->size())
                       ? (*column_names)[j]
                       : "column " + std::to_string(j);
        break;
      }
    }
    throw DataError("design is rank deficient at " + offender);
  }

  OlsFit fit;
  fit.n = n;
  fit.k = k;
  fit.coef = qr.solve(y);
  fit.residuals = y - X * fit.coef;
  fit.sigma2 = fit.residuals.squaredNorm() / (n - k);
  fit.xtx_inverse = (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  return fit;
}

std::vector<double> classical_se(const OlsFit& fit) {
  std::vector<double> se(fit.k);
  for (int j = 0; j < fit.k; ++j) se[j] = std::sqrt(fit.sigma2 * fit.xtx_inverse(j, j));
  return se;
}

std::vector<double> robust_se(const Eigen::MatrixXd& X, const OlsFit& fit) {
  Eigen::VectorXd squared = fit.residuals.array().square();
  Eigen::MatrixXd meat = X.transpose() * squared.asDiagonal() * X;
  Eigen::MatrixXd cov = fit.xtx_inverse * meat * fit.xtx_inverse;
  double correction = static_cast<double>(fit.n) / (fit.n - fit.k);
  std::vector<double> se(fit.k);
  for (int j = 0; j < fit.k; ++j) se[j] = std::sqrt(correction * cov(j, j));
  return se;
}

std::vector<double> vif(const Eigen::MatrixXd& regressors) {
  const int k = static_cast<int>(regressors.cols());
  if (k < 2) throw DataError("vif needs at least two regressors");
  std::vector<double> out(k);
  for (int j = 0; j < k; ++j) {
    Eigen::MatrixXd others(regressors.rows(), k);  // k-1 regressors + intercept
    int col = 0;
    for (int i = 0; i < k; ++i)
      if (i != j) others.col(col++) = regressors.col(i);
    others.col(k - 1).setOnes();
    double r2 = centered_r2(others, regressors.col(j));
    out[j] = r2 >= 1.0 - 1e-12 ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - r2);
  }
  return out;
}

LmTest breusch_pagan(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals) {
  LmTest test;
  Eigen::VectorXd squared = residuals.array().square();
  test.df = static_cast<int>(X.cols()) - 1;
  if (test.df < 1) throw DataError("breusch_pagan needs a non-intercept regressor");
  double r2 = centered_r2(X, squared);
  test.stat = static_cast<double>(X.rows()) * r2;
  test.p = chi_squared_sf(test.stat, test.df);
  return test;
}

LmTest white_test(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                  const std::vector<std::string>* column_names,
                  std::vector<std::string>* dropped_terms) {
  const int n = static_cast<int>(X.rows());
  const int k = static_cast<int>(X.cols());

  auto name_of = [&](int j) {
    return column_names && j < static_cast<int>(column_names->size())
               ? (*column_names)[j]
               : "x" + std::to_string(j);
  };

  // Identify the intercept (a constant column) so it is not squared/crossed.
  std::vector<int> slope_cols;
  for (int j = 0; j < k; ++j) {
    double spread = X.col(j).maxCoeff() - X.col(j).minCoeff();
    if (spread > kEps) slope_cols.push_back(j);
  }
  if (slope_cols.empty()) throw DataError("white_test needs a non-constant regressor");

  std::vector<std::pair<std::string, Eigen::VectorXd>> candidates;
  for (int j : slope_cols) candidates.emplace_back(name_of(j), X.col(j));
  for (size_t a = 0; a < slope_cols.size(); ++a)
    for (size_t b = a; b < slope_cols.size(); ++b) {
      std::string label = a == b ? name_of(slope_cols[a]) + "^2"
                                 : name_of(slope_cols[a]) + "*" + name_of(slope_cols[b]);
      candidates.emplace_back(
          label, X.col(slope_cols[a]).cwiseProduct(X.col(slope_cols[b])).eval());
    }

  // Greedily keep candidates that are independent of what is kept so far
  // (plus the intercept); record the rest.
  Eigen::MatrixXd kept(n, 1);
  kept.col(0).setOnes();
  std::vector<std::string> kept_names;
  for (auto& [label, column] : candidates) {
    Eigen::VectorXd fitted = kept * kept.householderQr().solve(column);
    double residual_norm = (column - fitted).norm();
    if (residual_norm <= 1e-8 * std::max(1.0, column.norm())) {
      if (dropped_terms) dropped_terms->push_back(label);
      continue;
    }
    kept.conservativeResize(Eigen::NoChange, kept.cols() + 1);
    kept.col(kept.cols() - 1) = column;
    kept_names.push_back(label);
  }

  LmTest test;
  test.df = static_cast<int>(kept.cols()) - 1;
  if (test.df < 1) throw DataError("white_test has no usable auxiliary regressors");
  Eigen::VectorXd squared = residuals.array().square();
  double r2 = centered_r2(kept, squared);
  test.stat = n * r2;
  test.p = chi_squared_sf(test.stat, test.df);
  return test;
}

double regularized_gamma_p(double a, double x) {
  if (a <= 0.0) throw DataError("regularized_gamma_p requires a > 0");
  if (x < 0.0) throw DataError("regularized_gamma_p requires x >= 0");
  if (x == 0.0) return 0.0;

  const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    // Series expansion: P(a,x) = e^(-x) x^a / Gamma(a) * sum x^k / (a)_k+1
    double term = 1.0 / a;
    double sum = term;
    for (int k = 1; k < 1000; ++k) {
      term *= x / (a + k);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return std::min(1.0, sum * std::exp(log_prefactor));
  }
  // Continued fraction (modified Lentz) for Q(a,x).
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  double q = std::exp(log_prefactor) * h;
  return std::clamp(1.0 - q, 0.0, 1.0);
}

double regularized_gamma_q(double a, double x) {
  if (x < a + 1.0) return 1.0 - regularized_gamma_p(a, x);
  const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::clamp(std::exp(log_prefactor) * h, 0.0, 1.0);
}

double chi_squared_sf(double x, int df) {
  if (df < 1) throw DataError("chi_squared_sf requires df >= 1");
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(df / 2.0, x / 2.0);
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

RegressionReport fit_with_diagnostics(const ObsTable& table, const DesignSpec& spec,
                                      bool robust) {
  Design design = build_design(table, spec);
  OlsFit fit = ols_fit(design.X, design.y, &design.column_names);
  std::vector<double> se = robust ? robust_se(design.X, fit) : classical_se(fit);

  RegressionReport report;
  report.n_obs = fit.n;
  report.se_kind = robust ? "HC1" : "classical";
  for (int j = 0; j < fit.k; ++j) {
    CoefficientReport c;
    c.name = design.column_names[j];
    c.coef = fit.coef(j);
    c.se = se[j];
    c.z = se[j] > 0.0 ? c.coef / se[j] : 0.0;
    c.p = se[j] > 0.0 ? normal_two_sided_p(c.z) : 0.0;
    c.ci_low = c.coef - 1.96 * se[j];
    c.ci_high = c.coef + 1.96 * se[j];
    report.coefficients.push_back(c);
  }

  int slopes = spec.intercept ? fit.k - 1 : fit.k;
  if (slopes >= 2) {
    auto factors = vif(design.X.leftCols(slopes));
    for (int j = 0; j < slopes; ++j)
      report.vif.emplace_back(design.column_names[j], factors[j]);
  }
  report.breusch_pagan = breusch_pagan(design.X, fit.residuals);
  report.white =
      white_test(design.X, fit.residuals, &design.column_names, &report.dropped_white_terms);
  return report;
}

DesignSpec citation_regression_spec() {
  DesignSpec spec;
  spec.regressors = {{"ref_h3", Transform::kStandardize},
                     {"aut_mu_h3", Transform::kStandardize},
                     {"a_pub", Transform::kStandardize},
                     {"n_sensors", Transform::kStandardize},
                     {"aas_3m", Transform::kStandardize}};
  spec.quadratic_terms = {"aas_3m"};
  spec.intercept = true;
  spec.dependent = {"cit_1y", Transform::kLog1p};
  return spec;
}

RegressionReport run_citation_regression(const ObsTable& table) {
  return fit_with_diagnostics(table, citation_regression_spec(), /*robust=*/true);
}

}  // namespace influ
