#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace influ {

enum class Transform { kNone, kStandardize, kLog1p, kLog1pStandardize };

struct RegressorSpec {
  std::string name;
  Transform transform = Transform::kStandardize;
};

struct DesignSpec {
  std::vector<RegressorSpec> regressors;
  // Squared after standardization, appended after the base columns.
  std::vector<std::string> quadratic_terms;
  bool intercept = true;
  RegressorSpec dependent;
};

// Observations by name; absent cells mark missing data. Rows with any missing
// regressor or dependent are excluded from the design (complete-case rule).
struct ObsTable {
  std::vector<std::string> columns;
  std::vector<std::string> row_ids;
  std::vector<std::vector<std::optional<double>>> values;  // [row][column]
};

// Subtract the mean, divide by the population standard deviation.
// Throws DataError for fewer than two values or zero variance.
std::vector<double> standardize(const std::vector<double>& values);

// Elementwise natural log of (x + 1); throws DataError on negative input.
std::vector<double> log1p_transform(const std::vector<double>& values);

struct Design {
  Eigen::MatrixXd X;              // intercept column last, when present
  Eigen::VectorXd y;
  std::vector<std::string> column_names;
  std::vector<int> used_rows;     // indices into the ObsTable
};

Design build_design(const ObsTable& table, const DesignSpec& spec);

struct OlsFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd xtx_inverse;
  double sigma2 = 0.0;  // SSR / (n - k)
  int n = 0;
  int k = 0;
};

// Least squares via column-pivoted QR. Throws DataError on rank deficiency,
// naming the offending column when names are supplied.
OlsFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const std::vector<std::string>* column_names = nullptr);

std::vector<double> classical_se(const OlsFit& fit);

// Heteroskedasticity-consistent sandwich (HC1):
//   (X'X)^-1 X' diag(e^2) X (X'X)^-1 * n/(n-k)
std::vector<double> robust_se(const Eigen::MatrixXd& X, const OlsFit& fit);

// Variance inflation factors for the given regressors (no intercept column;
// one is added internally for the auxiliary fits). Perfect collinearity is
// reported as infinity.
std::vector<double> vif(const Eigen::MatrixXd& regressors);

struct LmTest {
  double stat = 0.0;
  double p = 1.0;
  int df = 0;
};

// Breusch-Pagan LM test: n * R^2 from regressing squared residuals on X;
// chi-squared with (columns(X) - 1) degrees of freedom.
LmTest breusch_pagan(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals);

// White test: auxiliary regressors are the design columns, their squares and
// pairwise products, deduplicated; collinear terms are dropped and recorded.
LmTest white_test(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                  const std::vector<std::string>* column_names = nullptr,
                  std::vector<std::string>* dropped_terms = nullptr);

// Regularized incomplete gamma functions, accurate to ~1e-10 over the ranges
// needed for the chi-squared tails used here.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// P(chi2_df > x).
double chi_squared_sf(double x, int df);

// Two-sided normal p-value for a z statistic.
double normal_two_sided_p(double z);

struct CoefficientReport {
  std::string name;
  double coef = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p = 1.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct RegressionReport {
  std::vector<CoefficientReport> coefficients;
  int n_obs = 0;
  std::vector<std::pair<std::string, double>> vif;  // non-intercept regressors
  LmTest breusch_pagan;
  LmTest white;
  std::vector<std::string> dropped_white_terms;
  std::string se_kind = "HC1";
};

// Fits the design and assembles the report: z = coef/se, two-sided normal
// p-values, 95% intervals at 1.96 standard errors, plus diagnostics.
RegressionReport fit_with_diagnostics(const ObsTable& table, const DesignSpec& spec,
                                      bool robust = true);

// The citation regression: dependent log1p(cit_1y); standardized regressors
// ref_h3, aut_mu_h3, a_pub, n_sensors, aas_3m plus the square of the
// standardized aas_3m; intercept last.
RegressionReport run_citation_regression(const ObsTable& table);

DesignSpec citation_regression_spec();

}  // namespace influ
