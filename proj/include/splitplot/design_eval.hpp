#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "splitplot/design_gen.hpp"
#include "splitplot/model_spec.hpp"

namespace splitplot {

struct TermPower {
  std::string term;
  Level level = Level::SubPlot;
  std::size_t num_df = 1;
  /// [(X^T V^{-1} X)^{-1}]_jj with sigma2_epsilon = 1 (1-df terms); for
  /// multi-df terms the mean of the diagonal block.
  double variance_factor = 0.0;
  /// snr / sqrt(variance_factor) for 1-df terms; sqrt of the F
  /// noncentrality for multi-df terms.
  double noncentrality = 0.0;
  long den_df = 0;
  double power = 0.0;
};

struct PowerReport {
  std::vector<TermPower> terms;
  double snr = 1.0;
  double alpha = 0.05;
  double eta = 1.0;
};

/// Power of the per-term tests with containment denominator df, treating
/// eta as known. One-df terms use P(|T_df(delta)| > t_{df,1-alpha/2});
/// multi-df terms use a noncentral F with every coefficient equal to snr.
/// Throws NumericalError on a singular information matrix and
/// ValidationError on nonpositive df.
PowerReport power_report(const Design& design, const ModelSpec& model, double eta,
                         double snr = 1.0, double alpha = 0.05);

/// Two-sided power of a noncentral t test.
double t_test_power(double delta, double df, double alpha);

struct CorrelationReport {
  std::vector<std::string> labels;  // non-intercept model columns
  /// Pearson correlation; rows/columns of constant columns are NaN.
  Eigen::MatrixXd matrix;
  std::vector<std::string> constant_columns;
  double max_abs_offdiag = 0.0;
  bool alias_warning = false;
};

inline constexpr double kDefaultAliasThreshold = 0.5;

CorrelationReport term_correlation(const Design& design, const ModelSpec& model,
                                   double alias_threshold = kDefaultAliasThreshold);

struct VifEntry {
  std::string column;
  double vif = 1.0;
};

/// VIF_j = 1 / (1 - R^2_j), regressing column j on the remaining
/// non-intercept columns plus an intercept. Throws NumericalError on
/// singularity.
std::vector<VifEntry> vif(const Design& design, const ModelSpec& model);

struct PredictionVariance {
  double value = 0.0;
  bool outside_range = false;
};

/// f(x)^T (X^T V^{-1} X)^{-1} f(x) with sigma2_epsilon = 1 at coded point x.
/// Points outside the coded region are evaluated and flagged.
PredictionVariance prediction_variance(const Design& design, const ModelSpec& model, double eta,
                                       const std::vector<double>& point);

}  // namespace splitplot
