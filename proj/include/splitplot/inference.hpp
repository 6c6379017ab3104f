#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "splitplot/covariance.hpp"
#include "splitplot/design_gen.hpp"
#include "splitplot/model_spec.hpp"

namespace splitplot {

/// Observed responses for a design plus the whole-plot block column.
struct ResponseTable {
  Design design;
  std::vector<std::pair<std::string, Eigen::VectorXd>> responses;
  std::vector<std::size_t> whole_plot;  // 0-based, one per run

  /// Throws ValidationError for an unknown name.
  const Eigen::VectorXd& response(const std::string& name) const;
  std::vector<std::string> response_names() const;

  /// Row counts agree with the design and the block column matches the
  /// design's whole-plot assignment exactly.
  void validate() const;
};

/// -2 x restricted log-likelihood profiled over sigma2_epsilon, constants
/// dropped:
///   log det V + log det(X^T V^{-1} X) + (n - p) log(y^T P y)
/// with V = I + eta Z Z^T and P the GLS residual projector.
/// Throws NumericalError when X is rank deficient or y is fitted exactly.
double reml_objective(double eta, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                      const WholePlotLayout& layout);

struct RemlSearch {
  double eta = 0.0;
  double objective = 0.0;
  bool boundary = false;  // eta pinned at zero
};

/// Minimizes reml_objective over eta in {0} U [1e-8, 1e8]: a log-spaced scan
/// brackets the minimum, golden-section search on log eta refines it to 1e-8.
/// If eta = 0 scores at least as well the boundary solution is returned.
RemlSearch reml_minimize(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const WholePlotLayout& layout);

struct GlsFit {
  std::string response;
  ModelSpec model;
  WholePlotLayout layout;
  std::vector<std::string> column_labels;

  Eigen::VectorXd coefficients;
  Eigen::MatrixXd coefficient_cov;  // sigma2_epsilon (X^T V_eta^{-1} X)^{-1}
  VarianceComponents components;
  double eta = 0.0;
  bool boundary = false;
  /// Zero for an exact fit (y in the column space of X).
  double residual_ss = 0.0;

  Eigen::VectorXd observed;
  Eigen::VectorXd fitted;     // X beta
  Eigen::VectorXd residuals;  // marginal: y - X beta
  ContainmentDf den_df;
};

/// REML variance components + GLS fixed effects.
/// Throws ValidationError when the responses do not match the design, there
/// are fewer than two whole plots, or a randomization level has no error
/// df; NumericalError when X is rank deficient.
GlsFit reml_fit(const Design& design, const ModelSpec& model, const Eigen::VectorXd& y,
                const std::string& name = "y");
GlsFit reml_fit(const ResponseTable& table, const std::string& response, const ModelSpec& model);

/// GLS with a known variance ratio. sigma2_epsilon is estimated from the
/// GLS residuals when n > p and left NaN for saturated designs.
GlsFit gls_fit(const Design& design, const ModelSpec& model, const Eigen::VectorXd& y, double eta,
               const std::string& name = "y");

struct TermTest {
  std::string term;
  Level level = Level::SubPlot;
  std::size_t num_df = 1;
  long den_df = 0;
  double f = 0.0;
  double p = 1.0;
};

/// Wald F per term with containment denominator df.
std::vector<TermTest> fixed_effect_tests(const GlsFit& fit);

struct FitSummary {
  double r_squared = 0.0;  // squared correlation of observed and fitted
  double rmse = 0.0;       // sqrt(sigma2_epsilon)
  double overall_f = 0.0;  // joint Wald F on all non-intercept columns
  std::size_t overall_num_df = 0;
  long overall_den_df = 0;
  double overall_p = 1.0;
};

FitSummary fit_summary(const GlsFit& fit);

struct ResidualRow {
  std::size_t run = 0;  // 1-based
  double observed = 0.0;
  double predicted = 0.0;
  double residual = 0.0;
  std::size_t whole_plot = 0;  // 1-based
};

std::vector<ResidualRow> residual_report(const GlsFit& fit);

}  // namespace splitplot
