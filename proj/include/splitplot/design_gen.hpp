#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "splitplot/covariance.hpp"
#include "splitplot/model_spec.hpp"

namespace splitplot {

struct Run {
  std::size_t whole_plot = 0;    // 0-based
  std::vector<double> settings;  // coded, one per factor

  bool operator==(const Run&) const = default;
};

/// A run table. Runs are kept in execution order.
struct Design {
  std::vector<Factor> factors;
  std::vector<Run> runs;

  std::size_t n_runs() const { return runs.size(); }
  std::size_t n_whole_plots() const;
  WholePlotLayout layout() const;

  /// Throws ValidationError when a setting is outside its factor's domain,
  /// a hard-to-change factor varies inside a whole plot, or the whole-plot
  /// indices are not 0..r-1.
  void validate() const;
};

/// n x p model matrix; columns follow ModelSpec::column_labels().
Eigen::MatrixXd expand_model_matrix(const Design& design, const ModelSpec& model);

/// X^T V^{-1} X with sigma2_epsilon = 1 and sigma2_gamma = eta.
Eigen::MatrixXd information_matrix(const Eigen::MatrixXd& x, const WholePlotLayout& layout,
                                   double eta);

/// log det of a symmetric positive definite matrix, or -infinity when the
/// Cholesky factorization fails or a pivot falls below 1e-10 of its
/// diagonal entry (a column with VIF above 1e10 counts as aliased).
double log_det_spd(const Eigen::MatrixXd& m);

/// log det(X^T V^{-1} X), -infinity when singular.
double d_criterion(const Design& design, const ModelSpec& model, double eta);

/// Balanced whole-plot sizes, larger plots first. Throws if r > n or r == 0.
std::vector<std::size_t> assign_whole_plot_sizes(std::size_t n, std::size_t r);

struct DesignSpec {
  ModelSpec model;
  std::size_t n_runs = 0;
  std::size_t n_whole_plots = 0;
  double assumed_ratio = 1.0;
  std::size_t n_starts = 20;
  std::uint64_t seed = 1;
  double tolerance = 1e-9;
  std::size_t threads = 0;  // 0: hardware concurrency

  void validate() const;
};

struct GenerationResult {
  Design design;
  double criterion = 0.0;
  std::size_t best_start = 0;
  /// Criterion after every accepted move of the winning start.
  std::vector<double> history;
  /// Rule-of-thumb df shortfalls; generation still proceeds.
  std::vector<std::string> warnings;
};

/// Multi-start coordinate exchange for D-optimal split-plot designs.
///
/// Each start draws a random design, then alternates sweeps over subplot
/// coordinates (one factor of one run at a time) and whole-plot
/// coordinates (one hard-to-change factor of a whole plot, changed for all
/// of its runs at once), accepting a candidate only if it raises the
/// criterion by more than `tolerance`. Sweeps stop when a full pass accepts
/// nothing. If a start is stuck on a singular design it is redrawn. Starts
/// run in parallel; the best start wins, ties going to the lowest start
/// index. Throws ValidationError for an infeasible spec and NumericalError
/// when no start reaches a nonsingular design.
GenerationResult generate_design(const DesignSpec& spec);

/// Randomized execution order: whole plots shuffled, runs shuffled within
/// each plot, plots relabeled 0..r-1 in their new order.
Design randomize_run_order(const Design& design, std::uint64_t seed);

}  // namespace splitplot
