#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace splitplot {

/// Which whole plot each run belongs to. Indices are 0-based internally and
/// 1-based in files.
class WholePlotLayout {
 public:
  WholePlotLayout() = default;
  /// Throws ValidationError unless the indices cover 0..r-1 with every plot
  /// non-empty.
  explicit WholePlotLayout(std::vector<std::size_t> assignment);

  /// Contiguous layout: plot 0 takes the first sizes[0] runs, and so on.
  static WholePlotLayout from_sizes(const std::vector<std::size_t>& sizes);

  std::size_t n_runs() const { return assignment_.size(); }
  std::size_t n_plots() const { return sizes_.size(); }
  const std::vector<std::size_t>& assignment() const { return assignment_; }
  const std::vector<std::size_t>& sizes() const { return sizes_; }

  /// Whole-plot indicator matrix Z (n x r).
  Eigen::MatrixXd indicator() const;

  bool operator==(const WholePlotLayout&) const = default;

 private:
  std::vector<std::size_t> assignment_;
  std::vector<std::size_t> sizes_;
};

struct VarianceComponents {
  double sigma2_gamma = 0.0;
  double sigma2_epsilon = 1.0;

  /// eta = sigma2_gamma / sigma2_epsilon
  double ratio() const { return sigma2_gamma / sigma2_epsilon; }

  /// Throws ValidationError on sigma2_gamma < 0 or sigma2_epsilon <= 0.
  void validate() const;
};

struct CovarianceModel {
  WholePlotLayout layout;
  VarianceComponents components;
};

/// Dense V = sigma2_epsilon * I + sigma2_gamma * Z Z^T.
Eigen::MatrixXd build_v(const CovarianceModel& model);

/// V^{-1} * rhs using the compound-symmetric closed form per whole plot,
///   Gamma_i^{-1} = (I - c_i J) / sigma2_epsilon,
///   c_i = sigma2_gamma / (sigma2_epsilon + n_i sigma2_gamma).
/// O(n) per right-hand-side column; no dense inverse is formed.
Eigen::MatrixXd solve_v(const CovarianceModel& model, const Eigen::MatrixXd& rhs);

/// sum_i (n_i - 1) log sigma2_epsilon + log(sigma2_epsilon + n_i sigma2_gamma)
double log_det_v(const CovarianceModel& model);

}  // namespace splitplot
