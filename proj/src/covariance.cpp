#include "splitplot/covariance.hpp"

#include <cmath>
#include <string>

#include "splitplot/errors.hpp"

namespace splitplot {

WholePlotLayout::WholePlotLayout(std::vector<std::size_t> assignment)
    : assignment_(std::move(assignment)) {
  if (assignment_.empty()) throw ValidationError("layout has no runs");
  std::size_t r = 0;
  for (auto a : assignment_) r = std::max(r, a + 1);
  sizes_.assign(r, 0);
  for (auto a : assignment_) ++sizes_[a];
  for (std::size_t i = 0; i < r; ++i) {
    if (sizes_[i] == 0) {
      throw ValidationError("whole plot " + std::to_string(i + 1) + " has no runs");
    }
  }
}

WholePlotLayout WholePlotLayout::from_sizes(const std::vector<std::size_t>& sizes) {
  std::vector<std::size_t> a;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) throw ValidationError("whole plot " + std::to_string(i + 1) + " has no runs");
    a.insert(a.end(), sizes[i], i);
  }
  return WholePlotLayout(std::move(a));
}

Eigen::MatrixXd WholePlotLayout::indicator() const {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_runs()),
                                            static_cast<Eigen::Index>(n_plots()));
  for (std::size_t j = 0; j < n_runs(); ++j) {
    z(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(assignment_[j])) = 1.0;
  }
  return z;
}

void VarianceComponents::validate() const {
  if (!(sigma2_epsilon > 0.0) || !std::isfinite(sigma2_epsilon)) {
    throw ValidationError("residual variance must be positive");
  }
  if (!(sigma2_gamma >= 0.0) || !std::isfinite(sigma2_gamma)) {
    throw ValidationError("whole-plot variance must be nonnegative");
  }
}

Eigen::MatrixXd build_v(const CovarianceModel& model) {
  model.components.validate();
  const auto& a = model.layout.assignment();
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (a[static_cast<std::size_t>(i)] == a[static_cast<std::size_t>(j)]) {
        v(i, j) = model.components.sigma2_gamma;
      }
    }
    v(i, i) += model.components.sigma2_epsilon;
  }
  return v;
}

Eigen::MatrixXd solve_v(const CovarianceModel& model, const Eigen::MatrixXd& rhs) {
  model.components.validate();
  const auto& layout = model.layout;
  if (static_cast<std::size_t>(rhs.rows()) != layout.n_runs()) {
    throw ValidationError("solve_v: rhs has " + std::to_string(rhs.rows()) + " rows, expected " +
                          std::to_string(layout.n_runs()));
  }
  const double s2e = model.components.sigma2_epsilon;
  const double s2g = model.components.sigma2_gamma;
  const auto r = static_cast<Eigen::Index>(layout.n_plots());

  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(r, rhs.cols());
  const auto& a = layout.assignment();
  for (Eigen::Index j = 0; j < rhs.rows(); ++j) {
    sums.row(static_cast<Eigen::Index>(a[static_cast<std::size_t>(j)])) += rhs.row(j);
  }
  for (Eigen::Index i = 0; i < r; ++i) {
    const double ni = static_cast<double>(layout.sizes()[static_cast<std::size_t>(i)]);
    sums.row(i) *= s2g / (s2e + ni * s2g);
  }
  Eigen::MatrixXd out(rhs.rows(), rhs.cols());
  for (Eigen::Index j = 0; j < rhs.rows(); ++j) {
    out.row(j) = (rhs.row(j) - sums.row(static_cast<Eigen::Index>(a[static_cast<std::size_t>(j)]))) / s2e;
  }
  return out;
}

double log_det_v(const CovarianceModel& model) {
  model.components.validate();
  const double s2e = model.components.sigma2_epsilon;
  const double s2g = model.components.sigma2_gamma;
  double total = 0.0;
  for (auto ni : model.layout.sizes()) {
    const double n = static_cast<double>(ni);
    total += (n - 1.0) * std::log(s2e) + std::log(s2e + n * s2g);
  }
  return total;
}

}  // namespace splitplot
