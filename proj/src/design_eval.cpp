#include "splitplot/design_eval.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/non_central_f.hpp>
#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "splitplot/errors.hpp"

namespace splitplot {

namespace {

using Eigen::Index;

Eigen::MatrixXd inverse_information(const Design& design, const ModelSpec& model, double eta) {
  const auto x = expand_model_matrix(design, model);
  const auto m = information_matrix(x, design.layout(), eta);
  if (!std::isfinite(log_det_spd(m))) throw NumericalError("singular information matrix");
  Eigen::MatrixXd inv = m.llt().solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

}  // namespace

double t_test_power(double delta, double df, double alpha) {
  namespace bm = boost::math;
  const double crit = bm::quantile(bm::students_t(df), 1.0 - alpha / 2.0);
  if (delta == 0.0) return alpha;
  const bm::non_central_t dist(df, delta);
  return bm::cdf(bm::complement(dist, crit)) + bm::cdf(dist, -crit);
}

PowerReport power_report(const Design& design, const ModelSpec& model, double eta, double snr,
                         double alpha) {
  namespace bm = boost::math;
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must be in (0, 1)");
  if (!(snr >= 0.0)) throw ValidationError("snr must be >= 0");
  const auto inv = inverse_information(design, model, eta);
  const auto cdf = containment_df(model, design.n_runs(), design.n_whole_plots());
  const auto offsets = model.term_offsets();

  PowerReport rep;
  rep.snr = snr;
  rep.alpha = alpha;
  rep.eta = eta;
  for (std::size_t t = 0; t < model.terms.size(); ++t) {
    const auto& term = model.terms[t];
    TermPower tp;
    tp.term = model.term_label(term);
    tp.level = term.level;
    tp.num_df = model.term_df(term);
    tp.den_df = cdf.for_level(term.level);
    if (tp.den_df <= 0) {
      throw ValidationError("no " + std::string(to_string(term.level)) +
                            " error df left for term '" + tp.term + "'");
    }
    const auto off = static_cast<Index>(offsets[t]);
    const auto k = static_cast<Index>(tp.num_df);
    const Eigen::MatrixXd block = inv.block(off, off, k, k);
    tp.variance_factor = block.diagonal().mean();
    const double df = static_cast<double>(tp.den_df);
    if (tp.num_df == 1) {
      tp.noncentrality = snr / std::sqrt(block(0, 0));
      tp.power = t_test_power(tp.noncentrality, df, alpha);
    } else {
      const Eigen::VectorXd b = Eigen::VectorXd::Constant(k, snr);
      const double lambda = b.dot(block.llt().solve(b));
      tp.noncentrality = std::sqrt(lambda);
      const double crit = bm::quantile(bm::fisher_f(static_cast<double>(k), df), 1.0 - alpha);
      tp.power = lambda == 0.0
                     ? alpha
                     : bm::cdf(bm::complement(bm::non_central_f(static_cast<double>(k), df, lambda), crit));
    }
    rep.terms.push_back(tp);
  }
  return rep;
}

CorrelationReport term_correlation(const Design& design, const ModelSpec& model,
                                   double alias_threshold) {
  const auto x = expand_model_matrix(design, model);
  const auto labels = model.column_labels();
  const Index first = model.include_intercept ? 1 : 0;
  const Index k = x.cols() - first;

  CorrelationReport rep;
  rep.labels.assign(labels.begin() + first, labels.end());
  Eigen::MatrixXd centered = x.rightCols(k);
  centered.rowwise() -= centered.colwise().mean();
  const Eigen::VectorXd norms = centered.colwise().norm();

  const double nan = std::numeric_limits<double>::quiet_NaN();
  rep.matrix = Eigen::MatrixXd::Constant(k, k, nan);
  for (Index i = 0; i < k; ++i) {
    if (!(norms(i) > 1e-12)) rep.constant_columns.push_back(rep.labels[static_cast<std::size_t>(i)]);
  }
  for (Index i = 0; i < k; ++i) {
    if (!(norms(i) > 1e-12)) continue;
    for (Index j = 0; j < k; ++j) {
      if (!(norms(j) > 1e-12)) continue;
      double r = centered.col(i).dot(centered.col(j)) / (norms(i) * norms(j));
      rep.matrix(i, j) = i == j ? 1.0 : std::clamp(r, -1.0, 1.0);
      if (i != j) rep.max_abs_offdiag = std::max(rep.max_abs_offdiag, std::abs(rep.matrix(i, j)));
    }
  }
  rep.alias_warning = rep.max_abs_offdiag > alias_threshold || !rep.constant_columns.empty();
  return rep;
}

std::vector<VifEntry> vif(const Design& design, const ModelSpec& model) {
  const auto corr = term_correlation(design, model, 1.0);
  if (!corr.constant_columns.empty()) {
    throw NumericalError("constant model column '" + corr.constant_columns.front() + "'");
  }
  const auto& r = corr.matrix;
  if (!std::isfinite(log_det_spd(r))) throw NumericalError("model columns are collinear");
  // diag(R^{-1})_j = 1 / (1 - R^2_j) for the regression of column j on the rest
  const Eigen::MatrixXd inv = r.llt().solve(Eigen::MatrixXd::Identity(r.rows(), r.cols()));
  std::vector<VifEntry> out;
  for (Index j = 0; j < r.rows(); ++j) {
    out.push_back({corr.labels[static_cast<std::size_t>(j)], std::max(1.0, inv(j, j))});
  }
  return out;
}

PredictionVariance prediction_variance(const Design& design, const ModelSpec& model, double eta,
                                       const std::vector<double>& point) {
  PredictionVariance out;
  for (std::size_t f = 0; f < model.factors.size() && f < point.size(); ++f) {
    if (!model.factors[f].is_valid_setting(point[f])) out.outside_range = true;
  }
  const auto inv = inverse_information(design, model, eta);
  const auto row = model.row(point);
  const Eigen::Map<const Eigen::VectorXd> fx(row.data(), static_cast<Index>(row.size()));
  out.value = fx.dot(inv * fx);
  return out;
}

}  // namespace splitplot
