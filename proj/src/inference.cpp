#include "splitplot/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/fisher_f.hpp>

#include "splitplot/errors.hpp"

namespace splitplot {

namespace {

using Eigen::Index;

constexpr double kEtaMin = 1e-8;
constexpr double kEtaMax = 1e8;
constexpr int kScanPoints = 33;
constexpr double kLogEtaTol = 1e-8;

struct GlsCore {
  Eigen::VectorXd beta;
  Eigen::MatrixXd info_inv;  // (X^T V_eta^{-1} X)^{-1}
  double log_det_info = 0.0;
  double log_det_v = 0.0;
  double rss = 0.0;  // y^T P y = r^T V_eta^{-1} r
  double scale = 0.0;  // y^T V_eta^{-1} y, for exact-fit detection
};

GlsCore gls_core(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const WholePlotLayout& layout,
                 double eta) {
  const CovarianceModel cov{layout, VarianceComponents{eta, 1.0}};
  const Eigen::MatrixXd vx = solve_v(cov, x);
  Eigen::MatrixXd info = x.transpose() * vx;
  info = 0.5 * (info + info.transpose());
  GlsCore out;
  out.log_det_info = log_det_spd(info);
  if (!std::isfinite(out.log_det_info)) throw NumericalError("model matrix is rank deficient");
  const Eigen::LLT<Eigen::MatrixXd> llt(info);
  out.info_inv = llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
  out.info_inv = 0.5 * (out.info_inv + out.info_inv.transpose());
  out.beta = llt.solve(vx.transpose() * y);
  const Eigen::VectorXd r = y - x * out.beta;
  out.rss = std::max(0.0, r.dot(solve_v(cov, r).col(0)));
  out.scale = y.dot(solve_v(cov, y).col(0));
  out.log_det_v = log_det_v(cov);
  return out;
}

bool exact_fit(const GlsCore& core) { return core.rss <= 1e-24 * std::max(core.scale, 1e-300); }

void check_inputs(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const WholePlotLayout& layout) {
  if (x.rows() != y.size() || static_cast<std::size_t>(y.size()) != layout.n_runs()) {
    throw ValidationError("model matrix, response and layout sizes disagree");
  }
  if (x.rows() <= x.cols()) throw ValidationError("need more runs than model columns");
}

double profile_objective(const GlsCore& core, std::size_t n, std::size_t p) {
  return core.log_det_v + core.log_det_info +
         static_cast<double>(n - p) * std::log(core.rss);
}

}  // namespace

const Eigen::VectorXd& ResponseTable::response(const std::string& name) const {
  for (const auto& [n, v] : responses) {
    if (n == name) return v;
  }
  throw ValidationError("unknown response '" + name + "'");
}

std::vector<std::string> ResponseTable::response_names() const {
  std::vector<std::string> out;
  for (const auto& r : responses) out.push_back(r.first);
  return out;
}

void ResponseTable::validate() const {
  design.validate();
  const auto n = design.n_runs();
  if (whole_plot.size() != n) throw ValidationError("whole-plot column has the wrong length");
  for (std::size_t j = 0; j < n; ++j) {
    if (whole_plot[j] != design.runs[j].whole_plot) {
      throw ValidationError("whole-plot column does not match the design at run " +
                            std::to_string(j + 1));
    }
  }
  for (const auto& [name, v] : responses) {
    if (static_cast<std::size_t>(v.size()) != n) {
      throw ValidationError("response '" + name + "' has the wrong length");
    }
    if (!v.allFinite()) throw ValidationError("response '" + name + "' has non-finite values");
  }
}

double reml_objective(double eta, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                      const WholePlotLayout& layout) {
  check_inputs(x, y, layout);
  if (!(eta >= 0.0)) throw ValidationError("variance ratio must be >= 0");
  const auto core = gls_core(x, y, layout, eta);
  if (exact_fit(core)) throw NumericalError("response is fitted exactly; REML is undefined");
  return profile_objective(core, static_cast<std::size_t>(x.rows()), static_cast<std::size_t>(x.cols()));
}

RemlSearch reml_minimize(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const WholePlotLayout& layout) {
  const auto g = [&](double log_eta) { return reml_objective(std::exp(log_eta), x, y, layout); };

  const double lo = std::log(kEtaMin);
  const double hi = std::log(kEtaMax);
  const double step = (hi - lo) / (kScanPoints - 1);
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kScanPoints; ++k) {
    const double v = g(lo + step * k);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }

  double a = lo + step * std::max(best - 1, 0);
  double b = lo + step * std::min(best + 1, kScanPoints - 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = g(c);
  double fd = g(d);
  while (b - a > kLogEtaTol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = g(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = g(d);
    }
  }
  RemlSearch out;
  out.eta = std::exp(0.5 * (a + b));
  out.objective = g(0.5 * (a + b));
  if (best_val < out.objective) {
    out.eta = std::exp(lo + step * best);
    out.objective = best_val;
  }
  const double at_zero = reml_objective(0.0, x, y, layout);
  if (at_zero <= out.objective) {
    out.eta = 0.0;
    out.objective = at_zero;
    out.boundary = true;
  }
  return out;
}

namespace {

GlsFit assemble(const Design& design, const ModelSpec& model, const Eigen::VectorXd& y,
                const std::string& name, double eta, bool boundary) {
  const auto x = expand_model_matrix(design, model);
  const auto layout = design.layout();
  const auto core = gls_core(x, y, layout, eta);
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());

  GlsFit fit;
  fit.response = name;
  fit.model = model;
  fit.layout = layout;
  fit.column_labels = model.column_labels();
  fit.eta = eta;
  fit.boundary = boundary;
  fit.residual_ss = exact_fit(core) ? 0.0 : core.rss;
  const double s2e = n > p ? fit.residual_ss / static_cast<double>(n - p)
                           : std::numeric_limits<double>::quiet_NaN();
  fit.components = VarianceComponents{eta * s2e, s2e};
  fit.coefficients = core.beta;
  fit.coefficient_cov = s2e * core.info_inv;
  fit.observed = y;
  fit.fitted = x * core.beta;
  fit.residuals = y - fit.fitted;
  fit.den_df = containment_df(model, n, layout.n_plots());
  return fit;
}

}  // namespace

GlsFit gls_fit(const Design& design, const ModelSpec& model, const Eigen::VectorXd& y, double eta,
               const std::string& name) {
  if (static_cast<std::size_t>(y.size()) != design.n_runs()) {
    throw ValidationError("response length does not match the design");
  }
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ValidationError("variance ratio must be >= 0");
  return assemble(design, model, y, name, eta, eta == 0.0);
}

GlsFit reml_fit(const Design& design, const ModelSpec& model, const Eigen::VectorXd& y,
                const std::string& name) {
  design.validate();
  if (static_cast<std::size_t>(y.size()) != design.n_runs()) {
    throw ValidationError("response length does not match the design");
  }
  if (!y.allFinite()) throw ValidationError("response has non-finite values");
  const auto layout = design.layout();
  if (layout.n_plots() < 2) throw ValidationError("need at least 2 whole plots");
  const auto cdf = containment_df(model, design.n_runs(), layout.n_plots());
  if (cdf.whole_plot <= 0) {
    throw ValidationError("fewer whole plots than whole-plot model df: no whole-plot error df");
  }
  if (cdf.subplot <= 0) throw ValidationError("no subplot error df");

  const auto x = expand_model_matrix(design, model);
  if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(x).rank() < x.cols()) {
    throw NumericalError("model matrix is rank deficient");
  }
  if (exact_fit(gls_core(x, y, layout, 0.0))) return assemble(design, model, y, name, 0.0, true);
  // single-run plots: V is a multiple of I and the ratio is not identifiable
  if (layout.n_plots() == layout.n_runs()) return assemble(design, model, y, name, 0.0, true);
  const auto search = reml_minimize(x, y, layout);
  return assemble(design, model, y, name, search.eta, search.boundary);
}

GlsFit reml_fit(const ResponseTable& table, const std::string& response, const ModelSpec& model) {
  table.validate();
  return reml_fit(table.design, model, table.response(response), response);
}

std::vector<TermTest> fixed_effect_tests(const GlsFit& fit) {
  namespace bm = boost::math;
  const auto offsets = fit.model.term_offsets();
  std::vector<TermTest> out;
  for (std::size_t t = 0; t < fit.model.terms.size(); ++t) {
    const auto& term = fit.model.terms[t];
    TermTest tt;
    tt.term = fit.model.term_label(term);
    tt.level = term.level;
    tt.num_df = fit.model.term_df(term);
    tt.den_df = fit.den_df.for_level(term.level);
    if (tt.den_df <= 0) {
      throw ValidationError("no error df for term '" + tt.term + "'");
    }
    const auto off = static_cast<Index>(offsets[t]);
    const auto k = static_cast<Index>(tt.num_df);
    const Eigen::VectorXd b = fit.coefficients.segment(off, k);
    const Eigen::MatrixXd c = fit.coefficient_cov.block(off, off, k, k);
    const double wald = b.dot(c.ldlt().solve(b));
    tt.f = wald / static_cast<double>(k);
    if (std::isfinite(tt.f)) {
      tt.p = bm::cdf(bm::complement(bm::fisher_f(static_cast<double>(k), static_cast<double>(tt.den_df)), tt.f));
    } else {
      tt.f = std::numeric_limits<double>::infinity();
      tt.p = 0.0;
    }
    out.push_back(tt);
  }
  return out;
}

FitSummary fit_summary(const GlsFit& fit) {
  namespace bm = boost::math;
  FitSummary s;
  const Eigen::VectorXd yc = fit.observed.array() - fit.observed.mean();
  const Eigen::VectorXd fc = fit.fitted.array() - fit.fitted.mean();
  const double denom = yc.norm() * fc.norm();
  if (denom > 0.0) {
    const double r = std::clamp(yc.dot(fc) / denom, -1.0, 1.0);
    s.r_squared = r * r;
  }
  s.rmse = std::sqrt(fit.components.sigma2_epsilon);

  const Index first = fit.model.include_intercept ? 1 : 0;
  const Index k = fit.coefficients.size() - first;
  s.overall_num_df = static_cast<std::size_t>(k);
  s.overall_den_df = fit.den_df.subplot;
  if (k == 0 || s.overall_den_df <= 0) {
    s.overall_f = std::numeric_limits<double>::quiet_NaN();
    s.overall_p = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  const Eigen::VectorXd b = fit.coefficients.tail(k);
  const Eigen::MatrixXd c = fit.coefficient_cov.bottomRightCorner(k, k);
  s.overall_f = b.dot(c.ldlt().solve(b)) / static_cast<double>(k);
  if (std::isfinite(s.overall_f)) {
    s.overall_p = bm::cdf(bm::complement(
        bm::fisher_f(static_cast<double>(k), static_cast<double>(s.overall_den_df)), s.overall_f));
  } else {
    s.overall_f = std::numeric_limits<double>::infinity();
    s.overall_p = 0.0;
  }
  return s;
}

std::vector<ResidualRow> residual_report(const GlsFit& fit) {
  std::vector<ResidualRow> out;
  for (Index j = 0; j < fit.observed.size(); ++j) {
    const auto ju = static_cast<std::size_t>(j);
    out.push_back({ju + 1, fit.observed(j), fit.fitted(j), fit.residuals(j),
                   fit.layout.assignment()[ju] + 1});
  }
  return out;
}

}  // namespace splitplot
