#include "splitplot/design_gen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <thread>

#include "splitplot/errors.hpp"
#include "splitplot/rng.hpp"

namespace splitplot {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
using Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

}  // namespace

std::size_t Design::n_whole_plots() const {
  std::size_t r = 0;
  for (const auto& run : runs) r = std::max(r, run.whole_plot + 1);
  return r;
}

WholePlotLayout Design::layout() const {
  std::vector<std::size_t> a;
  a.reserve(runs.size());
  for (const auto& run : runs) a.push_back(run.whole_plot);
  return WholePlotLayout(std::move(a));
}

void Design::validate() const {
  if (runs.empty()) throw ValidationError("design has no runs");
  const auto lay = layout();
  std::vector<std::optional<std::size_t>> first_run(lay.n_plots());
  for (std::size_t j = 0; j < runs.size(); ++j) {
    const auto& run = runs[j];
    if (run.settings.size() != factors.size()) {
      throw ValidationError("run " + std::to_string(j + 1) + " has the wrong number of settings");
    }
    for (std::size_t f = 0; f < factors.size(); ++f) {
      if (!factors[f].is_valid_setting(run.settings[f])) {
        throw ValidationError("run " + std::to_string(j + 1) + ": invalid setting for factor '" +
                              factors[f].name + "'");
      }
    }
    auto& first = first_run[run.whole_plot];
    if (!first) {
      first = j;
      continue;
    }
    for (std::size_t f = 0; f < factors.size(); ++f) {
      if (factors[f].hard_to_change && runs[*first].settings[f] != run.settings[f]) {
        throw ValidationError("hard-to-change factor '" + factors[f].name +
                              "' varies within whole plot " + std::to_string(run.whole_plot + 1));
      }
    }
  }
}

Eigen::MatrixXd expand_model_matrix(const Design& design, const ModelSpec& model) {
  if (design.factors.size() != model.factors.size()) {
    throw ValidationError("design and model have different factor sets");
  }
  for (std::size_t f = 0; f < model.factors.size(); ++f) {
    const auto& a = design.factors[f];
    const auto& b = model.factors[f];
    if (a.name != b.name || a.kind != b.kind || a.coded_columns() != b.coded_columns()) {
      throw ValidationError("design factor '" + a.name + "' does not match model factor '" +
                            b.name + "'");
    }
  }
  const auto n = design.runs.size();
  const auto p = model.n_columns();
  Eigen::MatrixXd x(idx(n), idx(p));
  for (std::size_t j = 0; j < n; ++j) {
    const auto row = model.row(design.runs[j].settings);
    for (std::size_t c = 0; c < p; ++c) x(idx(j), idx(c)) = row[c];
  }
  return x;
}

Eigen::MatrixXd information_matrix(const Eigen::MatrixXd& x, const WholePlotLayout& layout,
                                   double eta) {
  const CovarianceModel cov{layout, VarianceComponents{eta, 1.0}};
  Eigen::MatrixXd m = x.transpose() * solve_v(cov, x);
  return 0.5 * (m + m.transpose());
}

double log_det_spd(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return kNegInf;
  const Eigen::MatrixXd l = llt.matrixL();
  double total = 0.0;
  for (Index i = 0; i < m.rows(); ++i) {
    const double piv = l(i, i) * l(i, i);
    if (!(m(i, i) > 0.0) || !(piv > 1e-10 * m(i, i))) return kNegInf;
    total += std::log(piv);
  }
  return total;
}

double d_criterion(const Design& design, const ModelSpec& model, double eta) {
  const auto x = expand_model_matrix(design, model);
  return log_det_spd(information_matrix(x, design.layout(), eta));
}

std::vector<std::size_t> assign_whole_plot_sizes(std::size_t n, std::size_t r) {
  if (r == 0) throw ValidationError("need at least one whole plot");
  if (r > n) {
    throw ValidationError("more whole plots (" + std::to_string(r) + ") than runs (" +
                          std::to_string(n) + ")");
  }
  std::vector<std::size_t> sizes(r, n / r);
  for (std::size_t i = 0; i < n % r; ++i) ++sizes[i];
  return sizes;
}

void DesignSpec::validate() const {
  const auto p = model.n_columns();
  if (n_runs < p) {
    throw ValidationError("infeasible design: " + std::to_string(p) + " model coefficients but only " +
                          std::to_string(n_runs) + " runs");
  }
  if (n_whole_plots < 2) throw ValidationError("need at least 2 whole plots");
  if (n_whole_plots > n_runs) throw ValidationError("more whole plots than runs");
  if (!(assumed_ratio >= 0.0) || !std::isfinite(assumed_ratio)) {
    throw ValidationError("variance ratio must be finite and >= 0");
  }
  if (n_starts == 0) throw ValidationError("need at least one start");
  if (!(tolerance >= 0.0)) throw ValidationError("tolerance must be >= 0");
}

namespace {

/// One coordinate-exchange start. Keeps X and the per-plot contributions
///   M_i = X_i^T X_i - c_i (X_i^T 1)(X_i^T 1)^T,  c_i = eta / (1 + n_i eta)
/// so a candidate move only re-evaluates its own whole plot.
class ExchangeState {
 public:
  ExchangeState(const DesignSpec& spec, const std::vector<std::size_t>& sizes)
      : spec_(spec), model_(spec.model), layout_(WholePlotLayout::from_sizes(sizes)) {
    const auto& factors = model_.factors;
    for (std::size_t f = 0; f < factors.size(); ++f) {
      (factors[f].hard_to_change ? hard_ : easy_).push_back(f);
      candidates_.push_back(factors[f].candidates());
    }
    plot_rows_.resize(layout_.n_plots());
    for (std::size_t j = 0; j < layout_.n_runs(); ++j) plot_rows_[layout_.assignment()[j]].push_back(j);
    design_.factors = factors;
    design_.runs.resize(layout_.n_runs());
    for (std::size_t j = 0; j < layout_.n_runs(); ++j) {
      design_.runs[j].whole_plot = layout_.assignment()[j];
      design_.runs[j].settings.assign(factors.size(), 0.0);
    }
    const auto p = idx(model_.n_columns());
    x_.resize(idx(layout_.n_runs()), p);
    contrib_.assign(layout_.n_plots(), Eigen::MatrixXd::Zero(p, p));
  }

  void randomize(Engine& rng) {
    for (std::size_t i = 0; i < plot_rows_.size(); ++i) {
      for (auto f : hard_) {
        const double v = draw(f, rng);
        for (auto j : plot_rows_[i]) design_.runs[j].settings[f] = v;
      }
    }
    for (auto& run : design_.runs) {
      for (auto f : easy_) run.settings[f] = draw(f, rng);
    }
    refresh();
  }

  /// One pass over all coordinates. Returns true if any move was accepted.
  bool sweep(std::vector<double>& history) {
    bool improved = false;
    for (std::size_t j = 0; j < design_.runs.size(); ++j) {
      for (auto f : easy_) improved |= try_coordinate({j}, f, history);
    }
    for (const auto& rows : plot_rows_) {
      for (auto f : hard_) improved |= try_coordinate(rows, f, history);
    }
    refresh();
    return improved;
  }

  double criterion() const { return criterion_; }
  const Design& design() const { return design_; }

 private:
  double draw(std::size_t f, Engine& rng) const {
    const auto& c = candidates_[f];
    std::uniform_int_distribution<std::size_t> pick(0, c.size() - 1);
    return c[pick(rng)];
  }

  void set_row(std::size_t j) {
    const auto row = model_.row(design_.runs[j].settings);
    for (std::size_t c = 0; c < row.size(); ++c) x_(idx(j), idx(c)) = row[c];
  }

  Eigen::MatrixXd plot_contribution(std::size_t plot) const {
    const auto& rows = plot_rows_[plot];
    const auto p = x_.cols();
    Eigen::MatrixXd xi(idx(rows.size()), p);
    for (std::size_t k = 0; k < rows.size(); ++k) xi.row(idx(k)) = x_.row(idx(rows[k]));
    const double ni = static_cast<double>(rows.size());
    const double c = spec_.assumed_ratio / (1.0 + ni * spec_.assumed_ratio);
    const Eigen::VectorXd s = xi.colwise().sum().transpose();
    Eigen::MatrixXd m = xi.transpose() * xi;
    m.noalias() -= c * s * s.transpose();
    return m;
  }

  void refresh() {
    for (std::size_t j = 0; j < design_.runs.size(); ++j) set_row(j);
    total_.setZero(x_.cols(), x_.cols());
    for (std::size_t i = 0; i < plot_rows_.size(); ++i) {
      contrib_[i] = plot_contribution(i);
      total_ += contrib_[i];
    }
    criterion_ = log_det_spd(total_);
  }

  /// Tries every candidate for factor f on the given runs (all in one plot).
  bool try_coordinate(const std::vector<std::size_t>& rows, std::size_t f,
                      std::vector<double>& history) {
    const std::size_t plot = design_.runs[rows.front()].whole_plot;
    const double incumbent = design_.runs[rows.front()].settings[f];
    double best_value = incumbent;
    double best_crit = criterion_;
    Eigen::MatrixXd best_contrib;

    for (double cand : candidates_[f]) {
      if (cand == incumbent) continue;
      for (auto j : rows) {
        design_.runs[j].settings[f] = cand;
        set_row(j);
      }
      Eigen::MatrixXd ci = plot_contribution(plot);
      const double crit = log_det_spd(total_ - contrib_[plot] + ci);
      const bool better = std::isfinite(crit) &&
                          (!std::isfinite(best_crit) || crit > best_crit + spec_.tolerance);
      if (better) {
        best_crit = crit;
        best_value = cand;
        best_contrib = std::move(ci);
      }
    }
    for (auto j : rows) {
      design_.runs[j].settings[f] = best_value;
      set_row(j);
    }
    if (best_value == incumbent) return false;

    if (std::isfinite(criterion_) && best_crit < criterion_) {
      throw NumericalError("coordinate exchange accepted a decreasing move");
    }
    total_ += best_contrib - contrib_[plot];
    contrib_[plot] = std::move(best_contrib);
    criterion_ = best_crit;
    history.push_back(best_crit);
    return true;
  }

  const DesignSpec& spec_;
  const ModelSpec& model_;
  WholePlotLayout layout_;
  std::vector<std::size_t> hard_, easy_;
  std::vector<std::vector<double>> candidates_;
  std::vector<std::vector<std::size_t>> plot_rows_;
  Design design_;
  Eigen::MatrixXd x_;
  std::vector<Eigen::MatrixXd> contrib_;
  Eigen::MatrixXd total_;
  double criterion_ = kNegInf;
};

struct StartResult {
  Design design;
  double criterion = kNegInf;
  std::vector<double> history;
};

constexpr int kMaxRedraws = 100;

StartResult run_start(const DesignSpec& spec, const std::vector<std::size_t>& sizes,
                      std::size_t start) {
  Engine rng(derive_seed(spec.seed, start));
  ExchangeState state(spec, sizes);
  StartResult out;
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    state.randomize(rng);
    out.history.clear();
    if (std::isfinite(state.criterion())) out.history.push_back(state.criterion());
    while (state.sweep(out.history)) {
    }
    if (std::isfinite(state.criterion())) break;
  }
  out.design = state.design();
  out.criterion = state.criterion();
  return out;
}

}  // namespace

GenerationResult generate_design(const DesignSpec& spec) {
  spec.validate();
  const auto sizes = assign_whole_plot_sizes(spec.n_runs, spec.n_whole_plots);

  GenerationResult result;
  const auto cdf = containment_df(spec.model, spec.n_runs, spec.n_whole_plots);
  if (cdf.whole_plot < static_cast<long>(kDefaultMinWholePlotErrorDf)) {
    result.warnings.push_back("whole-plot error df " + std::to_string(cdf.whole_plot) +
                              " is below the recommended " +
                              std::to_string(kDefaultMinWholePlotErrorDf));
  }
  if (cdf.subplot < static_cast<long>(kDefaultMinSubPlotErrorDf)) {
    result.warnings.push_back("subplot error df " + std::to_string(cdf.subplot) +
                              " is below the recommended " +
                              std::to_string(kDefaultMinSubPlotErrorDf));
  }

  std::vector<StartResult> starts(spec.n_starts);
  std::size_t n_threads = spec.threads ? spec.threads : std::thread::hardware_concurrency();
  n_threads = std::clamp<std::size_t>(n_threads, 1, spec.n_starts);
  if (n_threads == 1) {
    for (std::size_t s = 0; s < spec.n_starts; ++s) starts[s] = run_start(spec, sizes, s);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < n_threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t s = next++; s < spec.n_starts; s = next++) {
          starts[s] = run_start(spec, sizes, s);
        }
      });
    }
  }

  std::optional<std::size_t> best;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    if (!std::isfinite(starts[s].criterion)) continue;
    if (!best || starts[s].criterion > starts[*best].criterion) best = s;
  }
  if (!best) {
    throw NumericalError("no start reached a nonsingular design; the model is not estimable with " +
                         std::to_string(spec.n_runs) + " runs in " +
                         std::to_string(spec.n_whole_plots) + " whole plots");
  }
  result.design = std::move(starts[*best].design);
  result.history = std::move(starts[*best].history);
  result.best_start = *best;
  result.criterion = d_criterion(result.design, spec.model, spec.assumed_ratio);
  return result;
}

Design randomize_run_order(const Design& design, std::uint64_t seed) {
  Engine rng(seed);
  const auto r = design.n_whole_plots();
  std::vector<std::vector<std::size_t>> rows(r);
  for (std::size_t j = 0; j < design.runs.size(); ++j) rows[design.runs[j].whole_plot].push_back(j);
  std::vector<std::size_t> order(r);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  Design out;
  out.factors = design.factors;
  for (std::size_t pos = 0; pos < r; ++pos) {
    auto plot_rows = rows[order[pos]];
    std::shuffle(plot_rows.begin(), plot_rows.end(), rng);
    for (auto j : plot_rows) {
      Run run = design.runs[j];
      run.whole_plot = pos;
      out.runs.push_back(std::move(run));
    }
  }
  return out;
}

}  // namespace splitplot
