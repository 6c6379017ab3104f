#include "splitplot/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "splitplot/boomerang_sim.hpp"
#include "splitplot/design_eval.hpp"
#include "splitplot/design_gen.hpp"
#include "splitplot/errors.hpp"
#include "splitplot/inference.hpp"
#include "splitplot/io.hpp"
#include "splitplot/model_spec.hpp"
#include "splitplot/profiler.hpp"
#include "splitplot/rng.hpp"

namespace splitplot {

namespace {

// Stream index reserved for run-order randomization, disjoint from start indices.
constexpr std::uint64_t kRandomizeStream = 0xFFFFFFFFULL;

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string pvalue(double p) {
  if (std::isnan(p)) return "NA";
  if (p < 1e-4) return "<.0001";
  return fixed(p, 4);
}

// ---------------------------------------------------------------- plan

struct PlanArgs {
  std::string model;
  std::size_t min_wp = kDefaultMinWholePlotErrorDf;
  std::size_t min_sp = kDefaultMinSubPlotErrorDf;
  std::size_t whole_plots = 0;
  std::size_t error_df = 0;
  std::string csv;
};

int cmd_plan(const PlanArgs& a, std::ostream& out) {
  const auto model = parse_model_file(read_file(a.model));
  const auto wp = count_whole_plot_df(model, a.min_wp);
  const auto r = a.whole_plots ? a.whole_plots : wp.min_units;
  std::optional<std::size_t> proposed;
  if (a.error_df) proposed = a.error_df;
  const auto sp = count_subplot_df(model, r, a.min_sp, proposed, a.min_wp);

  auto row = [&](const std::string& label, const std::string& df) {
    out << "  " << std::left << std::setw(32) << label << std::right << std::setw(6) << df << "\n";
  };
  out << "Whole-plot experiment\n";
  for (const auto& [term, df] : wp.per_term_df) row(term, std::to_string(df));
  row("overall mean", "1");
  row("sum (model df)", std::to_string(wp.model_df));
  row("error estimate", ">=" + std::to_string(wp.error_df));
  row("sum (whole plots)", ">=" + std::to_string(wp.min_units));
  out << "\nSubplot experiment (" << r << " whole plots)\n";
  row("takeover from whole plot", std::to_string(sp.takeover_df));
  for (const auto& [term, df] : sp.per_term_df) row(term, std::to_string(df));
  row("sum (model df)", std::to_string(sp.model_df));
  row("error estimate", std::to_string(sp.error_df));
  row("sum (total runs)", std::to_string(sp.min_units));
  if (sp.below_minimum) {
    out << "warning: subplot error df " << sp.error_df << " is below the minimum " << a.min_sp << "\n";
  }

  if (!a.csv.empty()) {
    CsvTable t;
    t.header = {"level", "effect", "df"};
    for (const auto& [term, df] : wp.per_term_df) t.rows.push_back({"whole_plot", term, std::to_string(df)});
    t.rows.push_back({"whole_plot", "overall_mean", "1"});
    t.rows.push_back({"whole_plot", "model", std::to_string(wp.model_df)});
    t.rows.push_back({"whole_plot", "error", std::to_string(wp.error_df)});
    t.rows.push_back({"whole_plot", "total", std::to_string(wp.min_units)});
    t.rows.push_back({"subplot", "takeover", std::to_string(sp.takeover_df)});
    for (const auto& [term, df] : sp.per_term_df) t.rows.push_back({"subplot", term, std::to_string(df)});
    t.rows.push_back({"subplot", "model", std::to_string(sp.model_df)});
    t.rows.push_back({"subplot", "error", std::to_string(sp.error_df)});
    t.rows.push_back({"subplot", "total", std::to_string(sp.min_units)});
    write_file(a.csv, format_csv(t));
  }
  return kExitOk;
}

// ---------------------------------------------------------------- design

struct DesignArgs {
  std::string model;
  std::size_t runs = 0;
  std::size_t whole_plots = 0;
  double ratio = 1.0;
  std::size_t starts = 20;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  bool no_randomize = false;
  std::string out;
};

int cmd_design(const DesignArgs& a, std::ostream& out, std::ostream& err) {
  DesignSpec spec;
  spec.model = parse_model_file(read_file(a.model));
  spec.n_runs = a.runs;
  spec.n_whole_plots = a.whole_plots;
  spec.assumed_ratio = a.ratio;
  spec.n_starts = a.starts;
  spec.seed = a.seed;
  spec.threads = a.threads;
  const auto result = generate_design(spec);
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";
  const auto design = a.no_randomize ? result.design
                                     : randomize_run_order(result.design, derive_seed(a.seed, kRandomizeStream));
  write_file(a.out, write_design_csv(design));
  out << "runs: " << design.n_runs() << ", whole plots: " << design.n_whole_plots() << "\n";
  out << "criterion (log det information, eta = " << format_double(a.ratio) << "): "
      << format_double(result.criterion) << "\n";
  out << "wrote " << a.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string design;
  std::string model;
  double ratio = 1.0;
  double snr = 1.0;
  double alpha = 0.05;
  double alias = kDefaultAliasThreshold;
  std::string csv_prefix;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const auto model = parse_model_file(read_file(a.model));
  const auto table = read_design_csv(read_file(a.design), model);
  const auto& design = table.design;

  const auto power = power_report(design, model, a.ratio, a.snr, a.alpha);
  out << "Power (snr " << format_double(a.snr) << ", alpha " << format_double(a.alpha) << ", eta "
      << format_double(a.ratio) << ")\n";
  out << "  " << std::left << std::setw(12) << "term" << std::setw(12) << "level" << std::right
      << std::setw(12) << "var factor" << std::setw(8) << "den df" << std::setw(9) << "power" << "\n";
  for (const auto& t : power.terms) {
    out << "  " << std::left << std::setw(12) << t.term << std::setw(12) << to_string(t.level) << std::right
        << std::setw(12) << fixed(t.variance_factor) << std::setw(8) << t.den_df << std::setw(9)
        << fixed(t.power) << "\n";
  }

  const auto corr = term_correlation(design, model, a.alias);
  out << "\nMax |correlation| between model columns: " << fixed(corr.max_abs_offdiag) << "\n";
  for (const auto& c : corr.constant_columns) err << "warning: model column '" << c << "' is constant\n";
  if (corr.alias_warning) {
    err << "warning: correlation above alias threshold " << format_double(a.alias) << "\n";
  }

  std::vector<VifEntry> vifs;
  try {
    vifs = vif(design, model);
    out << "\nVariance inflation factors\n";
    for (const auto& v : vifs) out << "  " << std::left << std::setw(12) << v.column << std::right << fixed(v.vif) << "\n";
  } catch (const NumericalError& e) {
    err << "warning: VIF unavailable: " << e.what() << "\n";
  }

  std::vector<double> center;
  center.assign(model.factors.size(), 0.0);
  double max_pv = 0.0;
  for (const auto& run : design.runs) {
    max_pv = std::max(max_pv, prediction_variance(design, model, a.ratio, run.settings).value);
  }
  out << "\nRelative prediction variance: at design points max " << fixed(max_pv);
  bool has_categorical = false;
  for (const auto& f : model.factors) has_categorical |= f.kind == FactorKind::Categorical;
  if (!has_categorical) {
    out << ", at center " << fixed(prediction_variance(design, model, a.ratio, center).value);
  }
  out << "\n";

  if (!a.csv_prefix.empty()) {
    CsvTable p;
    p.header = {"term", "level", "num_df", "variance_factor", "noncentrality", "den_df", "power"};
    for (const auto& t : power.terms) {
      p.rows.push_back({t.term, to_string(t.level), std::to_string(t.num_df), format_double(t.variance_factor),
                        format_double(t.noncentrality), std::to_string(t.den_df), format_double(t.power)});
    }
    write_file(a.csv_prefix + "_power.csv", format_csv(p));

    CsvTable c;
    c.header = {"column"};
    c.header.insert(c.header.end(), corr.labels.begin(), corr.labels.end());
    for (std::size_t i = 0; i < corr.labels.size(); ++i) {
      std::vector<std::string> r{corr.labels[i]};
      for (std::size_t j = 0; j < corr.labels.size(); ++j) {
        const double v = corr.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        r.push_back(std::isnan(v) ? "NA" : format_double(v));
      }
      c.rows.push_back(std::move(r));
    }
    write_file(a.csv_prefix + "_correlation.csv", format_csv(c));

    CsvTable v;
    v.header = {"column", "vif"};
    for (const auto& e : vifs) v.rows.push_back({e.column, format_double(e.vif)});
    write_file(a.csv_prefix + "_vif.csv", format_csv(v));
  }
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string design;
  std::string model;
  std::string truth;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const auto model = parse_model_file(read_file(a.model));
  const auto table = read_design_csv(read_file(a.design), model);
  const auto truth = a.truth.empty() ? default_truth() : parse_truth_config(read_file(a.truth));
  const auto seed = a.seed.value_or(truth.seed);
  const auto sim = simulate(table.design, truth, seed);
  write_file(a.out, write_design_csv(sim));
  out << "simulated " << sim.responses.size() << " response(s) for " << sim.design.n_runs()
      << " runs (seed " << seed << "), wrote " << a.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string data;
  std::string model;
  std::string response;
  std::string out_prefix;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const auto model = parse_model_file(read_file(a.model));
  const auto table = read_design_csv(read_file(a.data), model);
  const auto fit = reml_fit(table, a.response, model);
  const auto summary = fit_summary(fit);
  const auto tests = fixed_effect_tests(fit);

  out << "Response " << fit.response << "\n";
  out << "  R^2                   " << fixed(summary.r_squared) << "\n";
  out << "  RMSE                  " << fixed(summary.rmse) << "\n";
  out << "  whole-plot variance   " << fixed(fit.components.sigma2_gamma)
      << (fit.boundary ? "  (boundary: REML estimate pinned at 0)" : "") << "\n";
  out << "  residual variance     " << fixed(fit.components.sigma2_epsilon) << "\n";
  out << "  overall F(" << summary.overall_num_df << ", " << summary.overall_den_df << ") = "
      << fixed(summary.overall_f) << ", p = " << pvalue(summary.overall_p) << "\n\n";
  out << "Fixed effect tests\n";
  out << "  " << std::left << std::setw(12) << "term" << std::setw(12) << "level" << std::right << std::setw(6)
      << "df" << std::setw(8) << "den df" << std::setw(12) << "F" << std::setw(10) << "p" << "\n";
  for (const auto& t : tests) {
    out << "  " << std::left << std::setw(12) << t.term << std::setw(12) << to_string(t.level) << std::right
        << std::setw(6) << t.num_df << std::setw(8) << t.den_df << std::setw(12) << fixed(t.f) << std::setw(10)
        << pvalue(t.p) << "\n";
  }

  if (!a.out_prefix.empty()) {
    CsvTable coef;
    coef.header = {"column", "estimate", "std_error"};
    for (std::size_t c = 0; c < fit.column_labels.size(); ++c) {
      const auto i = static_cast<Eigen::Index>(c);
      coef.rows.push_back({fit.column_labels[c], format_double(fit.coefficients(i)),
                           format_double(std::sqrt(fit.coefficient_cov(i, i)))});
    }
    write_file(a.out_prefix + "_coefficients.csv", format_csv(coef));

    CsvTable cov;
    cov.header = {"column"};
    cov.header.insert(cov.header.end(), fit.column_labels.begin(), fit.column_labels.end());
    for (std::size_t r = 0; r < fit.column_labels.size(); ++r) {
      std::vector<std::string> row{fit.column_labels[r]};
      for (std::size_t c = 0; c < fit.column_labels.size(); ++c) {
        row.push_back(format_double(fit.coefficient_cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))));
      }
      cov.rows.push_back(std::move(row));
    }
    write_file(a.out_prefix + "_covariance.csv", format_csv(cov));

    CsvTable tt;
    tt.header = {"term", "level", "num_df", "den_df", "F", "p"};
    for (const auto& t : tests) {
      tt.rows.push_back({t.term, to_string(t.level), std::to_string(t.num_df), std::to_string(t.den_df),
                         format_double(t.f), format_double(t.p)});
    }
    write_file(a.out_prefix + "_tests.csv", format_csv(tt));

    CsvTable res;
    res.header = {"run_id", "whole_plot", "observed", "predicted", "residual"};
    for (const auto& r : residual_report(fit)) {
      res.rows.push_back({std::to_string(r.run), std::to_string(r.whole_plot), format_double(r.observed),
                          format_double(r.predicted), format_double(r.residual)});
    }
    write_file(a.out_prefix + "_residuals.csv", format_csv(res));

    CsvTable sum;
    sum.header = {"statistic", "value"};
    sum.rows = {{"r_squared", format_double(summary.r_squared)},
                {"rmse", format_double(summary.rmse)},
                {"sigma2_gamma", format_double(fit.components.sigma2_gamma)},
                {"sigma2_epsilon", format_double(fit.components.sigma2_epsilon)},
                {"eta", format_double(fit.eta)},
                {"boundary", fit.boundary ? "1" : "0"},
                {"overall_f", format_double(summary.overall_f)},
                {"overall_p", format_double(summary.overall_p)}};
    write_file(a.out_prefix + "_summary.csv", format_csv(sum));
    out << "\nwrote " << a.out_prefix << "_{coefficients,covariance,tests,residuals,summary}.csv\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- profile

struct ProfileArgs {
  std::string model;
  std::vector<std::string> fits;
  std::vector<std::string> goals;
  std::size_t grid = 21;
  std::string out;
};

FittedResponse load_fit(const std::string& name, const std::string& prefix, const ModelSpec& model) {
  const auto labels = model.column_labels();
  const auto p = static_cast<Eigen::Index>(labels.size());
  FittedResponse f;
  f.name = name;
  f.model = model;

  const auto coef = parse_csv(read_file(prefix + "_coefficients.csv"));
  const auto est_col = coef.column("estimate");
  if (coef.column("column") != 0 || est_col == std::string::npos || coef.rows.size() != labels.size()) {
    throw ValidationError(prefix + "_coefficients.csv does not match the model");
  }
  f.coefficients.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const auto& row = coef.rows[static_cast<std::size_t>(i)];
    if (row[0] != labels[static_cast<std::size_t>(i)]) {
      throw ValidationError(prefix + "_coefficients.csv: expected column '" + labels[static_cast<std::size_t>(i)] + "'");
    }
    f.coefficients(i) = parse_double(row[est_col], prefix + "_coefficients.csv");
  }

  const auto cov = parse_csv(read_file(prefix + "_covariance.csv"));
  if (cov.header.size() != labels.size() + 1 || cov.rows.size() != labels.size()) {
    throw ValidationError(prefix + "_covariance.csv does not match the model");
  }
  f.covariance.resize(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      f.covariance(i, j) = parse_double(cov.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j + 1)],
                                        prefix + "_covariance.csv");
    }
  }

  const auto res = parse_csv(read_file(prefix + "_residuals.csv"));
  const auto obs = res.column("observed");
  if (obs == std::string::npos || res.rows.empty()) throw ValidationError(prefix + "_residuals.csv: no observed column");
  f.observed_min = HUGE_VAL;
  f.observed_max = -HUGE_VAL;
  for (const auto& row : res.rows) {
    const double v = parse_double(row[obs], prefix + "_residuals.csv");
    f.observed_min = std::min(f.observed_min, v);
    f.observed_max = std::max(f.observed_max, v);
  }
  return f;
}

/// NAME:max | NAME:min | NAME:target=V, then optional :worst=V :best=V :weight=V
Goal parse_goal(const std::string& spec) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = spec.find(':', start);
    parts.push_back(spec.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (parts.size() < 2 || parts[0].empty()) throw ValidationError("goal '" + spec + "': expected NAME:max|min|target=V");
  Goal g;
  g.response = parts[0];
  const auto where = "goal '" + spec + "'";
  if (parts[1] == "max") {
    g.direction = Direction::Maximize;
  } else if (parts[1] == "min") {
    g.direction = Direction::Minimize;
  } else if (parts[1].rfind("target=", 0) == 0) {
    g.direction = Direction::Target;
    g.target = parse_double(parts[1].substr(7), where);
  } else {
    throw ValidationError(where + ": unknown direction '" + parts[1] + "'");
  }
  for (std::size_t k = 2; k < parts.size(); ++k) {
    const auto eq = parts[k].find('=');
    const auto key = parts[k].substr(0, eq);
    if (eq == std::string::npos) throw ValidationError(where + ": expected key=value, got '" + parts[k] + "'");
    const double v = parse_double(parts[k].substr(eq + 1), where);
    if (key == "worst") {
      g.worst = v;
    } else if (key == "best") {
      g.best = v;
    } else if (key == "weight") {
      g.weight = v;
    } else {
      throw ValidationError(where + ": unknown option '" + key + "'");
    }
  }
  return g;
}

int cmd_profile(const ProfileArgs& a, std::ostream& out) {
  const auto model = parse_model_file(read_file(a.model));
  std::vector<FittedResponse> fits;
  for (const auto& spec : a.fits) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("--fit expects NAME=PREFIX, got '" + spec + "'");
    fits.push_back(load_fit(spec.substr(0, eq), spec.substr(eq + 1), model));
  }
  std::vector<Goal> goals;
  for (const auto& g : a.goals) goals.push_back(parse_goal(g));
  OptimizeOptions opts;
  opts.grid_points = a.grid;
  const auto rec = optimize(fits, goals, opts);

  out << "Recommended settings (overall desirability " << fixed(rec.desirability) << ")\n";
  for (std::size_t f = 0; f < rec.factors.size(); ++f) {
    out << "  " << std::left << std::setw(12) << rec.factors[f] << std::setw(14) << rec.natural[f]
        << "coded " << fixed(rec.coded[f]) << "\n";
  }
  out << "Predictions\n";
  for (const auto& r : rec.responses) {
    out << "  " << std::left << std::setw(12) << r.response << std::right << fixed(r.prediction.value, 2)
        << " +/- " << fixed(r.prediction.std_error, 2) << "  desirability " << fixed(r.desirability) << "\n";
  }
  if (!a.out.empty()) {
    CsvTable t;
    t.header = {"kind", "name", "value", "coded", "std_error", "desirability"};
    for (std::size_t f = 0; f < rec.factors.size(); ++f) {
      t.rows.push_back({"factor", rec.factors[f], rec.natural[f], format_double(rec.coded[f]), "", ""});
    }
    for (const auto& r : rec.responses) {
      t.rows.push_back({"response", r.response, format_double(r.prediction.value), "",
                        format_double(r.prediction.std_error), format_double(r.desirability)});
    }
    t.rows.push_back({"overall", "desirability", format_double(rec.desirability), "", "", ""});
    write_file(a.out, format_csv(t));
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Split-plot experiment planning, generation, evaluation and analysis", "splitplot"};
  app.require_subcommand(1);

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "Degrees-of-freedom accounting for both randomization levels");
  plan_cmd->add_option("model", plan.model, "Model declaration file")->required();
  plan_cmd->add_option("--min-wp-error-df", plan.min_wp, "Minimum whole-plot error df");
  plan_cmd->add_option("--min-sp-error-df", plan.min_sp, "Minimum subplot error df");
  plan_cmd->add_option("--whole-plots", plan.whole_plots, "Number of whole plots (default: minimum)");
  plan_cmd->add_option("--error-df", plan.error_df, "Proposed subplot error df (default: minimum)");
  plan_cmd->add_option("--csv", plan.csv, "Write the df tables as CSV");

  DesignArgs design;
  auto* design_cmd = app.add_subcommand("design", "Generate a D-optimal split-plot design");
  design_cmd->add_option("model", design.model, "Model declaration file")->required();
  design_cmd->add_option("--runs", design.runs, "Total number of runs")->required();
  design_cmd->add_option("--whole-plots", design.whole_plots, "Number of whole plots")->required();
  design_cmd->add_option("--ratio", design.ratio, "Assumed variance ratio sigma_gamma^2 / sigma_epsilon^2");
  design_cmd->add_option("--starts", design.starts, "Random starts");
  design_cmd->add_option("--seed", design.seed, "RNG seed");
  design_cmd->add_option("--threads", design.threads, "Worker threads (0: all cores)");
  design_cmd->add_flag("--no-randomize", design.no_randomize, "Keep the generated (unrandomized) run order");
  design_cmd->add_option("--out", design.out, "Output design CSV")->required();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Power, correlation, VIF and prediction variance of a design");
  eval_cmd->add_option("design", eval.design, "Design CSV")->required();
  eval_cmd->add_option("model", eval.model, "Model declaration file")->required();
  eval_cmd->add_option("--ratio", eval.ratio, "Assumed variance ratio");
  eval_cmd->add_option("--snr", eval.snr, "Signal-to-noise ratio (coefficient / sigma_epsilon)");
  eval_cmd->add_option("--alpha", eval.alpha, "Significance level");
  eval_cmd->add_option("--alias-threshold", eval.alias, "Warn when |correlation| exceeds this");
  eval_cmd->add_option("--csv-prefix", eval.csv_prefix, "Write <prefix>_{power,correlation,vif}.csv");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate boomerang tin responses for a design");
  sim_cmd->add_option("design", sim.design, "Design CSV")->required();
  sim_cmd->add_option("model", sim.model, "Model declaration file")->required();
  sim_cmd->add_option("--truth", sim.truth, "Truth config (default: built-in)");
  sim_cmd->add_option("--seed", sim.seed, "RNG seed (default: the config's seed)");
  sim_cmd->add_option("--out", sim.out, "Output CSV with response columns")->required();

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "REML + GLS fit of one response");
  fit_cmd->add_option("data", fit.data, "Design CSV with response columns")->required();
  fit_cmd->add_option("model", fit.model, "Model declaration file")->required();
  fit_cmd->add_option("--response", fit.response, "Response column")->required();
  fit_cmd->add_option("--out-prefix", fit.out_prefix, "Write <prefix>_{coefficients,covariance,tests,residuals,summary}.csv");

  ProfileArgs prof;
  auto* prof_cmd = app.add_subcommand("profile", "Find settings that jointly optimize fitted responses");
  prof_cmd->add_option("model", prof.model, "Model declaration file")->required();
  prof_cmd->add_option("--fit", prof.fits, "NAME=PREFIX of a fit written by 'fit --out-prefix'")->required();
  prof_cmd->add_option("--goal", prof.goals, "NAME:max|min|target=V[:worst=V][:best=V][:weight=V]")->required();
  prof_cmd->add_option("--grid", prof.grid, "Grid points per continuous factor");
  prof_cmd->add_option("--out", prof.out, "Write the recommendation as CSV");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (*plan_cmd) return cmd_plan(plan, out);
    if (*design_cmd) return cmd_design(design, out, err);
    if (*eval_cmd) return cmd_eval(eval, out, err);
    if (*sim_cmd) return cmd_simulate(sim, out);
    if (*fit_cmd) return cmd_fit(fit, out);
    if (*prof_cmd) return cmd_profile(prof, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitValidation;
}

}  // namespace splitplot
