#include "splitplot/profiler.hpp"

#include <algorithm>
#include <cmath>

#include "splitplot/errors.hpp"
#include "splitplot/io.hpp"

namespace splitplot {

namespace {

using Eigen::Index;

bool same_factors(const ModelSpec& a, const ModelSpec& b) {
  if (a.factors.size() != b.factors.size()) return false;
  for (std::size_t i = 0; i < a.factors.size(); ++i) {
    const auto& fa = a.factors[i];
    const auto& fb = b.factors[i];
    if (fa.name != fb.name || fa.kind != fb.kind || fa.levels != fb.levels || fa.low != fb.low ||
        fa.high != fb.high) {
      return false;
    }
  }
  return true;
}

struct ResolvedGoal {
  std::size_t fit = 0;
  Direction direction = Direction::Maximize;
  double worst = 0.0;
  double best = 1.0;
  double target = 0.0;
  double weight = 1.0;
};

std::vector<ResolvedGoal> resolve(const std::vector<FittedResponse>& fits, const std::vector<Goal>& goals) {
  if (goals.empty()) throw ValidationError("no goals given");
  if (fits.empty()) throw ValidationError("no fitted responses given");
  for (const auto& f : fits) {
    if (!same_factors(f.model, fits.front().model)) {
      throw ValidationError("fits for '" + f.name + "' and '" + fits.front().name +
                            "' use different factors");
    }
  }
  std::vector<ResolvedGoal> out;
  double total_weight = 0.0;
  for (const auto& g : goals) {
    auto it = std::find_if(fits.begin(), fits.end(), [&](const FittedResponse& f) { return f.name == g.response; });
    if (it == fits.end()) throw ValidationError("goal references unknown response '" + g.response + "'");
    if (!(g.weight >= 0.0) || !std::isfinite(g.weight)) throw ValidationError("goal weights must be >= 0");
    ResolvedGoal r;
    r.fit = static_cast<std::size_t>(it - fits.begin());
    r.direction = g.direction;
    r.target = g.target;
    r.weight = g.weight;
    switch (g.direction) {
      case Direction::Maximize:
        r.worst = g.worst.value_or(it->observed_min);
        r.best = g.best.value_or(it->observed_max);
        break;
      case Direction::Minimize:
        r.worst = g.worst.value_or(it->observed_max);
        r.best = g.best.value_or(it->observed_min);
        break;
      case Direction::Target:
        r.worst = g.worst.value_or(it->observed_min);
        r.best = g.best.value_or(it->observed_max);
        if (!(std::min(r.worst, r.best) <= g.target && g.target <= std::max(r.worst, r.best))) {
          throw ValidationError("target for '" + g.response + "' lies outside its bounds");
        }
        break;
    }
    if (!(r.worst != r.best)) throw ValidationError("goal for '" + g.response + "': worst and best coincide");
    total_weight += r.weight;
    out.push_back(r);
  }
  if (!(total_weight > 0.0)) throw ValidationError("goal weights are all zero");
  for (auto& r : out) r.weight /= total_weight;
  return out;
}

double combined(const std::vector<FittedResponse>& fits, const std::vector<ResolvedGoal>& goals,
                const std::vector<double>& coded) {
  double log_d = 0.0;
  for (const auto& g : goals) {
    const double y = predict(fits[g.fit], coded).value;
    const double d = desirability(g.direction, g.worst, g.best, g.target, y);
    if (g.weight == 0.0) continue;
    if (d <= 0.0) return 0.0;
    log_d += g.weight * std::log(d);
  }
  return std::clamp(std::exp(log_d), 0.0, 1.0);
}

}  // namespace

FittedResponse FittedResponse::from_fit(const GlsFit& fit) {
  FittedResponse out;
  out.name = fit.response;
  out.model = fit.model;
  out.coefficients = fit.coefficients;
  out.covariance = fit.coefficient_cov;
  out.observed_min = fit.observed.minCoeff();
  out.observed_max = fit.observed.maxCoeff();
  return out;
}

Prediction predict(const FittedResponse& fit, const std::vector<double>& coded) {
  const auto row = fit.model.row(coded);
  const Eigen::Map<const Eigen::VectorXd> f(row.data(), static_cast<Index>(row.size()));
  if (f.size() != fit.coefficients.size()) throw ValidationError("fit does not match its model");
  Prediction p;
  p.value = f.dot(fit.coefficients);
  p.std_error = std::sqrt(std::max(0.0, f.dot(fit.covariance * f)));
  return p;
}

std::vector<double> coded_settings(const ModelSpec& model,
                                   const std::map<std::string, std::string>& natural) {
  for (const auto& [name, value] : natural) model.factor_index(name);
  std::vector<double> coded;
  for (const auto& f : model.factors) {
    auto it = natural.find(f.name);
    if (it == natural.end()) throw ValidationError("missing setting for factor '" + f.name + "'");
    if (f.kind == FactorKind::Categorical) {
      const auto lvl = f.level_index(it->second);
      if (!lvl) throw ValidationError("'" + it->second + "' is not a level of '" + f.name + "'");
      coded.push_back(static_cast<double>(*lvl));
    } else {
      const double v = parse_double(it->second, f.name);
      if (v < f.low || v > f.high) {
        throw ValidationError(f.name + " = " + it->second + " is outside its range");
      }
      coded.push_back(std::clamp(f.to_coded(v), -1.0, 1.0));
    }
  }
  return coded;
}

Prediction predict(const FittedResponse& fit, const std::map<std::string, std::string>& natural) {
  return predict(fit, coded_settings(fit.model, natural));
}

double desirability(Direction direction, double worst, double best, double target, double y) {
  if (direction == Direction::Target) {
    const double lo = std::min(worst, best);
    const double hi = std::max(worst, best);
    if (y < lo || y > hi) return 0.0;
    if (y == target) return 1.0;
    if (y < target) return (y - lo) / (target - lo);
    return (hi - y) / (hi - target);
  }
  return std::clamp((y - worst) / (best - worst), 0.0, 1.0);
}

double overall_desirability(const std::vector<FittedResponse>& fits, const std::vector<Goal>& goals,
                            const std::vector<double>& coded) {
  return combined(fits, resolve(fits, goals), coded);
}

SettingRecommendation optimize(const std::vector<FittedResponse>& fits, const std::vector<Goal>& goals,
                               const OptimizeOptions& options) {
  const auto resolved = resolve(fits, goals);
  if (options.grid_points < 2) throw ValidationError("grid needs at least 2 points per axis");
  const auto& model = fits.front().model;
  const auto k = model.factors.size();

  std::vector<std::vector<double>> axes(k);
  const double step = 2.0 / static_cast<double>(options.grid_points - 1);
  for (std::size_t f = 0; f < k; ++f) {
    if (model.factors[f].kind == FactorKind::Categorical) {
      axes[f] = model.factors[f].candidates();
    } else {
      for (std::size_t g = 0; g < options.grid_points; ++g) {
        axes[f].push_back(g + 1 == options.grid_points ? 1.0 : -1.0 + step * static_cast<double>(g));
      }
    }
  }

  std::vector<std::size_t> counter(k, 0);
  std::vector<double> point(k);
  std::vector<double> best_point;
  double best_d = -1.0;
  for (bool done = false; !done;) {
    for (std::size_t f = 0; f < k; ++f) point[f] = axes[f][counter[f]];
    const double d = combined(fits, resolved, point);
    if (d > best_d) {
      best_d = d;
      best_point = point;
    }
    // odometer increment, last factor fastest
    for (std::size_t f = k;;) {
      if (f == 0) {
        done = true;
        break;
      }
      --f;
      if (++counter[f] < axes[f].size()) break;
      counter[f] = 0;
    }
  }

  // one coordinate-descent pass: golden-section within the incumbent's cell
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t f = 0; f < k; ++f) {
    if (model.factors[f].kind != FactorKind::Continuous) continue;
    auto eval = [&](double v) {
      auto p = best_point;
      p[f] = v;
      return combined(fits, resolved, p);
    };
    double a = std::max(-1.0, best_point[f] - step);
    double b = std::min(1.0, best_point[f] + step);
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = eval(c);
    double fd = eval(d);
    while (b - a > 1e-9) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        fc = eval(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + inv_phi * (b - a);
        fd = eval(d);
      }
    }
    for (double v : {0.5 * (a + b), a, b}) {
      const double val = eval(v);
      if (val > best_d) {
        best_d = val;
        best_point[f] = v;
      }
    }
  }

  SettingRecommendation rec;
  rec.coded = best_point;
  for (std::size_t f = 0; f < k; ++f) {
    const auto& factor = model.factors[f];
    rec.factors.push_back(factor.name);
    rec.natural.push_back(factor.kind == FactorKind::Categorical
                              ? factor.levels[static_cast<std::size_t>(best_point[f])]
                              : format_double(factor.to_natural(best_point[f])));
  }
  for (const auto& g : resolved) {
    ResponseOutcome o;
    o.response = fits[g.fit].name;
    o.prediction = predict(fits[g.fit], best_point);
    o.desirability = desirability(g.direction, g.worst, g.best, g.target, o.prediction.value);
    rec.responses.push_back(o);
  }
  rec.desirability = best_d;
  return rec;
}

}  // namespace splitplot
