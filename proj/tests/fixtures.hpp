#pragma once

#include <vector>

#include "splitplot/design_gen.hpp"
#include "splitplot/model_spec.hpp"

namespace fixtures {

using namespace splitplot;

/// The boomerang tin factors: x1 nut weight (hard), x2 tension, x3 twist,
/// x4 ramp height.
inline std::vector<Factor> boomerang_factors() {
  return {define_factor("x1", FactorKind::Categorical, {"light", "heavy"}, true),
          define_factor("x2", 20.0, 40.0, false),
          define_factor("x3", FactorKind::Categorical, {"no", "yes"}, false),
          define_factor("x4", 10.0, 30.0, false)};
}

inline ModelSpec boomerang_model() { return build_model(boomerang_factors(), TermPolicy::MainsAndAll2fi); }

inline GenerationResult boomerang_design(std::uint64_t seed = 1, std::size_t runs = 24,
                                         std::size_t plots = 6) {
  DesignSpec spec;
  spec.model = boomerang_model();
  spec.n_runs = runs;
  spec.n_whole_plots = plots;
  spec.seed = seed;
  return generate_design(spec);
}

/// Design with explicit runs: settings per run, plot per run.
inline Design make_design(const std::vector<Factor>& factors, const std::vector<std::size_t>& plots,
                          const std::vector<std::vector<double>>& settings) {
  Design d;
  d.factors = factors;
  for (std::size_t j = 0; j < plots.size(); ++j) d.runs.push_back({plots[j], settings[j]});
  return d;
}

/// Two continuous easy factors, 2^2 full factorial, one run per plot.
inline Design factorial_2x2(const std::vector<Factor>& factors, std::size_t replicates = 1) {
  std::vector<std::size_t> plots;
  std::vector<std::vector<double>> s;
  for (std::size_t r = 0; r < replicates; ++r) {
    for (double a : {-1.0, 1.0}) {
      for (double b : {-1.0, 1.0}) {
        plots.push_back(plots.size());
        s.push_back({a, b});
      }
    }
  }
  return make_design(factors, plots, s);
}

}  // namespace fixtures
