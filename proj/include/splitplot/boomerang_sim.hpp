#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "splitplot/design_gen.hpp"
#include "splitplot/inference.hpp"

namespace splitplot {

/// Coefficients for one model term, one value per coded column of the term.
struct TruthTerm {
  std::vector<std::string> factors;  // one name, or two for an interaction
  std::vector<double> coefficients;

  bool operator==(const TruthTerm&) const = default;
};

/// Linear Gaussian ground truth for one response (units: cm).
struct ResponseTruth {
  std::string name;
  double intercept = 0.0;
  std::vector<TruthTerm> terms;
  double sigma_gamma = 0.0;    // whole-plot SD
  double sigma_epsilon = 0.0;  // residual SD

  bool operator==(const ResponseTruth&) const = default;
};

struct TruthConfig {
  int version = 1;
  std::uint64_t seed = 0;
  std::vector<ResponseTruth> responses;

  /// Throws ValidationError on negative SDs, empty or duplicate names,
  /// or malformed terms.
  void validate() const;
  const ResponseTruth& response(const std::string& name) const;

  bool operator==(const TruthConfig&) const = default;
};

/// Key = value text:
///   version = 1
///   seed = 7
///   responses = Y1, Y2
///   Y1.intercept = 400
///   Y1.sigma_gamma = 30.15
///   Y1.sigma_epsilon = 60.3
///   Y1.term.x1 = 110
///   Y1.term.x2*x3 = 0
/// '#' starts a comment. Multi-column terms list comma-separated values.
TruthConfig parse_truth_config(std::string_view text);
std::string format_truth_config(const TruthConfig& config);

/// Text of the shipped default configuration (data/default_truth.cfg).
std::string_view default_truth_text();

/// Boomerang tin defaults. Y1 (forward distance) responds to all four main
/// effects and no interaction; Y2 (rollback distance) responds to the nut
/// weight x1 only, heavy nuts rolling further. Residual SDs are 60.3 and
/// 53.9 cm, whole-plot SDs half of those.
TruthConfig default_truth();

/// Noise-free mean f(x)^T beta for every run. Throws ValidationError when a
/// term names a factor missing from the design or has the wrong number of
/// coefficients.
Eigen::VectorXd mean_surface(const Design& design, const ResponseTruth& truth);

/// Y_ij = f(x_ij)^T beta + gamma_i + epsilon_ij for every configured
/// response. Draws, per response in order, one gamma per whole plot then one
/// epsilon per run from a single engine seeded with `seed`.
ResponseTable simulate(const Design& design, const TruthConfig& truth, std::uint64_t seed);

}  // namespace splitplot
