#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "splitplot/inference.hpp"
#include "splitplot/model_spec.hpp"

namespace splitplot {

/// What the profiler needs from a fit: the model, GLS estimates and the
/// observed range of the response (default desirability bounds).
struct FittedResponse {
  std::string name;
  ModelSpec model;
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;
  double observed_min = 0.0;
  double observed_max = 0.0;

  static FittedResponse from_fit(const GlsFit& fit);
};

struct Prediction {
  double value = 0.0;
  double std_error = 0.0;
};

/// y = f(x)^T beta, se = sqrt(f^T Cov f) at coded settings.
Prediction predict(const FittedResponse& fit, const std::vector<double>& coded);

/// Settings in natural units / level labels, keyed by factor name.
/// Throws ValidationError for a missing factor, an unknown factor, an invalid
/// level or a continuous value outside its range.
std::vector<double> coded_settings(const ModelSpec& model,
                                   const std::map<std::string, std::string>& natural);
Prediction predict(const FittedResponse& fit, const std::map<std::string, std::string>& natural);

enum class Direction { Maximize, Minimize, Target };

/// Derringer-Suich goal. For maximize/minimize, desirability ramps linearly
/// from 0 at `worst` to 1 at `best`. For target, `worst` and `best` bound an
/// acceptance interval around `target`: 0 at either end, 1 at the target.
/// Unset bounds default to the observed response range.
struct Goal {
  std::string response;
  Direction direction = Direction::Maximize;
  double target = 0.0;
  std::optional<double> worst;
  std::optional<double> best;
  double weight = 1.0;
};

/// Per-goal desirability with resolved bounds.
double desirability(Direction direction, double worst, double best, double target, double y);

struct ResponseOutcome {
  std::string response;
  Prediction prediction;
  double desirability = 0.0;
};

struct SettingRecommendation {
  std::vector<std::string> factors;
  std::vector<double> coded;
  std::vector<std::string> natural;  // formatted value or level label
  std::vector<ResponseOutcome> responses;
  double desirability = 0.0;  // weighted geometric mean
};

struct OptimizeOptions {
  std::size_t grid_points = 21;
};

/// Maximizes the weighted geometric-mean desirability over every categorical
/// level combination crossed with a coded [-1, 1] grid on the continuous
/// factors, then makes one coordinate-descent pass over the continuous
/// factors within one grid cell of the incumbent. Ties keep the first
/// point in enumeration order (first factor varies slowest).
SettingRecommendation optimize(const std::vector<FittedResponse>& fits, const std::vector<Goal>& goals,
                               const OptimizeOptions& options = {});

/// Overall desirability at coded settings; used by optimize and its tests.
double overall_desirability(const std::vector<FittedResponse>& fits, const std::vector<Goal>& goals,
                            const std::vector<double>& coded);

}  // namespace splitplot
