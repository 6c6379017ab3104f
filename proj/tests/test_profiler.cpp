#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "splitplot/boomerang_sim.hpp"
#include "splitplot/errors.hpp"
#include "splitplot/inference.hpp"
#include "splitplot/profiler.hpp"

using namespace splitplot;

namespace {

FittedResponse linear_fit(const std::string& name, std::vector<double> coefs, double lo, double hi) {
  FittedResponse f;
  f.name = name;
  f.model = build_model(fixtures::boomerang_factors(), TermPolicy::MainsOnly);
  f.coefficients = Eigen::Map<Eigen::VectorXd>(coefs.data(), static_cast<Eigen::Index>(coefs.size()));
  f.covariance = 0.01 * Eigen::MatrixXd::Identity(f.coefficients.size(), f.coefficients.size());
  f.observed_min = lo;
  f.observed_max = hi;
  return f;
}

std::vector<FittedResponse> default_fits(std::uint64_t seed) {
  const auto model = fixtures::boomerang_model();
  const auto table = simulate(fixtures::boomerang_design().design, default_truth(), seed);
  return {FittedResponse::from_fit(reml_fit(table, "Y1", model)),
          FittedResponse::from_fit(reml_fit(table, "Y2", model))};
}

}  // namespace

TEST_CASE("desirability ramps") {
  CHECK(desirability(Direction::Maximize, 0, 10, 0, -5) == 0.0);
  CHECK(desirability(Direction::Maximize, 0, 10, 0, 0) == 0.0);
  CHECK(desirability(Direction::Maximize, 0, 10, 0, 2.5) == doctest::Approx(0.25));
  CHECK(desirability(Direction::Maximize, 0, 10, 0, 10) == 1.0);
  CHECK(desirability(Direction::Maximize, 0, 10, 0, 20) == 1.0);

  CHECK(desirability(Direction::Minimize, 10, 0, 0, 7.5) == doctest::Approx(0.25));
  CHECK(desirability(Direction::Minimize, 10, 0, 0, -1) == 1.0);
  CHECK(desirability(Direction::Minimize, 10, 0, 0, 12) == 0.0);

  CHECK(desirability(Direction::Target, 0, 10, 4, 4) == 1.0);
  CHECK(desirability(Direction::Target, 0, 10, 4, 2) == doctest::Approx(0.5));
  CHECK(desirability(Direction::Target, 0, 10, 4, 7) == doctest::Approx(0.5));
  CHECK(desirability(Direction::Target, 0, 10, 4, 0) == 0.0);
  CHECK(desirability(Direction::Target, 0, 10, 4, 10) == 0.0);
  CHECK(desirability(Direction::Target, 0, 10, 4, 11) == 0.0);

  for (int i = 0; i <= 100; ++i) {
    const double y = -2.0 + 0.14 * i;
    const double d = desirability(Direction::Maximize, 1.0, 9.0, 0, y);
    const double expect = y <= 1.0 ? 0.0 : y >= 9.0 ? 1.0 : (y - 1.0) / 8.0;
    CHECK(d == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("predict") {
  const auto fit = linear_fit("y", {10, 1, 2, 3, 4}, 0, 20);
  const auto p = predict(fit, std::vector<double>{0.0, 0.0, 0.0, 0.0});
  // x1 and x3 are categorical: level 0 codes to -1
  CHECK(p.value == doctest::Approx(10 - 1 - 3));
  const auto center = predict(fit, {{"x1", "heavy"}, {"x2", "30"}, {"x3", "yes"}, {"x4", "20"}});
  CHECK(center.value == doctest::Approx(10 + 1 + 3));
  CHECK(center.std_error == doctest::Approx(std::sqrt(0.03)));

  CHECK_THROWS_AS(predict(fit, {{"x1", "heavy"}, {"x2", "30"}, {"x3", "yes"}}), ValidationError);
  CHECK_THROWS_AS(predict(fit, {{"x1", "medium"}, {"x2", "30"}, {"x3", "yes"}, {"x4", "20"}}), ValidationError);
  CHECK_THROWS_AS(predict(fit, {{"x1", "heavy"}, {"x2", "45"}, {"x3", "yes"}, {"x4", "20"}}), ValidationError);
  CHECK_THROWS_AS(predict(fit, {{"x1", "heavy"}, {"x2", "30"}, {"x3", "yes"}, {"x4", "20"}, {"x5", "1"}}),
                  ValidationError);
}

TEST_CASE("predict at coded center and at saturated design points") {
  const std::vector<Factor> f{define_factor("a", -1.0, 1.0, false), define_factor("b", -1.0, 1.0, false)};
  const auto model = build_model(f, TermPolicy::MainsAndAll2fi);
  const auto d = fixtures::factorial_2x2(f);
  Eigen::VectorXd y(4);
  y << 3.0, -1.0, 7.5, 2.0;
  const auto fit = FittedResponse::from_fit(gls_fit(d, model, y, 0.0));
  CHECK(predict(fit, std::vector<double>{0.0, 0.0}).value == doctest::Approx(fit.coefficients(0)));
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(predict(fit, d.runs[j].settings).value == doctest::Approx(y(static_cast<Eigen::Index>(j))));
  }
}

TEST_CASE("single maximize goal on a first-order model goes to the vertex") {
  const auto up = linear_fit("y", {10, 1, 2, 3, 4}, 0, 20);
  const auto rec = optimize({up}, {Goal{"y"}});
  CHECK(rec.coded == std::vector<double>{1, 1, 1, 1});
  CHECK(rec.natural == std::vector<std::string>{"heavy", "40", "yes", "30"});
  CHECK(rec.desirability == doctest::Approx(1.0));

  const auto mixed = linear_fit("y", {10, -1, 2, -3, -4}, 0, 20);
  const auto r2 = optimize({mixed}, {Goal{"y"}});
  CHECK(r2.coded == std::vector<double>{0, 1, 0, -1});
  for (double c : {r2.coded[1], r2.coded[3]}) CHECK(std::abs(c) == 1.0);

  Goal minimize{"y", Direction::Minimize};
  CHECK(optimize({up}, {minimize}).coded == std::vector<double>{0, -1, 0, -1});
}

TEST_CASE("default simulation: heavy nut weight maximizes both distances") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto fits = default_fits(seed);
    const auto rec = optimize(fits, {Goal{"Y1"}, Goal{"Y2"}});
    CHECK(rec.natural[0] == "heavy");
    CHECK(rec.desirability >= 0.0);
    CHECK(rec.desirability <= 1.0);
    for (const auto& fit : fits) {
      auto light = rec.coded;
      auto heavy = rec.coded;
      light[0] = 0.0;
      heavy[0] = 1.0;
      CHECK(predict(fit, heavy).value > predict(fit, light).value);
    }
  }
}

TEST_CASE("grid optimum agrees with a 201-point fine grid") {
  auto fits = default_fits(11);
  const std::vector<Goal> goals{Goal{"Y1", Direction::Target, 0.5 * (fits[0].observed_min + fits[0].observed_max)},
                                Goal{"Y2", Direction::Maximize}};
  const auto rec = optimize(fits, goals);
  CHECK(rec.desirability == doctest::Approx(overall_desirability(fits, goals, rec.coded)).epsilon(1e-12));

  double fine_best = -1.0;
  std::vector<std::vector<double>> argmax;
  for (double c1 : {0.0, 1.0}) {
    for (double c3 : {0.0, 1.0}) {
      for (int i = 0; i <= 200; ++i) {
        for (int j = 0; j <= 200; ++j) {
          const std::vector<double> pt{c1, -1.0 + 0.01 * i, c3, -1.0 + 0.01 * j};
          const double d = overall_desirability(fits, goals, pt);
          if (d > fine_best + 1e-12) {
            fine_best = d;
            argmax = {pt};
          } else if (std::abs(d - fine_best) <= 1e-12) {
            argmax.push_back(pt);
          }
        }
      }
    }
  }
  CHECK(rec.desirability >= fine_best - 1e-3);
  bool near = false;
  for (const auto& pt : argmax) {
    near = near || (pt[0] == rec.coded[0] && pt[2] == rec.coded[2] && std::abs(pt[1] - rec.coded[1]) <= 0.1 + 1e-12 &&
                    std::abs(pt[3] - rec.coded[3]) <= 0.1 + 1e-12);
  }
  CHECK(near);
  for (std::size_t f = 0; f < rec.coded.size(); ++f) {
    CHECK(fits[0].model.factors[f].is_valid_setting(rec.coded[f]));
  }
}

TEST_CASE("optimize errors") {
  const auto a = linear_fit("a", {10, 1, 2, 3, 4}, 0, 20);
  CHECK_THROWS_AS(optimize({a}, {}), ValidationError);
  CHECK_THROWS_AS(optimize({a}, {Goal{"b"}}), ValidationError);
  Goal zero{"a"};
  zero.weight = 0.0;
  CHECK_THROWS_AS(optimize({a}, {zero}), ValidationError);
  Goal same{"a"};
  same.worst = 5.0;
  same.best = 5.0;
  CHECK_THROWS_AS(optimize({a}, {same}), ValidationError);
  Goal off{"a", Direction::Target, 50.0};
  CHECK_THROWS_AS(optimize({a}, {off}), ValidationError);

  auto other = linear_fit("b", {1, 1}, 0, 1);
  other.model = build_model({define_factor("z", 0.0, 1.0, false)}, TermPolicy::MainsOnly);
  CHECK_THROWS_AS(optimize({a, other}, {Goal{"a"}}), ValidationError);
  OptimizeOptions one;
  one.grid_points = 1;
  CHECK_THROWS_AS(optimize({a}, {Goal{"a"}}, one), ValidationError);
}
