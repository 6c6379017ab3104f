#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "splitplot/errors.hpp"
#include "splitplot/model_spec.hpp"

using namespace splitplot;

TEST_CASE("define_factor validates its inputs") {
  const auto x1 = define_factor("nut weight", FactorKind::Categorical, {"low", "high"}, true);
  CHECK(x1.kind == FactorKind::Categorical);
  CHECK(x1.hard_to_change);
  CHECK(x1.coded_columns() == 1);

  const auto x2 = define_factor("tension", 20.0, 40.0, false);
  CHECK(x2.kind == FactorKind::Continuous);
  CHECK_FALSE(x2.hard_to_change);

  CHECK_THROWS_AS(define_factor("z", 5.0, 5.0, false), ValidationError);
  CHECK_THROWS_AS(define_factor("z", 6.0, 5.0, false), ValidationError);
  CHECK_THROWS_AS(define_factor("w", FactorKind::Categorical, {"only"}, false), ValidationError);
  CHECK_THROWS_AS(define_factor("w", FactorKind::Categorical, {"a", "a"}, false), ValidationError);
  CHECK_THROWS_AS(define_factor("", 0.0, 1.0, false), ValidationError);
}

TEST_CASE("coding maps natural ranges and levels onto model columns") {
  const auto t = define_factor("t", 20.0, 40.0, false);
  CHECK(t.to_coded(20.0) == -1.0);
  CHECK(t.to_coded(30.0) == 0.0);
  CHECK(t.to_coded(40.0) == 1.0);
  CHECK(t.to_natural(-1.0) == 20.0);
  CHECK(t.to_natural(0.5) == 35.0);

  const auto two = define_factor("c", FactorKind::Categorical, {"lo", "hi"}, false);
  CHECK(two.columns(0) == std::vector<double>{-1.0});
  CHECK(two.columns(1) == std::vector<double>{1.0});

  const auto three = define_factor("k", FactorKind::Categorical, {"a", "b", "c"}, false);
  CHECK(three.coded_columns() == 2);
  CHECK(three.columns(0) == std::vector<double>{-1.0, -1.0});
  CHECK(three.columns(1) == std::vector<double>{1.0, 0.0});
  CHECK(three.columns(2) == std::vector<double>{0.0, 1.0});
  CHECK_THROWS_AS(three.columns(3), ValidationError);
  CHECK_FALSE(three.is_valid_setting(0.5));
}

TEST_CASE("build_model: boomerang mains and all two-factor interactions") {
  const auto model = fixtures::boomerang_model();
  REQUIRE(model.terms.size() == 10);
  CHECK(model.term_label(model.terms[0]) == "x1");
  CHECK(model.terms[0].level == Level::WholePlot);
  for (std::size_t t = 1; t < model.terms.size(); ++t) CHECK(model.terms[t].level == Level::SubPlot);
  const std::vector<std::string> expected{"x1", "x2", "x3", "x4", "x1*x2", "x1*x3",
                                          "x1*x4", "x2*x3", "x2*x4", "x3*x4"};
  for (std::size_t t = 0; t < expected.size(); ++t) CHECK(model.term_label(model.terms[t]) == expected[t]);
  CHECK(model.n_columns() == 11);
  CHECK(model.whole_plot_terms().size() == 1);
  CHECK(model.subplot_terms().size() == 9);
}

TEST_CASE("build_model: policies, classification and errors") {
  const auto single = build_model({define_factor("a", 0.0, 1.0, false)}, TermPolicy::MainsOnly);
  CHECK(single.terms.size() == 1);

  const auto two_hard = build_model({define_factor("x1", 0.0, 1.0, true), define_factor("x2", 0.0, 1.0, true)},
                                    TermPolicy::MainsAndAll2fi);
  REQUIRE(two_hard.terms.size() == 3);
  for (const auto& t : two_hard.terms) CHECK(t.level == Level::WholePlot);

  auto factors = fixtures::boomerang_factors();
  CHECK_THROWS_AS(build_model(factors, ExplicitTerms{{"x1"}, {"x9"}}), ValidationError);
  CHECK_THROWS_AS(build_model(factors, ExplicitTerms{std::vector<std::string>{"x1", "x1"}}), ValidationError);
  CHECK_THROWS_AS(build_model(factors, ExplicitTerms{{"x1"}, {"x1"}}), ValidationError);
  CHECK_THROWS_AS(build_model({}, TermPolicy::MainsOnly), ValidationError);
  auto dup = factors;
  dup[1].name = "x1";
  CHECK_THROWS_AS(build_model(dup, TermPolicy::MainsOnly), ValidationError);

  // explicit terms are normalized into canonical order
  const auto m = build_model(factors, ExplicitTerms{{"x3", "x2"}, {"x4"}, {"x1"}, {"x2", "x1"}});
  REQUIRE(m.terms.size() == 4);
  CHECK(m.term_label(m.terms[0]) == "x1");
  CHECK(m.term_label(m.terms[1]) == "x4");
  CHECK(m.term_label(m.terms[2]) == "x1*x2");
  CHECK(m.term_label(m.terms[3]) == "x2*x3");
}

TEST_CASE("classify_term follows the hard-to-change flags") {
  const auto f = fixtures::boomerang_factors();
  CHECK(classify_term({0}, f) == Level::WholePlot);
  CHECK(classify_term({0, 1}, f) == Level::SubPlot);
  CHECK(classify_term({1, 2}, f) == Level::SubPlot);

  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Factor> fs;
    for (int k = 0; k < 5; ++k) fs.push_back(define_factor("f" + std::to_string(k), 0.0, 1.0, rng() % 2 == 0));
    const std::size_t a = rng() % 5;
    const std::size_t b = rng() % 5;
    const bool expect = fs[a].hard_to_change && fs[b].hard_to_change;
    CHECK((classify_term({a, b}, fs) == Level::WholePlot) == expect);
  }
}

TEST_CASE("build_model is deterministic") {
  const auto a = fixtures::boomerang_model();
  const auto b = fixtures::boomerang_model();
  CHECK(a.terms == b.terms);
}

TEST_CASE("whole-plot df accounting") {
  const auto wp = count_whole_plot_df(fixtures::boomerang_model());
  CHECK(wp.model_df == 2);
  CHECK(wp.error_df == 4);
  CHECK(wp.min_units == 6);
  REQUIRE(wp.per_term_df.size() == 1);
  CHECK(wp.per_term_df[0] == std::pair<std::string, std::size_t>{"x1", 1});

  const auto none = count_whole_plot_df(build_model({define_factor("a", 0.0, 1.0, false)}, TermPolicy::MainsOnly));
  CHECK(none.model_df == 1);
  CHECK(none.min_units == 5);

  auto factors = fixtures::boomerang_factors();
  factors[0] = define_factor("x1", FactorKind::Categorical, {"light", "medium", "heavy"}, true);
  const auto three = count_whole_plot_df(build_model(factors, TermPolicy::MainsOnly));
  CHECK(three.per_term_df[0].second == 2);
  CHECK(three.min_units == 7);
}

TEST_CASE("subplot df accounting") {
  const auto model = fixtures::boomerang_model();
  const auto sp = count_subplot_df(model, 6, kDefaultMinSubPlotErrorDf, 9);
  CHECK(sp.takeover_df == 6);
  CHECK(sp.model_df == 15);
  CHECK(sp.error_df == 9);
  CHECK(sp.min_units == 24);
  CHECK_FALSE(sp.below_minimum);
  CHECK(sp.per_term_df.size() == 9);

  const auto mains_wp = build_model({define_factor("x1", FactorKind::Categorical, {"a", "b"}, true)},
                                    TermPolicy::MainsOnly);
  CHECK(count_subplot_df(mains_wp, 6, 5).min_units == 11);

  // takeover 8 with the same 9 subplot df and 1 error df
  const auto eight = count_subplot_df(model, 8, kDefaultMinSubPlotErrorDf, 1);
  CHECK(eight.min_units == 8 + 9 + 1);
  CHECK(eight.below_minimum);

  CHECK_THROWS_AS(count_subplot_df(model, 5), ValidationError);
}

TEST_CASE("subplot df report is additive for random models") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Factor> fs;
    const int k = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < k; ++i) {
      const bool hard = rng() % 3 == 0;
      if (rng() % 2) {
        fs.push_back(define_factor("f" + std::to_string(i), 0.0, 1.0, hard));
      } else {
        std::vector<std::string> lv;
        for (std::size_t l = 0; l < 2 + rng() % 3; ++l) lv.push_back("l" + std::to_string(l));
        fs.push_back(define_factor("f" + std::to_string(i), FactorKind::Categorical, lv, hard));
      }
    }
    const auto model = build_model(fs, rng() % 2 ? TermPolicy::MainsOnly : TermPolicy::MainsAndAll2fi);
    const auto wp = count_whole_plot_df(model);
    std::size_t wp_sum = 1;
    for (const auto& [t, df] : wp.per_term_df) wp_sum += df;
    CHECK(wp.model_df == wp_sum);

    const std::size_t r = wp.min_units + rng() % 4;
    const std::size_t err = rng() % 12;
    const auto sp = count_subplot_df(model, r, 5, err);
    std::size_t sp_sum = 0;
    for (const auto& [t, df] : sp.per_term_df) sp_sum += df;
    CHECK(sp.min_units == r + sp_sum + err);
    CHECK(sp.model_df == r + sp_sum);
    CHECK(wp.per_term_df.size() + sp.per_term_df.size() == model.terms.size());
  }
}

TEST_CASE("containment df for the 24-run, 6-plot boomerang design") {
  const auto cdf = containment_df(fixtures::boomerang_model(), 24, 6);
  CHECK(cdf.whole_plot == 4);
  CHECK(cdf.subplot == 9);
  const auto crd = containment_df(fixtures::boomerang_model(), 24, 24);
  CHECK(crd.whole_plot == 13);
  CHECK(crd.subplot == 13);
}

TEST_CASE("model rows expand interactions as products of coded columns") {
  const auto model = fixtures::boomerang_model();
  const auto row = model.row({1.0, -1.0, 0.0, 0.5});
  // intercept, x1..x4, x1x2, x1x3, x1x4, x2x3, x2x4, x3x4
  const std::vector<double> expected{1, 1, -1, -1, 0.5, -1, -1, 0.5, 1, -0.5, -0.5};
  CHECK(row == expected);
  CHECK(model.column_labels().size() == 11);
  CHECK(model.column_labels()[5] == "x1*x2");
}
