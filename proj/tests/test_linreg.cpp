#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "test_support.hpp"
#include "trigfit/json_io.hpp"
#include "trigfit/exprgen.hpp"
#include "trigfit/linreg.hpp"

using namespace trigfit;
using trigfit::testing::trig_target;
using trigfit::testing::mixed_target;

constexpr double kPi = std::numbers::pi;

namespace {

DesignMatrix dense(const std::vector<std::vector<double>>& rows, bool bias) {
  DesignMatrix dm;
  dm.rows = rows.size();
  dm.cols = rows.front().size();
  dm.include_bias = bias;
  for (std::size_t c = 0; c < dm.cols; ++c) dm.column_names.push_back("c" + std::to_string(c));
  for (std::size_t r = 0; r < dm.rows; ++r) {
    dm.values.insert(dm.values.end(), rows[r].begin(), rows[r].end());
    dm.kept_row_indices.push_back(r);
    dm.kept_xs.push_back(static_cast<double>(r));
  }
  return dm;
}

double sse(const DesignMatrix& x, const std::vector<double>& y, const std::vector<double>& w, double b) {
  double s = 0.0;
  for (std::size_t r = 0; r < x.rows; ++r) {
    double p = b;
    for (std::size_t c = 0; c < x.cols; ++c) p += w[c] * x.at(r, c);
    s += (p - y[r]) * (p - y[r]);
  }
  return s;
}

struct RandomSystem {
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
};

RandomSystem random_system(Rng& rng, std::size_t m, std::size_t n) {
  RandomSystem s;
  for (std::size_t r = 0; r < m; ++r) {
    std::vector<double> row(n);
    for (auto& v : row) v = rng.uniform(-1.0, 1.0);
    s.rows.push_back(row);
    s.y.push_back(rng.uniform(-5.0, 5.0));
  }
  return s;
}

}  // namespace

TEST(LeastSquares, ExactSingleColumn) {
  const auto m = fit_least_squares(dense({{1.0}, {2.0}}, false), {2.0, 4.0});
  ASSERT_EQ(m.weights.size(), 1u);
  EXPECT_NEAR(m.weights[0], 2.0, 1e-14);
  EXPECT_EQ(m.intercept, 0.0);
}

TEST(LeastSquares, MatchesNormalEquationsOracle) {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = static_cast<std::size_t>(rng.between(10, 100));
    const auto n = static_cast<std::size_t>(rng.between(1, 8));
    const bool bias = trial % 2 == 0;
    const auto sys = random_system(rng, m, n);
    const auto model = fit_least_squares(dense(sys.rows, bias), sys.y);
    const auto oracle = trigfit::testing::normal_equations(sys.rows, sys.y, bias);
    for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(model.weights[j], oracle[j], 1e-8);
    if (bias) {
      EXPECT_NEAR(model.intercept, oracle[n], 1e-8);
    }
  }
}

TEST(LeastSquares, ResidualOrthogonalToColumns) {
  Rng rng(9);
  const auto sys = random_system(rng, 60, 5);
  const auto dm = dense(sys.rows, false);
  const auto model = fit_least_squares(dm, sys.y);
  const auto pred = apply_model(model, dm);
  std::vector<double> r(dm.rows);
  for (std::size_t i = 0; i < dm.rows; ++i) r[i] = sys.y[i] - pred[i];
  const double rnorm = std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0));
  ASSERT_GT(rnorm, 1.0);
  for (std::size_t c = 0; c < dm.cols; ++c) {
    double dot = 0.0, cn = 0.0;
    for (std::size_t i = 0; i < dm.rows; ++i) {
      dot += dm.at(i, c) * r[i];
      cn += dm.at(i, c) * dm.at(i, c);
    }
    EXPECT_LE(std::abs(dot), 1e-8 * std::sqrt(cn) * rnorm);
  }
}

TEST(LeastSquares, PerturbationsNeverBeatTheSolution) {
  Rng rng(17);
  const auto sys = random_system(rng, 40, 4);
  const auto dm = dense(sys.rows, true);
  const auto model = fit_least_squares(dm, sys.y);
  const double best = sse(dm, sys.y, model.weights, model.intercept);
  for (int k = 0; k < 100; ++k) {
    auto w = model.weights;
    for (auto& v : w) v += rng.uniform(-1e-3, 1e-3);
    const double b = model.intercept + rng.uniform(-1e-3, 1e-3);
    EXPECT_GE(sse(dm, sys.y, w, b), best);
  }
}

TEST(LeastSquares, RankDeficiencyNamesColumns) {
  // Third column duplicates the first.
  const auto dm = dense({{1, 2, 1}, {2, 1, 2}, {3, 5, 3}, {4, 1, 4}}, false);
  try {
    fit_least_squares(dm, {1, 2, 3, 4});
    FAIL() << "expected RankDeficiency";
  } catch (const RankDeficiency& e) {
    ASSERT_EQ(e.dependent_columns().size(), 1u);
    const auto& name = e.dependent_columns()[0];
    EXPECT_TRUE(name == "c0" || name == "c2");
  }
  const auto ridged = fit_least_squares(dm, {1, 2, 3, 4}, 1e-8);
  EXPECT_NEAR(ridged.weights[0], ridged.weights[2], 1e-6);
  EXPECT_EQ(ridged.ridge, 1e-8);
}

TEST(LeastSquares, RidgeMatchesAugmentedNormalEquations) {
  Rng rng(3);
  const auto sys = random_system(rng, 30, 3);
  const double lambda = 0.7;
  const auto model = fit_least_squares(dense(sys.rows, false), sys.y, lambda);
  // (X^T X + lambda I) w = X^T y via the oracle on stacked rows.
  auto rows = sys.rows;
  auto y = sys.y;
  for (std::size_t j = 0; j < 3; ++j) {
    std::vector<double> r(3, 0.0);
    r[j] = std::sqrt(lambda);
    rows.push_back(r);
    y.push_back(0.0);
  }
  const auto oracle = trigfit::testing::normal_equations(rows, y, false);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(model.weights[j], oracle[j], 1e-10);
}

TEST(LeastSquares, ArgumentErrors) {
  const auto dm = dense({{1.0}, {2.0}}, false);
  EXPECT_THROW(fit_least_squares(dm, {1.0}), InvalidArgument);
  EXPECT_THROW(fit_least_squares(dm, {1.0, 2.0}, -1.0), InvalidArgument);
}

TEST(LeastSquares, TrigTargetRecoversCollapsedCoefficients) {
  const auto d = sample_expression(trig_target(), -kPi, kPi, 0.01);
  const auto spec = trig_spec();
  const auto model = fit_spec(d, spec);
  EXPECT_NEAR(model.weights[0], 37.0, 1e-9);
  EXPECT_NEAR(model.weights[1], 0.0, 1e-9);
  EXPECT_NEAR(model.weights[2], 230.0, 1e-9);
  EXPECT_NEAR(model.intercept, 0.0, 1e-9);
  const auto p = predict(model, {kPi / 4});
  EXPECT_NEAR(p.values[0], 141.16295090390227, 1e-8);
}

TEST(Predict, ConstantModel) {
  LinearModel m;
  m.spec = poly_spec(2);
  m.weights = {0.0, 0.0};
  m.intercept = 4.5;
  const auto p = predict(m, {-1.0, 0.0, 2.0});
  EXPECT_EQ(p.values, (std::vector<double>{4.5, 4.5, 4.5}));
  EXPECT_EQ(p.kept_row_indices, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Predict, DropsOutOfDomainInputs) {
  LinearModel m;
  m.spec = product_spec(1, 1);
  m.weights.assign(m.spec.size(), 1.0);
  const auto p = predict(m, {-1.0, 1.0, 2.0});
  EXPECT_EQ(p.kept_row_indices, (std::vector<std::size_t>{1, 2}));
  EXPECT_THROW(predict(m, {-1.0}), EmptyDesign);
}

TEST(AbsoluteError, Basics) {
  EXPECT_EQ(absolute_error({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_EQ(absolute_error({1, 2}, {0, 0}), 3.0);
  EXPECT_THROW(absolute_error({1}, {1, 2}), InvalidArgument);
  EXPECT_THROW(absolute_error({}, {}), InvalidArgument);
}

TEST(AbsoluteError, MetricProperties) {
  Rng rng(5);
  for (int k = 0; k < 200; ++k) {
    const auto n = static_cast<std::size_t>(rng.between(1, 20));
    std::vector<double> a(n), b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform(-10, 10);
      b[i] = rng.uniform(-10, 10);
      c[i] = rng.uniform(-10, 10);
    }
    EXPECT_GE(absolute_error(a, b), 0.0);
    EXPECT_GT(absolute_error(a, b), 0.0);
    EXPECT_LE(std::abs(absolute_error(a, c) - absolute_error(b, c)), absolute_error(a, b) + 1e-12);
  }
}

TEST(Split, SizesDeterminismAndUnion) {
  Dataset d;
  for (int i = 0; i < 10; ++i) {
    d.xs.push_back(i * 0.5);
    d.ys.push_back(i * i);
  }
  const auto s = train_test_split(d, 0.2, 99);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.test.size(), 2u);
  const auto again = train_test_split(d, 0.2, 99);
  EXPECT_EQ(s.test.xs, again.test.xs);
  EXPECT_EQ(s.train.xs, again.train.xs);

  std::vector<std::pair<double, double>> all;
  for (std::size_t i = 0; i < s.train.size(); ++i) all.emplace_back(s.train.xs[i], s.train.ys[i]);
  for (std::size_t i = 0; i < s.test.size(); ++i) all.emplace_back(s.test.xs[i], s.test.ys[i]);
  std::ranges::sort(all);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(all[i].first, d.xs[i]);
    EXPECT_EQ(all[i].second, d.ys[i]);
  }
  EXPECT_THROW(train_test_split(d, 0.0, 1), InvalidArgument);
  EXPECT_THROW(train_test_split(d, 1.0, 1), InvalidArgument);
  EXPECT_THROW(train_test_split(Dataset{{1.0}, {1.0}}, 0.5, 1), InvalidArgument);
}

TEST(Split, DifferentSeedsUsuallyDiffer) {
  Dataset d;
  for (int i = 0; i < 100; ++i) {
    d.xs.push_back(i);
    d.ys.push_back(0);
  }
  EXPECT_NE(train_test_split(d, 0.2, 1).test.xs, train_test_split(d, 0.2, 2).test.xs);
}

TEST(Polynomial, RecoversQuadratic) {
  Dataset d;
  for (int i = -20; i <= 20; ++i) {
    const double x = i * 0.1;
    d.xs.push_back(x);
    d.ys.push_back(3 * x * x + 1);
  }
  const auto m = fit_polynomial(d, 2);
  EXPECT_NEAR(m.weights[0], 0.0, 1e-10);
  EXPECT_NEAR(m.weights[1], 3.0, 1e-10);
  EXPECT_NEAR(m.intercept, 1.0, 1e-10);
}

TEST(Polynomial, DegreeOneIsPlainLinear) {
  Dataset d{{0, 1, 2, 3}, {1, 3, 2, 5}};
  const auto a = fit_polynomial(d, 1);
  const auto b = fit_spec(d, linear_spec());
  EXPECT_NEAR(a.weights[0], b.weights[0], 1e-14);
  EXPECT_NEAR(a.intercept, b.intercept, 1e-14);
}

TEST(Comparison, TrigTargetTrigBeatsPolynomialByOrdersOfMagnitude) {
  const auto c = run_comparison(trig_target(), -kPi, kPi, 0.01, {trig_spec(), poly_spec(2), linear_spec()}, {.seed = 1});
  ASSERT_EQ(c.reports.size(), 3u);
  EXPECT_LE(c.reports[0].test_abs_error, 1e-6);
  EXPECT_GE(c.reports[1].test_abs_error, 1e3);
  EXPECT_GE(c.reports[2].test_abs_error, 1e3);
  EXPECT_EQ(c.reports[0].n_train + c.reports[0].n_test, 629u);
  EXPECT_EQ(c.reports[0].dropped_rows, 0u);
  EXPECT_FALSE(c.reports[0].ridge_fallback);
}

TEST(Comparison, TrigSpecFitsAnyGeneratedTrigFunction) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto e = gen_trig_function(seed, 1 + static_cast<int>(seed % 8));
    const auto c = run_comparison(e, -kPi, kPi, 0.01, {trig_spec()}, {.seed = seed});
    EXPECT_LE(c.reports[0].test_abs_error, 1e-6) << format_expression(e);
  }
}

TEST(Comparison, MixedTargetProductBeatsPolynomial) {
  const auto c = run_comparison(mixed_target(), -kPi, kPi, 0.01, {product_spec(2, 6), poly_spec(2)}, {.seed = 1});
  ASSERT_EQ(c.reports.size(), 2u);
  EXPECT_TRUE(c.reports[0].ridge_fallback);
  EXPECT_LT(c.reports[0].test_abs_error, 1e-6 * c.reports[1].test_abs_error);
}

TEST(Comparison, EmptySpecListGivesNoReports) {
  EXPECT_TRUE(run_comparison(trig_target(), -kPi, kPi, 0.01, {}).reports.empty());
}

TEST(Comparison, RankDeficiencyWithoutFallbackPropagates) {
  EXPECT_THROW(run_comparison(mixed_target(), -kPi, kPi, 0.01, {product_spec(2, 6)}, {.seed = 1, .fallback_ridge = 0.0}),
               RankDeficiency);
}

TEST(Report, JsonAndCsvShapes) {
  const auto c = run_comparison(trig_target(), -kPi, kPi, 0.01, {trig_spec()}, {.seed = 4});
  const auto j = to_json(c.reports[0]);
  for (const char* key : {"spec_name", "train_abs_error", "test_abs_error", "n_train", "n_test", "dropped_rows",
                          "seed", "ridge"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["spec_name"], "trig");
  EXPECT_EQ(j["seed"], 4);
  std::ostringstream out;
  write_error_table_csv(c.reports, out);
  const auto text = out.str();
  EXPECT_EQ(text.substr(0, text.find(',')), "spec_name");
  EXPECT_NE(text.find("\ntrig,"), std::string::npos);
}
