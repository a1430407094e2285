#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include "test_support.hpp"
#include "trigfit/featurize.hpp"

using namespace trigfit;

constexpr double kPi = std::numbers::pi;

namespace {

// Brute force: every ordered tuple of pool indices of length 1..max_order,
// reduced to (total x power, count of each function kind).
std::size_t brute_force_product_count(int degree, int max_order) {
  const int pool = degree + 5;
  std::set<std::vector<int>> seen;
  std::vector<int> tuple;
  std::function<void()> rec = [&] {
    if (!tuple.empty()) {
      std::vector<int> key(6, 0);
      for (int i : tuple) {
        if (i < degree)
          key[0] += i + 1;
        else
          ++key[static_cast<std::size_t>(i - degree + 1)];
      }
      seen.insert(key);
    }
    if (static_cast<int>(tuple.size()) == max_order) return;
    for (int i = 0; i < pool; ++i) {
      tuple.push_back(i);
      rec();
      tuple.pop_back();
    }
  };
  rec();
  return seen.size();
}

}  // namespace

TEST(TrigSpec, ColumnsAndRows) {
  const auto s = trig_spec();
  EXPECT_EQ(s.size(), 3u);
  EXPECT_TRUE(s.include_bias);
  EXPECT_EQ(s.column_names(), (std::vector<std::string>{"sin(x)", "cos(x)", "sin(x)*cos(x)"}));
  const auto dm = build_design_matrix(s, {0.0, kPi / 2});
  ASSERT_EQ(dm.rows, 2u);
  EXPECT_NEAR(dm.at(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(dm.at(0, 1), 1.0, 1e-15);
  EXPECT_NEAR(dm.at(0, 2), 0.0, 1e-15);
  EXPECT_NEAR(dm.at(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(dm.at(1, 1), 0.0, 1e-15);
  EXPECT_NEAR(dm.at(1, 2), 0.0, 1e-15);
  EXPECT_EQ(dm.kept_row_indices, (std::vector<std::size_t>{0, 1}));
}

TEST(PolySpec, Columns) {
  EXPECT_EQ(poly_spec(2).column_names(), (std::vector<std::string>{"x", "x^2"}));
  EXPECT_EQ(poly_spec(1).column_names(), (std::vector<std::string>{"x"}));
  const auto dm = build_design_matrix(poly_spec(3), {2.0});
  EXPECT_EQ(dm.at(0, 0), 2.0);
  EXPECT_EQ(dm.at(0, 1), 4.0);
  EXPECT_EQ(dm.at(0, 2), 8.0);
  EXPECT_THROW(poly_spec(0), InvalidArgument);
}

TEST(ProductSpec, SingletonsEqualPool) {
  const auto s = product_spec(2, 1);
  EXPECT_EQ(s.size(), 7u);
  EXPECT_EQ(s.name, "product:2:1");
}

TEST(ProductSpec, DegreeOneOrderTwo) {
  // 6 singletons + 21 pairs; x*x becomes the new column x^2.
  const auto s = product_spec(1, 2);
  EXPECT_EQ(s.size(), brute_force_product_count(1, 2));
  EXPECT_EQ(s.size(), 27u);
  const auto names = s.column_names();
  EXPECT_NE(std::find(names.begin(), names.end(), "x^2"), names.end());
}

TEST(ProductSpec, CountMatchesBruteForce) {
  for (int degree = 1; degree <= 3; ++degree)
    for (int order = 1; order <= 4; ++order)
      EXPECT_EQ(product_spec(degree, order).size(), brute_force_product_count(degree, order))
          << "degree " << degree << " order " << order;
}

TEST(ProductSpec, UniqueStableAndOrdered) {
  const auto a = product_spec(2, 4);
  const auto b = product_spec(2, 4);
  EXPECT_EQ(a.column_names(), b.column_names());
  EXPECT_NO_THROW(a.validate());
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_LE(a.features[i - 1].order(), a.features[i].order());
  EXPECT_THROW(product_spec(0, 2), InvalidArgument);
  EXPECT_THROW(product_spec(2, 0), InvalidArgument);
}

TEST(ProductSpec, ContainsMixedTargetTerm) {
  // x^4 e^x tan x needs six factors when the pool only has x.
  const auto target = Monomial::from_factors(parse_expression("x^4*exp(x)*tan(x)").terms[0].factors);
  const auto s6 = product_spec(1, 6);
  EXPECT_NE(std::find(s6.features.begin(), s6.features.end(), target), s6.features.end());
  const auto s5 = product_spec(1, 5);
  EXPECT_EQ(std::find(s5.features.begin(), s5.features.end(), target), s5.features.end());
  // Every term of the mixed target is a column of product_spec(2, 6).
  const auto s = product_spec(2, 6);
  for (const auto& t : trigfit::testing::mixed_target().terms) {
    const auto m = Monomial::from_factors(t.factors);
    EXPECT_NE(std::find(s.features.begin(), s.features.end(), m), s.features.end()) << m.name();
  }
}

TEST(DesignMatrix, DropsOutOfDomainRows) {
  const auto dm = build_design_matrix(product_spec(2, 1), {-1.0, 1.0});
  EXPECT_EQ(dm.rows, 1u);
  EXPECT_EQ(dm.kept_row_indices, (std::vector<std::size_t>{1}));
  EXPECT_EQ(dm.kept_xs, (std::vector<double>{1.0}));
  EXPECT_EQ(dm.dropped_rows(2), 1u);
  EXPECT_THROW(build_design_matrix(product_spec(2, 1), {-1.0, -2.0}), EmptyDesign);
  EXPECT_THROW(build_design_matrix(trig_spec(), {}), InvalidArgument);
}

TEST(DesignMatrix, AllValidKeepsEverything) {
  std::vector<double> xs;
  for (int i = 0; i < 50; ++i) xs.push_back(-3.0 + 0.1 * i);
  const auto dm = build_design_matrix(poly_spec(4), xs);
  EXPECT_EQ(dm.rows, xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_EQ(dm.kept_row_indices[i], i);
}

TEST(DesignMatrix, ColumnsMatchSingleTermExpressions) {
  const auto spec = product_spec(2, 3);
  std::vector<double> xs;
  for (int i = 0; i < 300; ++i) xs.push_back(-3.1 + 0.0207 * i);
  const auto dm = build_design_matrix(spec, xs);
  for (std::size_t r = 0; r < dm.rows; ++r) {
    for (std::size_t c = 0; c < dm.cols; ++c) {
      const Expression single{{spec.features[c].as_term()}};
      const double want = eval_expression(single, dm.kept_xs[r]);
      ASSERT_TRUE(std::isfinite(dm.at(r, c)));
      ASSERT_LE(std::abs(dm.at(r, c) - want), 1e-12 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST(DesignMatrix, NeverEmitsNonFinite) {
  const auto dm = build_design_matrix(product_spec(1, 4), {-0.5, 0.0, 1e-300, kPi / 2, 400.0, 2.0});
  for (double v : dm.values) EXPECT_TRUE(std::isfinite(v));
  EXPECT_EQ(dm.kept_xs, (std::vector<double>{2.0}));
}

TEST(DesignMatrix, CsvExport) {
  const auto dm = build_design_matrix(poly_spec(2), {1.0, 3.0});
  std::ostringstream out;
  write_design_csv(dm, out);
  EXPECT_EQ(out.str(), "x,x,x^2\n1,1,1\n3,3,9\n");
}
