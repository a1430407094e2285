#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "trigfit/csv.hpp"
#include "trigfit/error.hpp"
#include "trigfit/expression.hpp"

namespace trigfit {

/// A product of base features with powers of x merged: x^p * sin^a * cos^b *
/// tan^c * log^d * exp^e. Defines one design-matrix column.
struct Monomial {
  static constexpr std::array<BaseFeature::Kind, 5> kFunctionKinds = {
      BaseFeature::Kind::Sin, BaseFeature::Kind::Cos, BaseFeature::Kind::Tan, BaseFeature::Kind::Log,
      BaseFeature::Kind::Exp};

  int x_power = 0;
  std::array<int, 5> counts{};  // indexed like kFunctionKinds

  friend auto operator<=>(const Monomial&, const Monomial&) = default;

  /// Canonical form of an arbitrary factor multiset.
  static Monomial from_factors(const std::vector<BaseFeature>& factors) {
    Monomial m;
    for (const auto& f : factors) {
      if (f.kind == BaseFeature::Kind::XPow) {
        m.x_power += f.power;
      } else {
        for (std::size_t i = 0; i < kFunctionKinds.size(); ++i)
          if (kFunctionKinds[i] == f.kind) ++m.counts[i];
      }
    }
    return m;
  }

  int order() const {
    int n = x_power;
    for (int c : counts) n += c;
    return n;
  }

  /// x^p first, then each function repeated by its count.
  std::vector<BaseFeature> factors() const {
    std::vector<BaseFeature> fs;
    if (x_power > 0) fs.push_back(BaseFeature::x_pow(x_power));
    for (std::size_t i = 0; i < kFunctionKinds.size(); ++i)
      for (int r = 0; r < counts[i]; ++r) fs.push_back({kFunctionKinds[i], 1});
    return fs;
  }

  Term as_term() const { return {1.0, factors()}; }

  std::string name() const { return format_term(as_term()); }
};

struct FeatureSpec {
  std::string name;
  std::vector<Monomial> features;
  bool include_bias = true;

  std::size_t size() const { return features.size(); }

  std::vector<std::string> column_names() const {
    std::vector<std::string> names;
    names.reserve(features.size());
    for (const auto& m : features) names.push_back(m.name());
    return names;
  }

  /// Throws if a column appears twice.
  void validate() const {
    std::set<Monomial> seen;
    for (const auto& m : features) {
      if (m.order() == 0) throw InvalidArgument("feature spec contains an empty product");
      if (!seen.insert(m).second) throw InvalidArgument("duplicate feature column " + m.name());
    }
  }
};

inline FeatureSpec trig_spec() {
  FeatureSpec s{"trig", {}, true};
  s.features.push_back(Monomial::from_factors({BaseFeature::sin()}));
  s.features.push_back(Monomial::from_factors({BaseFeature::cos()}));
  s.features.push_back(Monomial::from_factors({BaseFeature::sin(), BaseFeature::cos()}));
  return s;
}

inline FeatureSpec poly_spec(int degree) {
  if (degree < 1) throw InvalidArgument("polynomial degree must be >= 1");
  FeatureSpec s{"poly:" + std::to_string(degree), {}, true};
  for (int k = 1; k <= degree; ++k) s.features.push_back(Monomial::from_factors({BaseFeature::x_pow(k)}));
  return s;
}

/// Plain straight-line regression on x.
inline FeatureSpec linear_spec() {
  auto s = poly_spec(1);
  s.name = "linear";
  return s;
}

/// Every product of 1..max_order factors drawn with repetition from
/// {x, ..., x^degree, sin, cos, tan, log, exp}, merged to canonical form.
/// Ordered by total order (x^k counts k), then by column name.
inline FeatureSpec product_spec(int degree, int max_order) {
  if (degree < 1) throw InvalidArgument("product_spec degree must be >= 1");
  if (max_order < 1) throw InvalidArgument("product_spec max_order must be >= 1");
  std::vector<BaseFeature> pool;
  for (int k = 1; k <= degree; ++k) pool.push_back(BaseFeature::x_pow(k));
  for (auto kind : Monomial::kFunctionKinds) pool.push_back({kind, 1});

  std::set<std::tuple<int, std::string, Monomial>> ordered;
  std::vector<BaseFeature> current;
  // Non-decreasing pool indices enumerate each multiset once.
  auto recurse = [&](auto&& self, std::size_t first) -> void {
    if (!current.empty()) {
      const auto m = Monomial::from_factors(current);
      ordered.emplace(m.order(), m.name(), m);
    }
    if (current.size() == static_cast<std::size_t>(max_order)) return;
    for (std::size_t i = first; i < pool.size(); ++i) {
      current.push_back(pool[i]);
      self(self, i);
      current.pop_back();
    }
  };
  recurse(recurse, 0);

  FeatureSpec s{"product:" + std::to_string(degree) + ":" + std::to_string(max_order), {}, true};
  s.features.reserve(ordered.size());
  for (const auto& entry : ordered) s.features.push_back(std::get<2>(entry));
  return s;
}

struct Dataset {
  std::vector<double> xs;
  std::vector<double> ys;

  std::size_t size() const { return xs.size(); }

  void validate() const {
    if (xs.size() != ys.size()) throw InvalidArgument("dataset xs and ys differ in length");
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
        throw InvalidArgument("dataset has a non-finite value at index " + std::to_string(i));
  }
};

/// Samples x features, row-major. The intercept is not stored as a column;
/// `include_bias` tells the fitter to add one.
struct DesignMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<std::size_t> kept_row_indices;
  std::vector<double> kept_xs;
  std::vector<std::string> column_names;
  bool include_bias = true;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::size_t dropped_rows(std::size_t n_inputs) const { return n_inputs - rows; }
};

/// Evaluates every column of `spec` at every x. Rows with an out-of-domain
/// factor or a non-finite value are dropped and their indices omitted from
/// kept_row_indices.
inline DesignMatrix build_design_matrix(const FeatureSpec& spec, const std::vector<double>& xs,
                                        double guard = kDefaultGuard) {
  if (xs.empty()) throw InvalidArgument("build_design_matrix needs at least one input");
  spec.validate();
  DesignMatrix dm;
  dm.cols = spec.size();
  dm.include_bias = spec.include_bias;
  dm.column_names = spec.column_names();
  std::vector<std::vector<BaseFeature>> factor_lists;
  factor_lists.reserve(spec.size());
  for (const auto& m : spec.features) factor_lists.push_back(m.factors());

  std::vector<double> row(dm.cols);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    bool ok = std::isfinite(x);
    for (std::size_t j = 0; ok && j < dm.cols; ++j) {
      double v = 1.0;
      for (const auto& f : factor_lists[j]) {
        if (!in_guarded_domain(f, x, guard)) {
          ok = false;
          break;
        }
        v *= f.value(x);
      }
      ok = ok && std::isfinite(v);
      row[j] = v;
    }
    if (!ok) continue;
    dm.values.insert(dm.values.end(), row.begin(), row.end());
    dm.kept_row_indices.push_back(i);
    dm.kept_xs.push_back(x);
    ++dm.rows;
  }
  if (dm.rows == 0) throw EmptyDesign("every input was outside the domain of spec '" + spec.name + "'");
  return dm;
}

/// Header "x,<column names>", then one line per kept sample.
inline void write_design_csv(const DesignMatrix& dm, std::ostream& out) {
  out << "x";
  for (const auto& n : dm.column_names) out << ',' << n;
  out << '\n';
  for (std::size_t r = 0; r < dm.rows; ++r) {
    out << csv::num(dm.kept_xs[r]);
    for (std::size_t c = 0; c < dm.cols; ++c) out << ',' << csv::num(dm.at(r, c));
    out << '\n';
  }
}

}  // namespace trigfit
