#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "trigfit/error.hpp"
#include "trigfit/expression.hpp"
#include "trigfit/random.hpp"

namespace trigfit {

/// Factor choices for pure trigonometric terms: sin, cos and sin*cos.
inline std::vector<std::vector<BaseFeature>> trig_term_pool() {
  return {{BaseFeature::sin()}, {BaseFeature::cos()}, {BaseFeature::sin(), BaseFeature::cos()}};
}

/// Feature pool for mixed terms: x, x^2, ..., x^degree, cos, sin, tan, log, exp.
inline std::vector<BaseFeature> mixed_feature_pool(int degree) {
  if (degree < 1) throw InvalidArgument("degree must be >= 1");
  std::vector<BaseFeature> pool;
  for (int k = 1; k <= degree; ++k) pool.push_back(BaseFeature::x_pow(k));
  for (auto f : {BaseFeature::cos(), BaseFeature::sin(), BaseFeature::tan(), BaseFeature::log(), BaseFeature::exp()})
    pool.push_back(f);
  return pool;
}

/// Random trigonometric sum with `n_terms` terms.
///
/// Per term, in this order: coefficient uniform in {0..99}, then one of
/// sin / cos / sin*cos uniformly.
template <UniformSource S>
Expression gen_trig_function(S& source, int n_terms) {
  if (n_terms < 1) throw InvalidArgument("n_terms must be >= 1");
  const auto pool = trig_term_pool();
  Expression e;
  e.terms.reserve(static_cast<std::size_t>(n_terms));
  for (int i = 0; i < n_terms; ++i) {
    const auto coef = static_cast<double>(source.below(100));
    const auto& factors = pool[static_cast<std::size_t>(source.below(pool.size()))];
    e.terms.push_back({coef, factors});
  }
  return e;
}

inline Expression gen_trig_function(std::uint64_t seed, int n_terms) {
  Rng rng(seed);
  return gen_trig_function(rng, n_terms);
}

/// Random product-of-features sum.
///
/// Draw order: term count uniform in {1..max_terms}; then per term a factor
/// count uniform in {1..pool size} followed by that many factors drawn with
/// replacement. Coefficients are all 1.
template <UniformSource S>
Expression gen_mixed_function(S& source, int max_terms, int degree) {
  if (max_terms < 1) throw InvalidArgument("max_terms must be >= 1");
  const auto pool = mixed_feature_pool(degree);
  const auto n_terms = source.below(static_cast<std::uint64_t>(max_terms)) + 1;
  Expression e;
  for (std::uint64_t t = 0; t < n_terms; ++t) {
    const auto n_factors = source.below(pool.size()) + 1;
    Term term;
    for (std::uint64_t j = 0; j < n_factors; ++j) term.factors.push_back(pool[source.below(pool.size())]);
    e.terms.push_back(std::move(term));
  }
  return e;
}

inline Expression gen_mixed_function(std::uint64_t seed, int max_terms, int degree) {
  Rng rng(seed);
  return gen_mixed_function(rng, max_terms, degree);
}

}  // namespace trigfit
