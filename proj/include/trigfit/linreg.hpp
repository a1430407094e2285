#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "trigfit/csv.hpp"
#include "trigfit/error.hpp"
#include "trigfit/expression.hpp"
#include "trigfit/featurize.hpp"
#include "trigfit/qr.hpp"
#include "trigfit/random.hpp"

namespace trigfit {

struct LinearModel {
  std::vector<double> weights;  // one per spec column
  double intercept = 0.0;
  FeatureSpec spec;
  double ridge = 0.0;
  double condition_estimate = 1.0;
};

/// Minimizes sum (Xw + b - y)^2 + ridge * |w|^2 through an orthogonal
/// factorization; the intercept b is never penalized.
///
/// With ridge = 0 a numerically rank-deficient X raises RankDeficiency
/// listing the dependent columns. With ridge > 0 the penalty rows are
/// appended to X (Tikhonov augmentation) and the system is always solved.
inline LinearModel fit_least_squares(const DesignMatrix& x, const std::vector<double>& y, double ridge = 0.0,
                                     const FeatureSpec* spec = nullptr) {
  if (x.rows == 0) throw InvalidArgument("fit_least_squares needs at least one row");
  if (y.size() != x.rows) throw InvalidArgument("fit_least_squares: target length differs from row count");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw InvalidArgument("ridge must be finite and >= 0");

  const std::size_t p = x.cols;
  const std::size_t n = p + (x.include_bias ? 1 : 0);
  const std::size_t m = x.rows + (ridge > 0.0 ? p : 0);
  ColMajor a(m, n);
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t c = 0; c < p; ++c) a(r, c) = x.at(r, c);
    if (x.include_bias) a(r, p) = 1.0;
  }
  std::vector<double> rhs(m, 0.0);
  std::copy(y.begin(), y.end(), rhs.begin());
  if (ridge > 0.0) {
    const double s = std::sqrt(ridge);
    for (std::size_t c = 0; c < p; ++c) a(x.rows + c, c) = s;
  }

  const double rcond = ridge > 0.0 ? std::numeric_limits<double>::min() : 0.0;
  const auto sol = solve_qr(std::move(a), std::move(rhs), rcond);
  if (sol.rank < n) {
    std::vector<std::string> names;
    for (auto j : sol.dependent) names.push_back(j < p ? x.column_names[j] : std::string("(intercept)"));
    std::string msg = "design matrix is rank deficient (rank " + std::to_string(sol.rank) + " of " +
                      std::to_string(n) + "); dependent columns:";
    for (std::size_t i = 0; i < names.size() && i < 8; ++i) msg += " " + names[i];
    if (names.size() > 8) msg += " ...";
    throw RankDeficiency(msg, std::move(names));
  }

  LinearModel model;
  model.weights.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(p));
  model.intercept = x.include_bias ? sol.x[p] : 0.0;
  model.ridge = ridge;
  model.condition_estimate = sol.condition_estimate;
  if (spec) {
    model.spec = *spec;
  } else {
    model.spec.include_bias = x.include_bias;
    model.spec.name = "custom";
  }
  for (double w : model.weights)
    if (!std::isfinite(w)) throw OverflowError("least-squares weights are not finite");
  return model;
}

/// Xw + b for each row of an already-built design matrix.
inline std::vector<double> apply_model(const LinearModel& model, const DesignMatrix& x) {
  if (x.cols != model.weights.size()) throw InvalidArgument("design matrix does not match model width");
  std::vector<double> out(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) {
    double s = model.intercept;
    for (std::size_t c = 0; c < x.cols; ++c) s += model.weights[c] * x.at(r, c);
    out[r] = s;
  }
  return out;
}

struct Prediction {
  std::vector<double> values;
  std::vector<std::size_t> kept_row_indices;
};

inline Prediction predict(const LinearModel& model, const std::vector<double>& xs, double guard = kDefaultGuard) {
  const auto dm = build_design_matrix(model.spec, xs, guard);
  return {apply_model(model, dm), dm.kept_row_indices};
}

/// Sum of |pred_i - y_i|.
inline double absolute_error(const std::vector<double>& pred, const std::vector<double>& y) {
  if (pred.size() != y.size()) throw InvalidArgument("absolute_error: length mismatch");
  if (pred.empty()) throw InvalidArgument("absolute_error: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - y[i]);
  return s;
}

struct Split {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_indices;  // positions in the source dataset
  std::vector<std::size_t> test_indices;
};

/// Seeded shuffle, then the first round(n * test_fraction) shuffled samples
/// form the test set (clamped to 1..n-1). Each part keeps original order.
inline Split train_test_split(const Dataset& d, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidArgument("test_fraction must lie in (0, 1)");
  d.validate();
  const std::size_t n = d.size();
  if (n < 2) throw InvalidArgument("train_test_split needs at least 2 samples");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  shuffle(std::span<std::size_t>(idx), rng);
  auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  std::vector<std::size_t> test_idx(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train_idx(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  std::ranges::sort(test_idx);
  std::ranges::sort(train_idx);
  Split s;
  s.train_indices = train_idx;
  s.test_indices = test_idx;
  for (auto i : train_idx) {
    s.train.xs.push_back(d.xs[i]);
    s.train.ys.push_back(d.ys[i]);
  }
  for (auto i : test_idx) {
    s.test.xs.push_back(d.xs[i]);
    s.test.ys.push_back(d.ys[i]);
  }
  return s;
}

/// Fit `spec` to the samples of `d` that fall inside the spec's domain.
inline LinearModel fit_spec(const Dataset& d, const FeatureSpec& spec, double ridge = 0.0,
                            double guard = kDefaultGuard) {
  d.validate();
  const auto dm = build_design_matrix(spec, d.xs, guard);
  std::vector<double> y;
  y.reserve(dm.rows);
  for (auto i : dm.kept_row_indices) y.push_back(d.ys[i]);
  return fit_least_squares(dm, y, ridge, &spec);
}

inline LinearModel fit_polynomial(const Dataset& d, int degree, double ridge = 0.0) {
  return fit_spec(d, poly_spec(degree), ridge);
}

struct FitReport {
  std::string spec_name;
  double train_abs_error = 0.0;
  double test_abs_error = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t dropped_rows = 0;
  double condition_estimate = 1.0;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  double ridge = 0.0;
  bool ridge_fallback = false;  // ridge was raised after a rank-deficient attempt
  bool intercept = true;
  std::string error_metric = "sum_abs";
};

struct ComparisonOptions {
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  double guard = kDefaultGuard;
  double ridge = 0.0;
  /// Ridge used for a second attempt after RankDeficiency; 0 disables the retry.
  double fallback_ridge = 1e-10;
};

struct Comparison {
  Dataset data;
  Split split;
  std::vector<FitReport> reports;
  std::vector<LinearModel> models;
};

/// Samples `expr` on the guarded grid of [lower, upper].
inline Dataset sample_expression(const Expression& expr, double lower, double upper, double step,
                                 double guard = kDefaultGuard) {
  const auto domain = domain_of(expr, lower, upper, guard);
  Dataset d;
  d.xs = make_grid(domain, lower, upper, step);
  if (d.xs.empty()) throw DomainError("no grid point lies inside the guarded domain");
  d.ys.reserve(d.xs.size());
  for (double x : d.xs) d.ys.push_back(eval_expression(expr, x, guard));
  return d;
}

/// Fits each spec on the same training split and scores it on the same test
/// split. The absolute error is the sum over samples.
inline Comparison run_comparison(const Expression& expr, double lower, double upper, double step,
                                 const std::vector<FeatureSpec>& specs, const ComparisonOptions& opt = {}) {
  Comparison out;
  out.data = sample_expression(expr, lower, upper, step, opt.guard);
  if (specs.empty()) return out;
  out.split = train_test_split(out.data, opt.test_fraction, opt.seed);
  const auto& train = out.split.train;
  const auto& test = out.split.test;

  for (const auto& spec : specs) {
    const auto dm_train = build_design_matrix(spec, train.xs, opt.guard);
    std::vector<double> y_train;
    for (auto i : dm_train.kept_row_indices) y_train.push_back(train.ys[i]);

    FitReport rep;
    rep.spec_name = spec.name;
    rep.seed = opt.seed;
    rep.test_fraction = opt.test_fraction;
    rep.intercept = spec.include_bias;
    LinearModel model;
    try {
      model = fit_least_squares(dm_train, y_train, opt.ridge, &spec);
    } catch (const RankDeficiency&) {
      if (!(opt.fallback_ridge > 0.0) || opt.ridge >= opt.fallback_ridge) throw;
      model = fit_least_squares(dm_train, y_train, opt.fallback_ridge, &spec);
      rep.ridge_fallback = true;
    }
    rep.ridge = model.ridge;
    rep.condition_estimate = model.condition_estimate;
    rep.n_train = dm_train.rows;
    rep.train_abs_error = absolute_error(apply_model(model, dm_train), y_train);

    const auto dm_test = build_design_matrix(spec, test.xs, opt.guard);
    std::vector<double> y_test;
    for (auto i : dm_test.kept_row_indices) y_test.push_back(test.ys[i]);
    rep.n_test = dm_test.rows;
    rep.test_abs_error = absolute_error(apply_model(model, dm_test), y_test);
    rep.dropped_rows = (train.size() - dm_train.rows) + (test.size() - dm_test.rows);

    out.reports.push_back(rep);
    out.models.push_back(std::move(model));
  }
  return out;
}

/// One row per spec, shaped like a classic "algorithm vs absolute error" table.
inline void write_error_table_csv(const std::vector<FitReport>& reports, std::ostream& out) {
  out << "spec_name,test_abs_error,train_abs_error,n_train,n_test,dropped_rows,seed,test_fraction,ridge,"
         "ridge_fallback,intercept,condition_estimate\n";
  for (const auto& r : reports) {
    out << r.spec_name << ',' << csv::num(r.test_abs_error) << ',' << csv::num(r.train_abs_error) << ',' << r.n_train
        << ',' << r.n_test << ',' << r.dropped_rows << ',' << r.seed << ',' << csv::num(r.test_fraction) << ','
        << csv::num(r.ridge) << ',' << (r.ridge_fallback ? 1 : 0) << ',' << (r.intercept ? 1 : 0) << ','
        << csv::num(r.condition_estimate) << '\n';
  }
}

}  // namespace trigfit
