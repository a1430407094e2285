#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "trigfit/error.hpp"

namespace trigfit {

/// Column-major dense matrix, just enough for the least-squares solver.
struct ColMajor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  ColMajor() = default;
  ColMajor(std::size_t m, std::size_t n) : rows(m), cols(n), data(m * n, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[j * rows + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data[j * rows + i]; }
  std::span<double> col(std::size_t j) { return {data.data() + j * rows, rows}; }
  std::span<const double> col(std::size_t j) const { return {data.data() + j * rows, rows}; }
};

struct QrSolution {
  std::vector<double> x;
  std::size_t rank = 0;
  /// Columns left out of the leading triangle (numerically dependent).
  std::vector<std::size_t> dependent;
  /// |R(0,0)| / |R(rank-1,rank-1)| of the column-equilibrated factor.
  double condition_estimate = 1.0;
};

/// Least-squares solve of min |A x - b| by Householder QR with column
/// pivoting on the column-equilibrated matrix.
///
/// Columns are scaled to unit norm first, which leaves the minimizer
/// unchanged. A pivot is counted in the rank when |R(k,k)| exceeds
/// `rcond * |R(0,0)|`; rcond <= 0 selects max(m, n) * eps. Components of x
/// past the rank are set to zero (basic solution).
inline QrSolution solve_qr(ColMajor a, std::vector<double> b, double rcond = 0.0) {
  const std::size_t m = a.rows;
  const std::size_t n = a.cols;
  if (b.size() != m) throw InvalidArgument("solve_qr: right-hand side length mismatch");
  if (rcond <= 0.0) rcond = static_cast<double>(std::max(m, n)) * std::numeric_limits<double>::epsilon();

  std::vector<double> scale(n, 1.0);
  std::vector<double> norm2(n), norm2_ref(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto c = a.col(j);
    const double s = std::sqrt(std::inner_product(c.begin(), c.end(), c.begin(), 0.0));
    if (s > 0.0 && std::isfinite(s)) {
      scale[j] = s;
      for (double& v : c) v /= s;
    }
    norm2[j] = norm2_ref[j] = std::inner_product(c.begin(), c.end(), c.begin(), 0.0);
  }

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  const std::size_t steps = std::min(m, n);
  std::vector<double> diag(steps, 0.0);
  std::vector<double> v(m);

  for (std::size_t k = 0; k < steps; ++k) {
    std::size_t p = k;
    for (std::size_t j = k + 1; j < n; ++j)
      if (norm2[j] > norm2[p]) p = j;
    if (p != k) {
      std::swap_ranges(a.col(k).begin(), a.col(k).end(), a.col(p).begin());
      std::swap(perm[k], perm[p]);
      std::swap(norm2[k], norm2[p]);
      std::swap(norm2_ref[k], norm2_ref[p]);
    }

    auto ck = a.col(k);
    double sigma = 0.0;
    for (std::size_t i = k; i < m; ++i) sigma += ck[i] * ck[i];
    const double xnorm = std::sqrt(sigma);
    if (xnorm == 0.0) {
      diag[k] = 0.0;
      continue;
    }
    const double alpha = ck[k] > 0.0 ? -xnorm : xnorm;
    for (std::size_t i = k; i < m; ++i) v[i] = ck[i];
    v[k] -= alpha;
    double vtv = 0.0;
    for (std::size_t i = k; i < m; ++i) vtv += v[i] * v[i];
    diag[k] = alpha;
    ck[k] = alpha;
    for (std::size_t i = k + 1; i < m; ++i) ck[i] = 0.0;
    if (vtv == 0.0) continue;

    for (std::size_t j = k + 1; j < n; ++j) {
      auto cj = a.col(j);
      double dot = 0.0;
      for (std::size_t i = k; i < m; ++i) dot += v[i] * cj[i];
      const double tau = 2.0 * dot / vtv;
      for (std::size_t i = k; i < m; ++i) cj[i] -= tau * v[i];
      // Downdate the remaining norm; recompute when cancellation bites.
      norm2[j] -= cj[k] * cj[k];
      if (norm2[j] <= 1e-8 * norm2_ref[j]) {
        double s = 0.0;
        for (std::size_t i = k + 1; i < m; ++i) s += cj[i] * cj[i];
        norm2[j] = norm2_ref[j] = s;
      }
    }
    double dot = 0.0;
    for (std::size_t i = k; i < m; ++i) dot += v[i] * b[i];
    const double tau = 2.0 * dot / vtv;
    for (std::size_t i = k; i < m; ++i) b[i] -= tau * v[i];
  }

  QrSolution sol;
  const double top = steps ? std::abs(diag[0]) : 0.0;
  while (sol.rank < steps && top > 0.0 && std::abs(diag[sol.rank]) > rcond * top) ++sol.rank;
  for (std::size_t k = sol.rank; k < n; ++k) sol.dependent.push_back(perm[k]);
  if (sol.rank > 0) sol.condition_estimate = top / std::abs(diag[sol.rank - 1]);

  std::vector<double> z(sol.rank, 0.0);
  for (std::size_t kk = sol.rank; kk-- > 0;) {
    double s = b[kk];
    for (std::size_t j = kk + 1; j < sol.rank; ++j) s -= a(kk, j) * z[j];
    z[kk] = s / a(kk, kk);
  }
  sol.x.assign(n, 0.0);
  for (std::size_t k = 0; k < sol.rank; ++k) sol.x[perm[k]] = z[k] / scale[perm[k]];
  return sol;
}

}  // namespace trigfit
