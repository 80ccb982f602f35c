#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "patchcomp/landscape.hpp"

namespace patchcomp {

/// Square tridiagonal matrix. lower[j] = A(j, j-1) (lower[0] unused),
/// upper[j] = A(j, j+1) (upper[n-1] unused).
struct Tridiagonal {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;

  Tridiagonal() = default;
  explicit Tridiagonal(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}

  std::size_t size() const { return diag.size(); }

  std::vector<double> apply(std::span<const double> x) const {
    const std::size_t n = size();
    std::vector<double> y(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double s = diag[j] * x[j];
      if (j > 0) s += lower[j] * x[j - 1];
      if (j + 1 < n) s += upper[j] * x[j + 1];
      y[j] = s;
    }
    return y;
  }

  /// Max absolute row sum.
  double inf_norm() const {
    double m = 0.0;
    for (std::size_t j = 0; j < size(); ++j) {
      double s = std::abs(diag[j]);
      if (j > 0) s += std::abs(lower[j]);
      if (j + 1 < size()) s += std::abs(upper[j]);
      m = std::max(m, s);
    }
    return m;
  }

  /// alpha * this + beta * I
  Tridiagonal scaled_shift(double alpha, double beta) const {
    Tridiagonal t(*this);
    for (std::size_t j = 0; j < size(); ++j) {
      t.lower[j] *= alpha;
      t.upper[j] *= alpha;
      t.diag[j] = alpha * t.diag[j] + beta;
    }
    return t;
  }
};

/// Thomas algorithm without pivoting. Throws NumericalError on a zero pivot.
inline std::vector<double> solve_tridiagonal(const Tridiagonal& a, std::span<const double> rhs) {
  const std::size_t n = a.size();
  std::vector<double> c(n, 0.0), x(rhs.begin(), rhs.end());
  double pivot = a.diag[0];
  if (pivot == 0.0 || !std::isfinite(pivot)) throw NumericalError("tridiagonal solve: zero pivot at row 0");
  c[0] = n > 1 ? a.upper[0] / pivot : 0.0;
  x[0] /= pivot;
  for (std::size_t j = 1; j < n; ++j) {
    pivot = a.diag[j] - a.lower[j] * c[j - 1];
    if (pivot == 0.0 || !std::isfinite(pivot)) {
      throw NumericalError("tridiagonal solve: zero pivot at row " + std::to_string(j));
    }
    c[j] = j + 1 < n ? a.upper[j] / pivot : 0.0;
    x[j] = (x[j] - a.lower[j] * x[j - 1]) / pivot;
  }
  for (std::size_t j = n - 1; j-- > 0;) x[j] -= c[j] * x[j + 1];
  return x;
}

/// Symmetric tridiagonal matrix: diagonal a, off-diagonal b (b[j] couples j and j+1).
struct SymTridiagonal {
  std::vector<double> a;
  std::vector<double> b;

  std::size_t size() const { return a.size(); }

  /// Number of eigenvalues strictly less than x (Sturm sequence via LDL^T pivots).
  std::size_t count_below(double x) const {
    const double tiny = std::numeric_limits<double>::min();
    std::size_t count = 0;
    double q = a[0] - x;
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
    for (std::size_t j = 1; j < a.size(); ++j) {
      q = a[j] - x - b[j - 1] * b[j - 1] / q;
      if (q == 0.0) q = -tiny;
      if (q < 0.0) ++count;
    }
    return count;
  }

  /// Gershgorin interval containing the spectrum.
  std::pair<double, double> gershgorin() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t j = 0; j < a.size(); ++j) {
      double r = 0.0;
      if (j > 0) r += std::abs(b[j - 1]);
      if (j + 1 < a.size()) r += std::abs(b[j]);
      lo = std::min(lo, a[j] - r);
      hi = std::max(hi, a[j] + r);
    }
    return {lo, hi};
  }

  Tridiagonal as_tridiagonal() const {
    Tridiagonal t(size());
    t.diag = a;
    for (std::size_t j = 0; j + 1 < size(); ++j) {
      t.upper[j] = b[j];
      t.lower[j + 1] = b[j];
    }
    return t;
  }
};

/// Bracket [lo, hi] of the m-th largest eigenvalue (m = 0 is the largest),
/// refined by bisection until the width is a few ulps of the spectral radius.
inline std::pair<double, double> bisect_eigenvalue_from_top(const SymTridiagonal& s, std::size_t m) {
  auto [lo, hi] = s.gershgorin();
  const std::size_t n = s.size();
  const std::size_t below = n - m;  // eigenvalues strictly below a point just above the target
  const double scale = std::max(std::abs(lo), std::abs(hi));
  hi += 1e-12 * scale + std::numeric_limits<double>::min();
  lo -= 1e-12 * scale + std::numeric_limits<double>::min();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (s.count_below(mid) >= below) hi = mid;
    else lo = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * scale) break;
  }
  return {lo, hi};
}

inline std::pair<double, double> bisect_largest_eigenvalue(const SymTridiagonal& s) {
  return bisect_eigenvalue_from_top(s, 0);
}

}  // namespace patchcomp
