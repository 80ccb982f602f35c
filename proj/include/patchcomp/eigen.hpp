#pragma once

// Principal eigenpair of the linearized invasion operator
// d_i phi_xx + c(x) phi = lambda phi with the mutant's interface conditions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include "patchcomp/diffusion.hpp"
#include "patchcomp/steady.hpp"

namespace patchcomp {

struct EigenConfig {
  double sign_tol = 1e-8;
  int max_iterations = 100;

  void validate(const std::string& path = "eigen") const {
    if (!(sign_tol > 0.0)) throw ValidationError(path + ".sign_tol: must be positive");
    if (max_iterations < 1) throw ValidationError(path + ".max_iterations: must be at least 1");
  }
  bool operator==(const EigenConfig&) const = default;
};

struct EigenPair {
  double lambda1 = 0.0;
  PiecewiseField phi;       // max phi = 1
  double residual = 0.0;    // ||A phi - lambda1 phi||_inf on reduced unknowns
  double gap = 0.0;         // lambda1 - lambda2 (symmetric route only)
  int iterations = 0;
};

enum class Sign { Negative, Neutral, Positive };

inline Sign sign_of(double lambda, double tol) {
  if (lambda > tol) return Sign::Positive;
  if (lambda < -tol) return Sign::Negative;
  return Sign::Neutral;
}

inline const char* to_string(Sign s) {
  switch (s) {
    case Sign::Negative: return "negative";
    case Sign::Neutral: return "neutral";
    case Sign::Positive: return "positive";
  }
  return "neutral";
}

namespace detail {

inline EigenPair finish_eigenpair(const LinearOperator& op, std::vector<double> y, double lambda, int iterations) {
  double ymax = 0.0;
  for (double v : y) ymax = std::max(ymax, std::abs(v));
  if (ymax == 0.0 || !std::isfinite(ymax)) throw NumericalError("eigen solve: iteration produced no vector");
  // Fix the sign so that the largest-magnitude entry is positive.
  double big = 0.0;
  for (double v : y)
    if (std::abs(v) > std::abs(big)) big = v;
  for (double& v : y) v /= big;

  EigenPair e;
  e.lambda1 = lambda;
  e.iterations = iterations;
  const auto ay = op.matrix().apply(y);
  for (std::size_t r = 0; r < y.size(); ++r) e.residual = std::max(e.residual, std::abs(ay[r] - lambda * y[r]));
  e.phi = op.expand(y);
  const double mx = e.phi.max();
  for (double& v : e.phi.values()) v /= mx;
  e.residual /= mx;
  if (!(e.phi.min() > 0.0)) {
    throw NumericalError("principal eigenpair not isolated at this resolution; refine grid");
  }
  return e;
}

}  // namespace detail

/// Largest eigenvalue of the operator and its positive eigenfunction, via the
/// weight similarity to a symmetric tridiagonal matrix: Sturm bisection
/// brackets lambda1, shifted inverse iteration just above the bracket
/// extracts the vector, and lambda1 is reported as the energy-form Rayleigh
/// quotient of that vector.
inline EigenPair principal_eigenpair(const LinearOperator& op, const EigenConfig& config = {}) {
  config.validate();
  const SymTridiagonal s = op.symmetrized();
  const std::size_t n = s.size();
  const auto [glo, ghi] = s.gershgorin();
  const double scale = std::max({std::abs(glo), std::abs(ghi), std::numeric_limits<double>::min()});
  const auto [lo, hi] = bisect_largest_eigenvalue(s);
  const double sigma = hi + 1e-10 * scale;

  Tridiagonal shifted = s.as_tridiagonal().scaled_shift(1.0, -sigma);
  std::vector<double> z(n);
  const auto yc = op.null_vector();
  for (std::size_t r = 0; r < n; ++r) z[r] = std::sqrt(op.mass()[r]) * yc[r];
  auto normalize = [](std::vector<double>& v) {
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    nrm = std::sqrt(nrm);
    for (double& x : v) x /= nrm;
  };
  normalize(z);
  int it = 0;
  for (; it < config.max_iterations; ++it) {
    auto next = solve_tridiagonal(shifted, z);
    // (S - sigma) is negative definite; flip to keep the iterate positive.
    for (double& x : next) x = -x;
    normalize(next);
    double change = 0.0;
    for (std::size_t r = 0; r < n; ++r) change = std::max(change, std::abs(next[r] - z[r]));
    z = std::move(next);
    if (change <= 1e-14) break;
  }
  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) y[r] = z[r] / std::sqrt(op.mass()[r]);
  const double lambda = std::clamp(op.rayleigh_quotient(y), lo, hi);
  EigenPair e = detail::finish_eigenpair(op, std::move(y), lambda, it + 1);
  if (n > 1) {
    const auto [lo2, hi2] = bisect_eigenvalue_from_top(s, 1);
    e.gap = lambda - 0.5 * (lo2 + hi2);
  }
  return e;
}

/// Noda-type inverse iteration for a tridiagonal matrix with nonnegative
/// off-diagonals that need not be symmetrizable. The shift is the
/// Collatz-Wielandt upper bound max (A x)_j / x_j, which converges to
/// lambda1 from above while keeping every iterate positive.
inline EigenPair principal_eigenpair_general(const LinearOperator& op, const Tridiagonal& a,
                                             const EigenConfig& config = {}) {
  config.validate();
  const std::size_t n = a.size();
  for (std::size_t j = 0; j < n; ++j) {
    if ((j > 0 && a.lower[j] < 0.0) || (j + 1 < n && a.upper[j] < 0.0)) {
      throw ValidationError("nonsymmetric eigen solve: off-diagonal entries must be nonnegative");
    }
  }
  const double scale = std::max(a.inf_norm(), std::numeric_limits<double>::min());
  std::vector<double> x(n, 1.0);
  double lower = 0.0, upper = 0.0;
  int it = 0;
  for (; it < 10 * config.max_iterations; ++it) {
    const auto ax = a.apply(x);
    lower = std::numeric_limits<double>::infinity();
    upper = -lower;
    for (std::size_t j = 0; j < n; ++j) {
      const double ratio = ax[j] / x[j];
      lower = std::min(lower, ratio);
      upper = std::max(upper, ratio);
    }
    if (upper - lower <= 1e-13 * scale) break;
    const double sigma = upper + 1e-12 * scale;
    auto next = solve_tridiagonal(a.scaled_shift(-1.0, sigma), x);
    double mx = 0.0;
    for (double v : next) mx = std::max(mx, v);
    for (std::size_t j = 0; j < n; ++j) x[j] = std::max(next[j] / mx, std::numeric_limits<double>::min());
  }
  return detail::finish_eigenpair(op, std::move(x), 0.5 * (lower + upper), it + 1);
}

/// Steady state of the resident and the mutant's eigenpair on it.
struct FitnessResult {
  PiecewiseField ustar;
  EigenPair eig;
};

inline FitnessResult invasion_fitness_detailed(const Landscape& landscape, const PatchEnvironment& env,
                                               const SpeciesTraits& resident, const SpeciesTraits& mutant,
                                               const GridPtr& grid, const SteadyConfig& steady = {},
                                               const EigenConfig& eigen = {}) {
  require_traits_fit(*grid, mutant);
  FitnessResult out;
  out.ustar = solve_resident_steady(landscape, env, resident, grid, steady);
  const auto op = assemble_linearization(grid, mutant, logistic_potential(out.ustar, env));
  out.eig = principal_eigenpair(op, eigen);
  return out;
}

/// lambda1 of the mutant's linearization at the resident's semi-trivial state.
/// Positive: the mutant invades when rare.
inline EigenPair invasion_fitness(const Landscape& landscape, const PatchEnvironment& env,
                                  const SpeciesTraits& resident, const SpeciesTraits& mutant, const GridPtr& grid,
                                  const SteadyConfig& steady = {}, const EigenConfig& eigen = {}) {
  return invasion_fitness_detailed(landscape, env, resident, mutant, grid, steady, eigen).eig;
}

/// lambda1 with potential r (1 - 2 u*/k): the resident's own linearization.
inline EigenPair resident_linearization_eigenpair(const PiecewiseField& ustar, const PatchEnvironment& env,
                                                  const SpeciesTraits& resident, const EigenConfig& eigen = {}) {
  const auto op = assemble_linearization(ustar.grid_ptr(), resident, logistic_potential(ustar, env, 2.0));
  return principal_eigenpair(op, eigen);
}

/// Header record "lambda1,<value>" followed by field rows.
inline void write_eigenpair_csv(std::ostream& os, const EigenPair& e) {
  os << "lambda1," << format_number(e.lambda1) << "\n";
  write_field_csv(os, e.phi, "phi");
}

}  // namespace patchcomp
