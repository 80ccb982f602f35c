#pragma once

// Positive steady state of d_i u_xx + r_i u (1 - u/k_i) = 0 with the species'
// interface conditions, and its monotonicity structure.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "patchcomp/diffusion.hpp"

namespace patchcomp {

struct SteadyConfig {
  double newton_tol = 1e-10;
  int max_newton_iters = 50;
  double armijo = 1e-4;
  double min_damping = 1.0 / 1024.0;
  double fallback_dt = 0.1;
  double fallback_horizon = 1e4;
  int fallback_max_steps = 5000;

  void validate(const std::string& path = "steady") const {
    if (!(newton_tol > 0.0)) throw ValidationError(path + ".newton_tol: must be positive");
    if (max_newton_iters < 1) throw ValidationError(path + ".max_newton_iters: must be at least 1");
    if (!(armijo > 0.0 && armijo < 0.5)) throw ValidationError(path + ".armijo: must lie in (0, 0.5)");
    if (!(min_damping > 0.0 && min_damping <= 1.0)) throw ValidationError(path + ".min_damping: must lie in (0, 1]");
    if (!(fallback_dt > 0.0)) throw ValidationError(path + ".fallback_dt: must be positive");
    if (!(fallback_horizon > 0.0)) throw ValidationError(path + ".fallback_horizon: must be positive");
    if (fallback_max_steps < 1) throw ValidationError(path + ".fallback_max_steps: must be at least 1");
  }
  bool operator==(const SteadyConfig&) const = default;
};

struct SteadyResult {
  PiecewiseField u;
  double residual = 0.0;   // ||A u + r u (1 - u/k)||_inf on reduced unknowns
  double threshold = 0.0;  // acceptance level actually applied
  int newton_iterations = 0;
  int fallback_steps = 0;
};

/// Nonlinear residual F(y) = A y + R(y) of the single-species problem and its
/// tridiagonal Jacobian.
class SteadyProblem {
 public:
  SteadyProblem(const GridPtr& grid, const PatchEnvironment& env, const SpeciesTraits& traits)
      : env_(env), op_(assemble_diffusion(grid, traits)) {
    env_.validate(grid->patches());
    const Grid& g = *grid;
    r_.resize(g.total_dofs());
    k_.resize(g.total_dofs());
    for (std::size_t i = 0; i < g.patches(); ++i)
      for (std::size_t j = 0; j < g.nodes(i).size(); ++j) {
        r_[g.index(i, j)] = env_.r[i];
        k_[g.index(i, j)] = env_.k[i];
      }
    floor_ = op_.reduce(jump_consistent_constant(grid, traits.p(), 1e-12 * env_.min_k()));
  }

  const LinearOperator& op() const { return op_; }

  std::vector<double> residual(const std::vector<double>& y) const {
    const auto u = op_.elimination().expand(y);
    std::vector<double> g(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) g[k] = r_[k] * u[k] * (1.0 - u[k] / k_[k]);
    auto f = op_.matrix().apply(y);
    const auto react = op_.project(g);
    for (std::size_t r = 0; r < f.size(); ++r) f[r] += react[r];
    return f;
  }

  Tridiagonal jacobian(const std::vector<double>& y) const {
    const auto u = op_.elimination().expand(y);
    std::vector<double> gp(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) gp[k] = r_[k] * (1.0 - 2.0 * u[k] / k_[k]);
    Tridiagonal j = op_.matrix();
    const auto dg = op_.project_diagonal(gp);
    for (std::size_t r = 0; r < dg.size(); ++r) j.diag[r] += dg[r];
    return j;
  }

  double merit(const std::vector<double>& f) const {
    double s = 0.0;
    for (std::size_t r = 0; r < f.size(); ++r) s += op_.mass()[r] * f[r] * f[r];
    return 0.5 * s;
  }

  /// Acceptance level: newton_tol on the scale r k, plus the floor left by
  /// rounding in the discrete second differences.
  double threshold(double newton_tol, const std::vector<double>& y) const {
    double rk = 0.0;
    for (std::size_t i = 0; i < env_.r.size(); ++i) rk = std::max(rk, env_.r[i] * env_.k[i]);
    double ymax = 0.0;
    for (double v : y) ymax = std::max(ymax, std::abs(v));
    const double eps = std::numeric_limits<double>::epsilon();
    const double diffusion_norm = op_.stiffness().inf_norm() / min_mass();
    return newton_tol * rk + 16.0 * eps * diffusion_norm * ymax;
  }

  // Jump-consistent, so clipping to it never creates interface flux.
  const std::vector<double>& positivity_floor() const { return floor_; }

  // A positive steady state reaches min k somewhere (the weighted reaction
  // integrates to zero), so anything far below that sits near u = 0.
  bool away_from_trivial(const std::vector<double>& y) const {
    return op_.expand(y).max() >= 0.5 * env_.min_k();
  }

  std::vector<double> capacity_guess() const {
    const auto& elim = op_.elimination();
    std::vector<double> y(elim.reduced_size(), 0.0);
    // Interface unknowns are left traces, so every unknown has a node with factor 1.
    for (std::size_t k = 0; k < k_.size(); ++k)
      if (elim.factor(k) == 1.0) y[elim.reduced_index(k)] = k_[k];
    return y;
  }

 private:
  double min_mass() const { return *std::min_element(op_.mass().begin(), op_.mass().end()); }

  PatchEnvironment env_;
  LinearOperator op_;
  std::vector<double> r_, k_, floor_;
};

namespace detail {

inline double sup_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

/// Full Newton steps from an accepted state until the step is at rounding
/// level; the residual itself may already sit on its rounding floor.
inline void polish(const SteadyProblem& prob, std::vector<double>& y, const SteadyConfig& cfg, int& iterations,
                   double& residual_norm) {
  const auto& floor = prob.positivity_floor();
  for (int k = 0; k < 3; ++k) {
    const auto f = prob.residual(y);
    std::vector<double> rhs(f.size());
    for (std::size_t r = 0; r < f.size(); ++r) rhs[r] = -f[r];
    std::vector<double> step;
    try {
      step = solve_tridiagonal(prob.jacobian(y), rhs);
    } catch (const NumericalError&) {
      return;
    }
    std::vector<double> trial(y.size());
    for (std::size_t r = 0; r < y.size(); ++r) trial[r] = std::max(y[r] + step[r], floor[r]);
    const double tn = sup_norm(prob.residual(trial));
    if (tn > prob.threshold(cfg.newton_tol, trial)) return;
    y = std::move(trial);
    residual_norm = tn;
    ++iterations;
    if (sup_norm(step) <= 1e-13 * sup_norm(y)) return;
  }
}

/// Damped Newton with Armijo backtracking on the mass-weighted merit.
/// Returns true when the residual falls below the threshold.
inline bool newton_solve(const SteadyProblem& prob, std::vector<double>& y, const SteadyConfig& cfg, int& iterations,
                         double& residual_norm) {
  auto f = prob.residual(y);
  double phi = prob.merit(f);
  residual_norm = sup_norm(f);
  const auto& floor = prob.positivity_floor();
  for (int it = 0; it < cfg.max_newton_iters; ++it) {
    if (residual_norm <= prob.threshold(cfg.newton_tol, y)) return true;
    ++iterations;
    const auto J = prob.jacobian(y);
    std::vector<double> rhs(f.size());
    for (std::size_t r = 0; r < f.size(); ++r) rhs[r] = -f[r];
    std::vector<double> step;
    try {
      step = solve_tridiagonal(J, rhs);
    } catch (const NumericalError&) {
      return false;
    }
    double alpha = 1.0;
    bool accepted = false;
    std::vector<double> trial(y.size());
    while (alpha >= cfg.min_damping) {
      for (std::size_t r = 0; r < y.size(); ++r) trial[r] = std::max(y[r] + alpha * step[r], floor[r]);
      auto ft = prob.residual(trial);
      const double pt = prob.merit(ft);
      if (pt <= (1.0 - 2.0 * cfg.armijo * alpha) * phi || sup_norm(ft) <= prob.threshold(cfg.newton_tol, trial)) {
        const double moved = alpha * sup_norm(step);
        y = trial;
        f = std::move(ft);
        phi = pt;
        residual_norm = sup_norm(f);
        accepted = true;
        // Stagnation at rounding level: no further progress possible.
        if (moved <= 16.0 * std::numeric_limits<double>::epsilon() * sup_norm(y)) {
          return residual_norm <= prob.threshold(cfg.newton_tol, y);
        }
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) return false;
  }
  return residual_norm <= prob.threshold(cfg.newton_tol, y);
}

/// Pseudo-transient continuation: backward Euler on y_t = F(y) with the step
/// grown as the residual falls.
inline void pseudo_transient(const SteadyProblem& prob, std::vector<double>& y, const SteadyConfig& cfg, int& steps,
                             double& residual_norm) {
  double dt = cfg.fallback_dt;
  double t = 0.0;
  auto f = prob.residual(y);
  residual_norm = sup_norm(f);
  const auto& floor = prob.positivity_floor();
  while (t < cfg.fallback_horizon && steps < cfg.fallback_max_steps) {
    auto J = prob.jacobian(y).scaled_shift(-dt, 1.0);
    std::vector<double> rhs(f.size());
    for (std::size_t r = 0; r < f.size(); ++r) rhs[r] = dt * f[r];
    const auto delta = solve_tridiagonal(J, rhs);
    for (std::size_t r = 0; r < y.size(); ++r) y[r] = std::max(y[r] + delta[r], floor[r]);
    ++steps;
    t += dt;
    f = prob.residual(y);
    const double next = sup_norm(f);
    // The residual grows while leaving u = 0, so dt never drops below its start.
    dt = std::max(cfg.fallback_dt, dt * std::clamp(residual_norm / std::max(next, 1e-300), 0.5, 10.0));
    residual_norm = next;
    if (residual_norm <= 1e3 * prob.threshold(cfg.newton_tol, y) && prob.away_from_trivial(y)) return;
  }
}

}  // namespace detail

/// Positive steady state. `initial` optionally replaces the capacity guess.
inline SteadyResult solve_resident_steady_detailed(const Landscape& landscape, const PatchEnvironment& env,
                                                   const SpeciesTraits& traits, const GridPtr& grid,
                                                   const SteadyConfig& config = {},
                                                   const std::optional<PiecewiseField>& initial = std::nullopt) {
  config.validate();
  if (!(grid->landscape() == landscape)) throw ValidationError("grid: built over a different landscape");
  env.validate(landscape.patches());
  const SteadyProblem prob(grid, env, traits);
  std::vector<double> y = initial ? prob.op().reduce(*initial) : prob.capacity_guess();
  for (std::size_t r = 0; r < y.size(); ++r) y[r] = std::max(y[r], prob.positivity_floor()[r]);

  SteadyResult res;
  double rn = 0.0;
  bool ok = detail::newton_solve(prob, y, config, res.newton_iterations, rn) && prob.away_from_trivial(y);
  if (!ok) {
    detail::pseudo_transient(prob, y, config, res.fallback_steps, rn);
    ok = detail::newton_solve(prob, y, config, res.newton_iterations, rn) && prob.away_from_trivial(y);
  }
  if (ok) detail::polish(prob, y, config, res.newton_iterations, rn);
  res.threshold = prob.threshold(config.newton_tol, y);
  res.residual = rn;
  if (!ok) throw NumericalError("steady solve failed: last residual " + format_number(rn));
  res.u = prob.op().expand(y);
  if (res.u.min() <= 0.0) throw NumericalError("steady solve produced a non-positive state");
  return res;
}

inline PiecewiseField solve_resident_steady(const Landscape& landscape, const PatchEnvironment& env,
                                            const SpeciesTraits& traits, const GridPtr& grid,
                                            const SteadyConfig& config = {}) {
  return solve_resident_steady_detailed(landscape, env, traits, grid, config).u;
}

/// Sup norm of the steady residual of a field, read on reduced unknowns.
inline double steady_residual(const PiecewiseField& u, const PatchEnvironment& env, const SpeciesTraits& traits) {
  const SteadyProblem prob(u.grid_ptr(), env, traits);
  return detail::sup_norm(prob.residual(prob.op().reduce(u)));
}

enum class SlopeSign { StrictlyDecreasing, StrictlyIncreasing, Flat, Mixed };
enum class Comparison { Below, Equal, Above };
enum class MonotoneExpectation { Decreasing, Increasing, Unclassified };

inline const char* to_string(SlopeSign s) {
  switch (s) {
    case SlopeSign::StrictlyDecreasing: return "decreasing";
    case SlopeSign::StrictlyIncreasing: return "increasing";
    case SlopeSign::Flat: return "flat";
    case SlopeSign::Mixed: return "mixed";
  }
  return "mixed";
}
inline const char* to_string(Comparison c) {
  switch (c) {
    case Comparison::Below: return "below";
    case Comparison::Equal: return "equal";
    case Comparison::Above: return "above";
  }
  return "equal";
}
inline const char* to_string(MonotoneExpectation e) {
  switch (e) {
    case MonotoneExpectation::Decreasing: return "decreasing";
    case MonotoneExpectation::Increasing: return "increasing";
    case MonotoneExpectation::Unclassified: return "unclassified";
  }
  return "unclassified";
}

struct InterfaceSlopes {
  double left;   // u_x(x_i^-)
  double right;  // u_x(x_i^+)
};

struct MonotonicityReport {
  std::vector<SlopeSign> patch_sign;
  Comparison left_end_vs_k1 = Comparison::Equal;    // u_1(0) against k_1
  Comparison right_end_vs_kn = Comparison::Equal;   // u_n(L) against k_n
  std::vector<InterfaceSlopes> interface_slopes;
  MonotoneExpectation expectation = MonotoneExpectation::Unclassified;
  double tolerance = 0.0;

  bool monotone_decreasing() const {
    return std::all_of(patch_sign.begin(), patch_sign.end(),
                       [](SlopeSign s) { return s == SlopeSign::StrictlyDecreasing; });
  }
  bool monotone_increasing() const {
    return std::all_of(patch_sign.begin(), patch_sign.end(),
                       [](SlopeSign s) { return s == SlopeSign::StrictlyIncreasing; });
  }
  bool non_monotone() const {
    const bool any_dec = std::any_of(patch_sign.begin(), patch_sign.end(), [](SlopeSign s) {
      return s == SlopeSign::StrictlyDecreasing || s == SlopeSign::Mixed;
    });
    const bool any_inc = std::any_of(patch_sign.begin(), patch_sign.end(), [](SlopeSign s) {
      return s == SlopeSign::StrictlyIncreasing || s == SlopeSign::Mixed;
    });
    return any_dec && any_inc;
  }

  /// Every statement that the ordering of p against the IFD strategy implies.
  bool matches_expectation() const {
    auto interfaces_have = [&](bool negative) {
      return std::all_of(interface_slopes.begin(), interface_slopes.end(), [&](const InterfaceSlopes& s) {
        return negative ? (s.left < -tolerance && s.right < -tolerance) : (s.left > tolerance && s.right > tolerance);
      });
    };
    switch (expectation) {
      case MonotoneExpectation::Decreasing:
        return monotone_decreasing() && left_end_vs_k1 == Comparison::Below && right_end_vs_kn == Comparison::Above &&
               interfaces_have(true);
      case MonotoneExpectation::Increasing:
        return monotone_increasing() && left_end_vs_k1 == Comparison::Above && right_end_vs_kn == Comparison::Below &&
               interfaces_have(false);
      case MonotoneExpectation::Unclassified: return true;
    }
    return false;
  }
};

/// Slopes between neighbouring nodes are compared against 1e-8 max k.
inline MonotonicityReport monotonicity_report(const PiecewiseField& ustar, const PatchEnvironment& env,
                                              const SpeciesTraits& traits) {
  const Grid& g = ustar.grid();
  MonotonicityReport rep;
  rep.tolerance = 1e-8 * env.max_k();
  const double tol = rep.tolerance;
  for (std::size_t i = 0; i < g.patches(); ++i) {
    const auto& x = g.nodes(i);
    const auto v = ustar.patch(i);
    bool neg = false, pos = false, flat = false;
    for (std::size_t j = 1; j < x.size(); ++j) {
      const double s = (v[j] - v[j - 1]) / (x[j] - x[j - 1]);
      if (s < -tol) neg = true;
      else if (s > tol) pos = true;
      else flat = true;
    }
    SlopeSign sign = SlopeSign::Mixed;
    if (neg && !pos && !flat) sign = SlopeSign::StrictlyDecreasing;
    else if (pos && !neg && !flat) sign = SlopeSign::StrictlyIncreasing;
    else if (flat && !neg && !pos) sign = SlopeSign::Flat;
    rep.patch_sign.push_back(sign);
  }
  auto compare = [&](double a, double b) {
    if (a < b - tol) return Comparison::Below;
    if (a > b + tol) return Comparison::Above;
    return Comparison::Equal;
  };
  rep.left_end_vs_k1 = compare(ustar.patch(0).front(), env.k.front());
  rep.right_end_vs_kn = compare(ustar.patch(g.patches() - 1).back(), env.k.back());
  for (std::size_t i = 0; i + 1 < g.patches(); ++i) {
    const std::size_t last = g.nodes(i).size() - 1;
    rep.interface_slopes.push_back(
        {one_sided_derivative(ustar, i, last, false), one_sided_derivative(ustar, i + 1, 0, true)});
  }
  if (g.patches() > 1) {
    const auto kbar = ifd_strategy(env);
    if (strict_dominates(traits.p(), kbar)) rep.expectation = MonotoneExpectation::Decreasing;
    else if (strict_dominates(kbar, traits.p())) rep.expectation = MonotoneExpectation::Increasing;
  }
  return rep;
}

}  // namespace patchcomp
