#pragma once

// Time integration of the two-species competition system, outcome
// classification, and the order-preservation and bounding-box harnesses.

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "patchcomp/diffusion.hpp"
#include "patchcomp/steady.hpp"

namespace patchcomp {

enum class Scheme { ImexEuler, CrankNicolsonDiffusion };

inline const char* to_string(Scheme s) { return s == Scheme::ImexEuler ? "imex-euler" : "cn-diffusion"; }

inline Scheme parse_scheme(const std::string& s, const std::string& path = "sim.scheme") {
  if (s == "imex-euler") return Scheme::ImexEuler;
  if (s == "cn-diffusion") return Scheme::CrankNicolsonDiffusion;
  throw ValidationError(path + ": expected \"imex-euler\" or \"cn-diffusion\"");
}

/// Zero dt / extinction_eps select the environment-dependent defaults
/// 0.01 min(1/r_i) and 1e-6 min k.
struct SimConfig {
  double dt = 0.0;
  double t_max = 2000.0;
  double steady_tol = 1e-8;
  double extinction_eps = 0.0;
  Scheme scheme = Scheme::ImexEuler;
  std::size_t snapshot_stride = 0;

  void validate(const std::string& path = "sim") const {
    if (dt < 0.0 || !std::isfinite(dt)) throw ValidationError(path + ".dt: must be positive (or 0 for the default)");
    if (!(t_max > 0.0)) throw ValidationError(path + ".t_max: must be positive");
    if (!(steady_tol > 0.0)) throw ValidationError(path + ".steady_tol: must be positive");
    if (extinction_eps < 0.0) throw ValidationError(path + ".extinction_eps: must be positive (or 0 for the default)");
  }

  SimConfig resolved(const PatchEnvironment& env) const {
    SimConfig c = *this;
    if (c.dt == 0.0) {
      double rmax = 0.0;
      for (double r : env.r) rmax = std::max(rmax, r);
      c.dt = 0.01 / rmax;
    }
    if (c.extinction_eps == 0.0) c.extinction_eps = 1e-6 * env.min_k();
    return c;
  }
  bool operator==(const SimConfig&) const = default;
};

struct SystemState {
  PiecewiseField u;
  PiecewiseField v;
};

enum class Verdict { ResidentWins, MutantWins, Coexistence, Undetermined };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::ResidentWins: return "ResidentWins";
    case Verdict::MutantWins: return "MutantWins";
    case Verdict::Coexistence: return "Coexistence";
    case Verdict::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

/// Both species' operators and per-DOF coefficients on one grid.
class CompetitionSystem {
 public:
  CompetitionSystem(const GridPtr& grid, PatchEnvironment env, SpeciesTraits resident, SpeciesTraits mutant)
      : grid_(grid),
        env_(std::move(env)),
        resident_(std::move(resident)),
        mutant_(std::move(mutant)),
        u_op_(assemble_diffusion(grid, resident_)),
        v_op_(assemble_diffusion(grid, mutant_)) {
    env_.validate(grid->patches());
    r_.resize(grid->total_dofs());
    k_.resize(grid->total_dofs());
    for (std::size_t i = 0; i < grid->patches(); ++i)
      for (std::size_t j = 0; j < grid->nodes(i).size(); ++j) {
        r_[grid->index(i, j)] = env_.r[i];
        k_[grid->index(i, j)] = env_.k[i];
      }
  }

  const GridPtr& grid() const { return grid_; }
  const PatchEnvironment& env() const { return env_; }
  const SpeciesTraits& resident() const { return resident_; }
  const SpeciesTraits& mutant() const { return mutant_; }
  const LinearOperator& u_op() const { return u_op_; }
  const LinearOperator& v_op() const { return v_op_; }

  /// r w (1 - (u + v)/k) at every DOF.
  std::vector<double> reaction(const PiecewiseField& w, const SystemState& s) const {
    std::vector<double> g(w.values().size());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = r_[k] * w[k] * (1.0 - (s.u[k] + s.v[k]) / k_[k]);
    return g;
  }

  /// Sup norm of the coupled steady residual over both species' reduced unknowns.
  double steady_residual(const SystemState& s) const {
    double worst = 0.0;
    for (int species = 0; species < 2; ++species) {
      const LinearOperator& op = species == 0 ? u_op_ : v_op_;
      const PiecewiseField& w = species == 0 ? s.u : s.v;
      const auto y = op.reduce(w);
      auto f = op.matrix().apply(y);
      const auto react = op.project(reaction(w, s));
      for (std::size_t r = 0; r < f.size(); ++r) worst = std::max(worst, std::abs(f[r] + react[r]));
    }
    return worst;
  }

 private:
  GridPtr grid_;
  PatchEnvironment env_;
  SpeciesTraits resident_;
  SpeciesTraits mutant_;
  LinearOperator u_op_;
  LinearOperator v_op_;
  std::vector<double> r_, k_;
};

struct StepInfo {
  double clipped = 0.0;      // largest negative value removed by clipping
  double rate = 0.0;         // ||(w' - w)/dt||_inf over both species
  double rate_u = 0.0;
  double rate_v = 0.0;
};

/// One step: implicit diffusion per species, explicit competition reaction,
/// negative values clipped to zero.
inline SystemState step(const SystemState& s, double dt, const CompetitionSystem& sys,
                        Scheme scheme = Scheme::ImexEuler, StepInfo* info = nullptr) {
  SystemState out{s.u, s.v};
  StepInfo local;
  for (int species = 0; species < 2; ++species) {
    const LinearOperator& op = species == 0 ? sys.u_op() : sys.v_op();
    const PiecewiseField& w = species == 0 ? s.u : s.v;
    const auto y = op.reduce(w);
    const auto react = op.project(sys.reaction(w, s));
    std::vector<double> rhs(y.size());
    Tridiagonal lhs;
    if (scheme == Scheme::ImexEuler) {
      for (std::size_t r = 0; r < y.size(); ++r) rhs[r] = y[r] + dt * react[r];
      lhs = op.matrix().scaled_shift(-dt, 1.0);
    } else {
      const auto ay = op.matrix().apply(y);
      for (std::size_t r = 0; r < y.size(); ++r) rhs[r] = y[r] + 0.5 * dt * ay[r] + dt * react[r];
      lhs = op.matrix().scaled_shift(-0.5 * dt, 1.0);
    }
    auto next = solve_tridiagonal(lhs, rhs);
    double rate = 0.0;
    for (std::size_t r = 0; r < next.size(); ++r) {
      if (next[r] < 0.0) {
        local.clipped = std::max(local.clipped, -next[r]);
        next[r] = 0.0;
      }
      rate = std::max(rate, std::abs(next[r] - y[r]) / dt);
    }
    (species == 0 ? local.rate_u : local.rate_v) = rate;
    (species == 0 ? out.u : out.v) = op.expand(next);
  }
  local.rate = std::max(local.rate_u, local.rate_v);
  if (info) *info = local;
  return out;
}

/// Jump-consistent constant M P_i dominating both the capacities and the
/// initial data, for one species with cumulative jumps P_i.
inline PiecewiseField bounding_box(const PiecewiseField& w0, const PatchEnvironment& env, const SpeciesTraits& t) {
  const auto cj = t.cumulative_jumps();
  double m = 0.0;
  for (std::size_t i = 0; i < cj.size(); ++i) {
    double top = env.k[i];
    for (double v : w0.patch(i)) top = std::max(top, v);
    m = std::max(m, top / cj[i]);
  }
  return jump_consistent_constant(w0.grid_ptr(), t.p(), m);
}

/// Default initial data: half the first capacity, carried along each
/// species' own cumulative jumps.
inline SystemState default_initial_state(const CompetitionSystem& sys) {
  const double base = 0.5 * sys.env().k.front();
  return {jump_consistent_constant(sys.grid(), sys.resident().p(), base),
          jump_consistent_constant(sys.grid(), sys.mutant().p(), base)};
}

struct OutcomeRecord {
  Verdict verdict = Verdict::Undetermined;
  SystemState final_state;
  double time = 0.0;
  std::size_t steps = 0;
  bool converged = false;
  double rate = 0.0;             // last time-derivative sup norm
  double steady_residual = 0.0;  // coupled residual at the final state
  double max_clip = 0.0;
  double u_distance = 0.0;       // ||u - u*||_inf
  double v_distance = 0.0;       // ||v - v*||_inf
  double box_violation = 0.0;    // largest excess over the bounding boxes (0 when inside)
  bool box_respected = true;
  SimConfig config;              // thresholds actually used
  std::string note;
};

namespace detail {
inline double sup_distance(const PiecewiseField& a, const PiecewiseField& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) s = std::max(s, std::abs(a[k] - b[k]));
  return s;
}
inline double box_excess(const PiecewiseField& w, const PiecewiseField& box) {
  double e = 0.0;
  for (std::size_t k = 0; k < w.values().size(); ++k) {
    e = std::max(e, w[k] - box[k] * (1.0 + 1e-12));
    e = std::max(e, -w[k]);
  }
  return std::max(e, 0.0);
}
}  // namespace detail

/// Verdict from a final state. Semi-trivial matches are measured against
/// 10 steady_tol times a scale of 100 max k; the run stops on the time rate,
/// so the coexistence residual gets the same factor 10.
inline Verdict classify_outcome(const SystemState& final_state, const PiecewiseField& ustar, const PiecewiseField& vstar,
                                const SimConfig& config, const CompetitionSystem& sys) {
  const SimConfig c = config.resolved(sys.env());
  const double match = 10.0 * c.steady_tol * 100.0 * sys.env().max_k();
  const double umax = final_state.u.max(), vmax = final_state.v.max();
  if (vmax < c.extinction_eps && detail::sup_distance(final_state.u, ustar) < match) return Verdict::ResidentWins;
  if (umax < c.extinction_eps && detail::sup_distance(final_state.v, vstar) < match) return Verdict::MutantWins;
  if (final_state.u.min() > c.extinction_eps && final_state.v.min() > c.extinction_eps &&
      sys.steady_residual(final_state) < 10.0 * c.steady_tol) {
    return Verdict::Coexistence;
  }
  return Verdict::Undetermined;
}

inline void write_trajectory_header(std::ostream& os) { os << "t,patch,x,u,v\n"; }

inline void write_trajectory_rows(std::ostream& os, double t, const SystemState& s) {
  const Grid& g = s.u.grid();
  for (std::size_t i = 0; i < g.patches(); ++i) {
    const auto& x = g.nodes(i);
    const auto u = s.u.patch(i);
    const auto v = s.v.patch(i);
    for (std::size_t j = 0; j < x.size(); ++j) {
      os << format_number(t) << ',' << (i + 1) << ',' << format_number(x[j]) << ',' << format_number(u[j]) << ','
         << format_number(v[j]) << '\n';
    }
  }
}

/// Integrates until t_max or until settled: time-derivative sup norm below
/// steady_tol, and each species either extinct or changing at a relative
/// rate below 1e-6. The bounding boxes are checked every 100 steps.
inline OutcomeRecord simulate(const SystemState& initial, const SimConfig& config, const CompetitionSystem& sys,
                              const PiecewiseField& ustar, const PiecewiseField& vstar,
                              std::ostream* trajectory = nullptr) {
  config.validate();
  const SimConfig c = config.resolved(sys.env());
  if (initial.u.min() < 0.0 || initial.v.min() < 0.0) throw ValidationError("initial state: must be nonnegative");
  const auto box_u = bounding_box(initial.u, sys.env(), sys.resident());
  const auto box_v = bounding_box(initial.v, sys.env(), sys.mutant());
  const double blowup = 10.0 * std::max(box_u.max(), box_v.max());

  OutcomeRecord rec;
  rec.config = c;
  SystemState s = initial;
  if (trajectory) {
    write_trajectory_header(*trajectory);
    write_trajectory_rows(*trajectory, 0.0, s);
  }
  const auto n_steps = static_cast<std::size_t>(std::ceil(c.t_max / c.dt - 1e-9));
  StepInfo info;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    s = step(s, c.dt, sys, c.scheme, &info);
    rec.steps = k;
    rec.time = static_cast<double>(k) * c.dt;
    rec.max_clip = std::max(rec.max_clip, info.clipped);
    rec.rate = info.rate;
    if (k % 100 == 0 || k == n_steps) {
      if (std::max(s.u.max(), s.v.max()) > blowup || !std::isfinite(s.u.max() + s.v.max())) {
        throw NumericalError("simulation blew up at t = " + format_number(rec.time));
      }
      const double excess = std::max(detail::box_excess(s.u, box_u), detail::box_excess(s.v, box_v));
      rec.box_violation = std::max(rec.box_violation, excess);
      if (excess > 0.0) rec.box_respected = false;
    }
    if (trajectory && c.snapshot_stride > 0 && k % c.snapshot_stride == 0) write_trajectory_rows(*trajectory, rec.time, s);
    if (info.rate < c.steady_tol) {
      auto settled = [&](const PiecewiseField& w, double rate) {
        return w.max() < c.extinction_eps || rate < 1e-6 * w.max();
      };
      if (settled(s.u, info.rate_u) && settled(s.v, info.rate_v)) {
        rec.converged = true;
        break;
      }
    }
  }
  rec.steady_residual = sys.steady_residual(s);
  rec.u_distance = detail::sup_distance(s.u, ustar);
  rec.v_distance = detail::sup_distance(s.v, vstar);
  rec.final_state = s;
  rec.verdict = classify_outcome(s, ustar, vstar, c, sys);
  if (rec.verdict == Verdict::Coexistence) {
    rec.note = "coexistence state reached from the given initial data; uniqueness is not guaranteed";
  } else if (rec.verdict == Verdict::Undetermined) {
    rec.note = rec.converged ? "settled state matches no semi-trivial or coexistence criterion"
                             : "t_max reached before the state settled";
  }
  return rec;
}

/// Semi-trivial states of both species and the simulation from the default
/// initial data.
inline OutcomeRecord simulate_default(const CompetitionSystem& sys, const SimConfig& config,
                                      const SteadyConfig& steady = {}, std::ostream* trajectory = nullptr) {
  const Landscape& land = sys.grid()->landscape();
  const auto ustar = solve_resident_steady(land, sys.env(), sys.resident(), sys.grid(), steady);
  const auto vstar = solve_resident_steady(land, sys.env(), sys.mutant(), sys.grid(), steady);
  return simulate(default_initial_state(sys), config, sys, ustar, vstar, trajectory);
}

struct OrderCheck {
  bool ordered = true;
  double max_violation = 0.0;
  std::optional<std::size_t> first_violation_step;
};

/// Steps two states A >= B (u up, v down) side by side and verifies after each
/// step that u_A >= u_B - tol and v_A <= v_B + tol with tol = 1e-10 max k.
inline OrderCheck order_preservation_check(const SystemState& a0, const SystemState& b0, const SimConfig& config,
                                           const CompetitionSystem& sys, std::size_t steps) {
  const SimConfig c = config.resolved(sys.env());
  const double tol = 1e-10 * sys.env().max_k();
  OrderCheck out;
  SystemState a = a0, b = b0;
  for (std::size_t k = 1; k <= steps; ++k) {
    a = step(a, c.dt, sys, c.scheme);
    b = step(b, c.dt, sys, c.scheme);
    double worst = 0.0;
    for (std::size_t j = 0; j < a.u.values().size(); ++j) {
      worst = std::max(worst, b.u[j] - a.u[j]);
      worst = std::max(worst, a.v[j] - b.v[j]);
    }
    out.max_violation = std::max(out.max_violation, worst);
    if (worst > tol && out.ordered) {
      out.ordered = false;
      out.first_violation_step = k;
    }
  }
  return out;
}

}  // namespace patchcomp
