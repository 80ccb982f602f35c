#pragma once

// Residual and property checks run against one configured model. Each check
// reports pass/fail plus a short detail string; nothing here throws for a
// failed check, only for invalid input.

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "patchcomp/config.hpp"
#include "patchcomp/identities.hpp"
#include "patchcomp/transform.hpp"

namespace patchcomp {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Random jump-consistent pair A >= B in the competition order (u up, v down).
/// Reduced values of A are drawn in (0, 2 max k]; B scales them by U(0, 1).
inline std::pair<SystemState, SystemState> random_ordered_pair(const CompetitionSystem& sys, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> level(0.0, 2.0 * sys.env().max_k());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](const LinearOperator& op, bool upper) {
    std::vector<double> hi(op.size()), lo(op.size());
    for (std::size_t r = 0; r < hi.size(); ++r) {
      hi[r] = level(rng);
      lo[r] = hi[r] * unit(rng);
    }
    return upper ? std::pair{op.expand(hi), op.expand(lo)} : std::pair{op.expand(lo), op.expand(hi)};
  };
  auto [ua, ub] = draw(sys.u_op(), true);
  auto [va, vb] = draw(sys.v_op(), false);
  return {SystemState{ua, va}, SystemState{ub, vb}};
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

inline std::size_t finest_count(const Grid& g) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < g.patches(); ++i) n = std::max(n, g.subintervals(i));
  return n;
}

inline CheckResult check_steady(const RunConfig& c, const ModelParams& m, const GridPtr& grid) {
  CheckResult out{"steady-residual", true, ""};
  for (int s = 0; s < 2; ++s) {
    const auto& t = s == 0 ? m.resident : m.mutant;
    const auto res = solve_resident_steady_detailed(m.landscape, m.env, t, grid, c.steady);
    if (!(res.residual <= res.threshold)) out.passed = false;
    out.detail += std::string(s == 0 ? "resident " : " mutant ") + fmt(res.residual) + "/" + fmt(res.threshold);
  }
  return out;
}

inline CheckResult check_oracle(const RunConfig& c, const ModelParams& m, const GridPtr& grid) {
  const auto u = solve_resident_steady(m.landscape, m.env, m.resident, grid, c.steady);
  const auto o = transform_route_steady(m.landscape, m.env, m.resident, finest_count(*grid));
  const double diff = relative_sup_difference(u, o);
  return {"transform-oracle", diff <= 5e-3, "relative difference " + fmt(diff)};
}

/// Absolute mismatch of the invasion identity on uniform grids N and 2N.
inline CheckResult check_identity(const RunConfig& c, const ModelParams& m, const GridPtr& grid) {
  const std::size_t n0 = finest_count(*grid);
  double err[2], mag = 0.0;
  for (int level = 0; level < 2; ++level) {
    const auto g = build_grid(m.landscape, GridResolution::uniform_count(m.landscape.patches(), n0 << level));
    const auto f = invasion_fitness_detailed(m.landscape, m.env, m.resident, m.mutant, g, c.steady, c.eigen);
    const auto r = invasion_identity_residual(f.ustar, f.eig, m.env, m.resident, m.mutant, *g);
    err[level] = std::abs(r.lhs - r.rhs);
    mag = std::max(mag, std::abs(r.lhs) + std::abs(r.rhs));
  }
  const double floor = 1e-10 * m.env.max_k() * m.env.max_k();
  const bool ok = err[1] <= floor || err[1] <= 0.5 * err[0];
  return {"invasion-identity", ok,
          "mismatch " + fmt(err[0]) + " -> " + fmt(err[1]) + " (scale " + fmt(mag) + ")"};
}

inline CheckResult check_eigen(const RunConfig& c, const ModelParams& m, const GridPtr& grid) {
  const auto e = invasion_fitness(m.landscape, m.env, m.resident, m.mutant, grid, c.steady, c.eigen);
  const bool ok = e.phi.min() > 0.0 && e.residual <= 1e-6 * std::max(1.0, std::abs(e.lambda1));
  return {"principal-eigenpair", ok, "lambda1 " + format_number(e.lambda1) + ", residual " + fmt(e.residual)};
}

inline CheckResult check_order(const RunConfig& c, const ModelParams& m, const GridPtr& grid) {
  const CompetitionSystem sys(grid, m.env, m.resident, m.mutant);
  std::mt19937_64 rng(c.seed);
  double worst = 0.0;
  bool ok = true;
  for (int k = 0; k < 10; ++k) {
    const auto [a, b] = random_ordered_pair(sys, rng);
    const auto chk = order_preservation_check(a, b, c.sim, sys, 200);
    ok = ok && chk.ordered;
    worst = std::max(worst, chk.max_violation);
  }
  return {"comparison-principle", ok, "10 pairs x 200 steps, worst violation " + fmt(worst)};
}

inline std::vector<CheckResult> check_dynamics(const RunConfig& c, const ModelParams& m, const GridPtr& grid) {
  const CompetitionSystem sys(grid, m.env, m.resident, m.mutant);
  const auto rec = simulate_default(sys, c.sim, c.steady);
  std::vector<CheckResult> out;
  out.push_back({"bounding-box", rec.box_respected, "largest excess " + fmt(rec.box_violation)});
  const auto pred = predict_outcome(m.resident.p(), m.mutant.p(), m.resident.d(), m.mutant.d(), m.env);
  const auto expected = as_simulation_verdict(pred.global_verdict);
  if (expected) {
    out.push_back({"global-verdict", rec.verdict == *expected,
                   std::string("predicted ") + to_string(pred.global_verdict) + ", simulated " + to_string(rec.verdict)});
  }
  return out;
}

inline bool is_ifd(const StrategyVector& p, const PatchEnvironment& env) {
  const auto kbar = ifd_strategy(env);
  for (std::size_t i = 0; i < p.size(); ++i)
    if (std::abs(p[i] - kbar[i]) > 1e-12 * kbar[i]) return false;
  return true;
}

inline CheckResult check_ifd(const RunConfig& c, const ModelParams& m, const GridPtr& grid) {
  const auto u = solve_resident_steady(m.landscape, m.env, m.resident, grid, c.steady);
  double err = 0.0;
  for (std::size_t i = 0; i < grid->patches(); ++i)
    for (double v : u.patch(i)) err = std::max(err, std::abs(v - m.env.k[i]) / m.env.k[i]);
  const double lambda = invasion_fitness(m.landscape, m.env, m.resident, m.mutant, grid, c.steady, c.eigen).lambda1;
  return {"ifd-exactness", err <= 1e-10 && std::abs(lambda) <= 1e-10,
          "max relative error " + fmt(err) + ", lambda1 " + fmt(lambda)};
}

}  // namespace detail

/// Every check that applies to the configured model. The IFD check runs only
/// when the resident plays the IFD strategy; the verdict check only when the
/// parameters fall in a region with a global prediction.
inline std::vector<CheckResult> validate_model(const RunConfig& config) {
  const auto m = config.params();
  const auto grid = config.build();
  std::vector<CheckResult> out;
  out.push_back(detail::check_steady(config, m, grid));
  out.push_back(detail::check_oracle(config, m, grid));
  out.push_back(detail::check_eigen(config, m, grid));
  out.push_back(detail::check_identity(config, m, grid));
  out.push_back(detail::check_order(config, m, grid));
  for (auto& r : detail::check_dynamics(config, m, grid)) out.push_back(std::move(r));
  if (m.landscape.patches() > 1 && detail::is_ifd(m.resident.p(), m.env)) out.push_back(detail::check_ifd(config, m, grid));
  return out;
}

}  // namespace patchcomp
