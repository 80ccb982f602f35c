#pragma once

// Integral identities satisfied by exact steady states and eigenpairs,
// evaluated on discrete fields as residual diagnostics. One-sided and nodal
// derivatives use three-point stencils; integrals of smooth products use the
// trapezoid rule, integrals of derivative products use edge secants.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "patchcomp/dynamics.hpp"
#include "patchcomp/eigen.hpp"

namespace patchcomp {

struct IdentityResidual {
  double lhs = 0.0;
  double rhs = 0.0;
  double relative = 0.0;  // |lhs - rhs| / (|lhs| + |rhs| + eps)
};

namespace detail {

/// prod_{l=i}^{last} p_l (0-based, p beyond the last interface taken as 1).
inline double tail_product(const StrategyVector& p, std::size_t i, std::size_t last) {
  double s = 1.0;
  for (std::size_t l = i; l <= last && l < p.size(); ++l) s *= p[l];
  return s;
}

inline double trapezoid_product(const PiecewiseField& a, const PiecewiseField& b, std::size_t patch, std::size_t j0,
                                std::size_t j1) {
  const auto& x = a.grid().nodes(patch);
  const auto va = a.patch(patch), vb = b.patch(patch);
  double s = 0.0;
  for (std::size_t j = j0 + 1; j <= j1; ++j) s += 0.5 * (x[j] - x[j - 1]) * (va[j] * vb[j] + va[j - 1] * vb[j - 1]);
  return s;
}

/// Integral of a_x b_x over nodes j0..j1 of a patch, from edge secant slopes.
inline double gradient_product(const PiecewiseField& a, const PiecewiseField& b, std::size_t patch, std::size_t j0,
                               std::size_t j1) {
  const auto& x = a.grid().nodes(patch);
  const auto va = a.patch(patch), vb = b.patch(patch);
  double s = 0.0;
  for (std::size_t j = j0 + 1; j <= j1; ++j) s += (va[j] - va[j - 1]) * (vb[j] - vb[j - 1]) / (x[j] - x[j - 1]);
  return s;
}

inline double relative_gap(double a, double b) {
  return std::abs(a - b) / (std::abs(a) + std::abs(b) + std::numeric_limits<double>::min());
}

}  // namespace detail

/// lambda1 sum_i W_i int phi_i u*_i against the interface and diffusion
/// mismatch terms, with W_i = p_i ... p_n and p_n = 1.
inline IdentityResidual invasion_identity_residual(const PiecewiseField& ustar, const EigenPair& eig,
                                                  const PatchEnvironment& env, const SpeciesTraits& resident,
                                                  const SpeciesTraits& mutant, const Grid& grid) {
  (void)env;
  if (!(ustar.grid() == grid) || !(eig.phi.grid() == grid)) throw ValidationError("identity: fields on different grids");
  const std::size_t n = grid.patches();
  const auto& p = resident.p();
  const auto& ph = mutant.p();
  const auto& d = resident.d();
  const auto& dh = mutant.d();
  IdentityResidual out;
  double integral = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = detail::tail_product(p, i, n);
    const std::size_t last = grid.nodes(i).size() - 1;
    integral += w * detail::trapezoid_product(eig.phi, ustar, i, 0, last);
    out.rhs += w * (d[i] - dh[i]) * detail::gradient_product(eig.phi, ustar, i, 0, last);
  }
  out.lhs = eig.lambda1 * integral;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t last = grid.nodes(i).size() - 1;
    const double ux = one_sided_derivative(ustar, i, last, false);
    out.rhs += detail::tail_product(p, i + 1, n) * d[i] * (ph[i] - p[i]) * ux * eig.phi.at(i, last);
  }
  out.relative = detail::relative_gap(out.lhs, out.rhs);
  return out;
}

/// Node of a patch nearest to x.
inline std::size_t snap_to_node(const Grid& grid, std::size_t patch, double x) {
  const auto& xs = grid.nodes(patch);
  std::size_t best = 0;
  for (std::size_t j = 1; j < xs.size(); ++j)
    if (std::abs(xs[j] - x) < std::abs(xs[best] - x)) best = j;
  return best;
}

/// Patch holding a left endpoint a (a in [x_{i-1}, x_i)) or a right endpoint
/// b (b in (x_{i-1}, x_i]).
inline std::size_t locate_patch(const Landscape& land, double x, bool right_endpoint) {
  for (std::size_t i = 0; i < land.patches(); ++i) {
    if (right_endpoint ? (x > land.left(i) && x <= land.right(i)) : (x >= land.left(i) && x < land.right(i))) return i;
  }
  throw ValidationError("identity: position " + format_number(x) + " lies outside the landscape");
}

struct CoexistenceResidual {
  std::optional<double> u_form;    // same-patch identity, u chain
  std::optional<double> v_form;    // same-patch identity, v chain
  std::optional<double> spanning;  // identity across patches
  double steady_residual = 0.0;
};

/// Same-patch identity on patch i between nodes ja < jb:
/// int r (k - u - v) = -d k u_x/u |_a^b - d k int (u_x/u)^2, and its v analogue.
/// Residuals are normalized by r_i k_i (b - a).
inline void same_patch_identity(const PiecewiseField& u, const PiecewiseField& v, const PatchEnvironment& env,
                                const SpeciesTraits& resident, const SpeciesTraits& mutant, std::size_t i,
                                std::size_t ja, std::size_t jb, CoexistenceResidual& out) {
  if (ja == jb) {
    if (u.max() > 0.0) out.u_form = 0.0;
    if (v.max() > 0.0) out.v_form = 0.0;
    return;
  }
  const Grid& g = u.grid();
  const auto& x = g.nodes(i);
  const double r = env.r[i], k = env.k[i];
  const auto uu = u.patch(i), vv = v.patch(i);
  double lhs = 0.0;
  for (std::size_t j = ja + 1; j <= jb; ++j) {
    lhs += 0.5 * (x[j] - x[j - 1]) * r * ((k - uu[j] - vv[j]) + (k - uu[j - 1] - vv[j - 1]));
  }
  const double norm = r * k * (x[jb] - x[ja]);
  auto chain = [&](const PiecewiseField& w, double dcoef) {
    const auto ww = w.patch(i);
    const auto wx = nodal_derivative(w, i);
    double s = -dcoef * k * wx[jb] / ww[jb] + dcoef * k * wx[ja] / ww[ja];
    double integral = 0.0;
    for (std::size_t j = ja + 1; j <= jb; ++j) {
      const double h = x[j] - x[j - 1];
      const double slope = (ww[j] - ww[j - 1]) / h;
      const double mid = 0.5 * (ww[j] + ww[j - 1]);
      integral += h * slope * slope / (mid * mid);
    }
    return s - dcoef * k * integral;
  };
  if (*std::min_element(uu.begin(), uu.end()) > 0.0) {
    out.u_form = std::abs(lhs - chain(u, resident.d()[i])) / norm;
  }
  if (*std::min_element(vv.begin(), vv.end()) > 0.0) {
    out.v_form = std::abs(lhs - chain(v, mutant.d()[i])) / norm;
  }
}

/// Identity across patches l_lo < l_hi between a (in patch l_lo) and b (in
/// patch l_hi), with weights p_i ... p_{l_hi} and p_n = 1. Returns
/// |sum of terms| / sum |terms|.
inline double spanning_identity(const PiecewiseField& u, const PiecewiseField& v, const SpeciesTraits& resident,
                                const SpeciesTraits& mutant, std::size_t lo, std::size_t ja, std::size_t hi,
                                std::size_t jb) {
  const Grid& g = u.grid();
  const auto& p = resident.p();
  const auto& ph = mutant.p();
  const auto& d = resident.d();
  const auto& dh = mutant.d();
  std::vector<double> terms;
  for (std::size_t i = lo; i < hi; ++i) {
    const std::size_t last = g.nodes(i).size() - 1;
    const double ux = nodal_derivative(u, i)[last];
    terms.push_back(detail::tail_product(p, i + 1, hi) * d[i] * (ph[i] - p[i]) * ux * v.at(i, last));
  }
  const double p_hi = detail::tail_product(p, hi, hi);
  const double w_lo = detail::tail_product(p, lo, hi);
  const auto ux_hi = nodal_derivative(u, hi), vx_hi = nodal_derivative(v, hi);
  const auto ux_lo = nodal_derivative(u, lo), vx_lo = nodal_derivative(v, lo);
  terms.push_back(dh[hi] * p_hi * vx_hi[jb] * u.at(hi, jb));
  terms.push_back(-dh[lo] * w_lo * vx_lo[ja] * u.at(lo, ja));
  terms.push_back(d[lo] * w_lo * ux_lo[ja] * v.at(lo, ja));
  terms.push_back(-d[hi] * p_hi * ux_hi[jb] * v.at(hi, jb));
  for (std::size_t i = lo; i <= hi; ++i) {
    const std::size_t j0 = i == lo ? ja : 0;
    const std::size_t j1 = i == hi ? jb : g.nodes(i).size() - 1;
    terms.push_back(detail::tail_product(p, i, hi) * (d[i] - dh[i]) * detail::gradient_product(v, u, i, j0, j1));
  }
  double sum = 0.0, mag = 0.0;
  for (double t : terms) {
    sum += t;
    mag += std::abs(t);
  }
  return mag > 0.0 ? std::abs(sum) / mag : 0.0;
}

/// Identity residuals of a (near-)steady coexistence state between positions
/// a <= b, snapped to nodes. Same-patch positions give the two single-patch
/// chains; positions in different patches give the spanning identity.
/// Throws when the coupled steady residual exceeds `steady_threshold`.
inline CoexistenceResidual coexistence_identity_residual(const PiecewiseField& u, const PiecewiseField& v,
                                                         const PatchEnvironment& env, const SpeciesTraits& resident,
                                                         const SpeciesTraits& mutant, const GridPtr& grid, double a,
                                                         double b, double steady_threshold = 1e-6) {
  if (!(a <= b)) throw ValidationError("identity: positions must satisfy a <= b");
  if (!(u.grid() == *grid) || !(v.grid() == *grid)) throw ValidationError("identity: fields on different grids");
  const CompetitionSystem sys(grid, env, resident, mutant);
  CoexistenceResidual out;
  out.steady_residual = sys.steady_residual({u, v});
  if (out.steady_residual > steady_threshold) {
    throw NumericalError("identity: state is not near-steady, residual " + format_number(out.steady_residual));
  }
  const Landscape& land = grid->landscape();
  const std::size_t lo = locate_patch(land, a, false);
  const std::size_t hi = a == b ? lo : locate_patch(land, b, true);
  const std::size_t ja = snap_to_node(*grid, lo, a);
  const std::size_t jb = snap_to_node(*grid, hi, b);
  if (lo == hi) {
    same_patch_identity(u, v, env, resident, mutant, lo, ja, jb, out);
  } else {
    out.spanning = spanning_identity(u, v, resident, mutant, lo, ja, hi, jb);
  }
  return out;
}

}  // namespace patchcomp
