#pragma once

// Change of variables that removes the density jumps: w_i = u_i / P_i on a
// stretched coordinate xi, with P_i = p_1 ... p_{i-1}. The transformed
// problem has continuous density and flux, and its independent finite-volume
// solve serves as an oracle for the direct discretization.

#include <algorithm>
#include <cmath>
#include <vector>

#include "patchcomp/grid.hpp"
#include "patchcomp/tridiagonal.hpp"

namespace patchcomp {

struct TransformedProblem {
  Landscape physical;
  std::vector<double> xi_boundaries;
  std::vector<double> D;
  std::vector<double> ktilde;
  std::vector<double> r;
  std::vector<double> scale;

  Landscape xi_landscape() const { return Landscape(xi_boundaries, "transform.xi"); }
};

inline TransformedProblem to_transformed(const Landscape& landscape, const PatchEnvironment& env,
                                         const SpeciesTraits& traits) {
  const std::size_t n = landscape.patches();
  env.validate(n);
  if (traits.patches() != n) throw ValidationError("traits.d: dimension does not match the landscape");
  TransformedProblem t{landscape, {0.0}, {}, {}, env.r, traits.cumulative_jumps()};
  for (std::size_t i = 0; i < n; ++i) {
    const double s = t.scale[i];
    t.xi_boundaries.push_back(t.xi_boundaries.back() + s * landscape.length(i));
    t.D.push_back(traits.d()[i] * s * s);
    t.ktilde.push_back(env.k[i] / s);
  }
  return t;
}

namespace detail {
inline bool same_boundaries(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > 1e-12 * std::max(1.0, std::abs(b[i]))) return false;
  return true;
}
}  // namespace detail

/// Field on a xi-grid -> physical field u = P_i w at x = x_{i-1} + (xi - xi_{i-1}) / P_i.
inline PiecewiseField pull_back(const PiecewiseField& w, const TransformedProblem& t) {
  const Grid& g = w.grid();
  if (!detail::same_boundaries(g.landscape().boundaries(), t.xi_boundaries)) {
    throw ValidationError("pull_back: field is not defined on the transformed grid");
  }
  std::vector<std::vector<double>> nodes;
  std::vector<double> values;
  for (std::size_t i = 0; i < g.patches(); ++i) {
    std::vector<double> x;
    for (double xi : g.nodes(i)) x.push_back(t.physical.left(i) + (xi - t.xi_boundaries[i]) / t.scale[i]);
    x.front() = t.physical.left(i);
    x.back() = t.physical.right(i);
    nodes.push_back(std::move(x));
    for (double v : w.patch(i)) values.push_back(t.scale[i] * v);
  }
  return PiecewiseField(std::make_shared<const Grid>(t.physical, std::move(nodes)), std::move(values));
}

/// Physical field -> xi-grid field w = u / P_i.
inline PiecewiseField push_forward(const PiecewiseField& u, const TransformedProblem& t) {
  const Grid& g = u.grid();
  if (!(g.landscape() == t.physical)) throw ValidationError("push_forward: field is not defined on the physical grid");
  const Landscape xl = t.xi_landscape();
  std::vector<std::vector<double>> nodes;
  std::vector<double> values;
  for (std::size_t i = 0; i < g.patches(); ++i) {
    std::vector<double> xi;
    for (double x : g.nodes(i)) xi.push_back(t.xi_boundaries[i] + t.scale[i] * (x - t.physical.left(i)));
    xi.front() = xl.left(i);
    xi.back() = xl.right(i);
    nodes.push_back(std::move(xi));
    for (double v : u.patch(i)) values.push_back(v / t.scale[i]);
  }
  return PiecewiseField(std::make_shared<const Grid>(xl, std::move(nodes)), std::move(values));
}

/// Cell-centred finite volumes for D w_xixi + r w (1 - w / ktilde) = 0 with
/// N cells per patch, harmonic interface fluxes and zero-flux ends, solved
/// by Newton. The result lives on a xi-grid whose nodes are the patch ends
/// plus the cell centres.
inline PiecewiseField solve_transformed_steady(const TransformedProblem& t, std::size_t cells_per_patch,
                                               double tol = 1e-13, int max_iters = 100) {
  const std::size_t n = t.D.size();
  const std::size_t m = cells_per_patch;
  if (m < 2) throw ValidationError("oracle: at least two cells per patch required");
  const std::size_t nc = n * m;
  std::vector<double> width(nc), D(nc), r(nc), kt(nc), w(nc);
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = (t.xi_boundaries[i + 1] - t.xi_boundaries[i]) / static_cast<double>(m);
    for (std::size_t c = 0; c < m; ++c) {
      const std::size_t j = i * m + c;
      width[j] = dx;
      D[j] = t.D[i];
      r[j] = t.r[i];
      kt[j] = t.ktilde[i];
      w[j] = t.ktilde[i];
    }
  }
  // Face conductance between cells j and j+1.
  std::vector<double> g(nc > 0 ? nc - 1 : 0);
  for (std::size_t j = 0; j + 1 < nc; ++j) g[j] = 1.0 / (0.5 * width[j] / D[j] + 0.5 * width[j + 1] / D[j + 1]);

  double scale = 0.0, wmax = 0.0, stiff = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    scale = std::max(scale, t.r[i] * t.ktilde[i]);
    wmax = std::max(wmax, t.ktilde[i]);
  }
  for (std::size_t j = 0; j + 1 < nc; ++j) stiff = std::max(stiff, g[j] / std::min(width[j], width[j + 1]));
  // Residual floor set by rounding in the flux differences.
  const double threshold = tol * scale + 64.0 * std::numeric_limits<double>::epsilon() * stiff * wmax;

  auto residual = [&](const std::vector<double>& y) {
    std::vector<double> f(nc);
    for (std::size_t j = 0; j < nc; ++j) {
      double flux = 0.0;
      if (j + 1 < nc) flux += g[j] * (y[j + 1] - y[j]);
      if (j > 0) flux -= g[j - 1] * (y[j] - y[j - 1]);
      f[j] = flux / width[j] + r[j] * y[j] * (1.0 - y[j] / kt[j]);
    }
    return f;
  };
  auto norm = [](const std::vector<double>& f) {
    double s = 0.0;
    for (double v : f) s = std::max(s, std::abs(v));
    return s;
  };

  auto f = residual(w);
  double fn = norm(f);
  for (int it = 0; it < max_iters && fn > threshold; ++it) {
    Tridiagonal J(nc);
    for (std::size_t j = 0; j < nc; ++j) {
      double diag = r[j] * (1.0 - 2.0 * w[j] / kt[j]);
      if (j + 1 < nc) {
        diag -= g[j] / width[j];
        J.upper[j] = g[j] / width[j];
      }
      if (j > 0) {
        diag -= g[j - 1] / width[j];
        J.lower[j] = g[j - 1] / width[j];
      }
      J.diag[j] = diag;
    }
    std::vector<double> rhs(nc);
    for (std::size_t j = 0; j < nc; ++j) rhs[j] = -f[j];
    const auto step = solve_tridiagonal(J, rhs);
    double alpha = 1.0;
    for (int ls = 0; ls < 40; ++ls) {
      std::vector<double> trial(nc);
      bool positive = true;
      for (std::size_t j = 0; j < nc; ++j) {
        trial[j] = w[j] + alpha * step[j];
        if (!(trial[j] > 0.0)) positive = false;
      }
      if (positive) {
        auto ft = residual(trial);
        const double tn = norm(ft);
        if (tn < fn || tn <= threshold) {
          w = std::move(trial);
          f = std::move(ft);
          fn = tn;
          break;
        }
      }
      alpha *= 0.5;
      if (ls == 39) throw NumericalError("oracle: line search failed, residual " + format_number(fn));
    }
  }
  if (fn > threshold) throw NumericalError("oracle: Newton did not converge, residual " + format_number(fn));

  // Nodes: patch ends plus cell centres.
  std::vector<std::vector<double>> nodes(n);
  std::vector<double> values;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = t.xi_boundaries[i];
    nodes[i].push_back(a);
    for (std::size_t c = 0; c < m; ++c) nodes[i].push_back(a + (static_cast<double>(c) + 0.5) * width[i * m]);
    nodes[i].push_back(t.xi_boundaries[i + 1]);

    const std::size_t first = i * m, last = i * m + m - 1;
    auto face_value = [&](std::size_t jl, std::size_t jr) {
      const double gl = D[jl] / (0.5 * width[jl]);
      const double gr = D[jr] / (0.5 * width[jr]);
      return (gl * w[jl] + gr * w[jr]) / (gl + gr);
    };
    values.push_back(i == 0 ? (9.0 * w[first] - w[first + 1]) / 8.0 : face_value(first - 1, first));
    for (std::size_t c = 0; c < m; ++c) values.push_back(w[first + c]);
    values.push_back(i + 1 == n ? (9.0 * w[last] - w[last - 1]) / 8.0 : face_value(last, last + 1));
  }
  return PiecewiseField(std::make_shared<const Grid>(t.xi_landscape(), std::move(nodes)), std::move(values));
}

/// Resident steady state through the transformed route, in physical coordinates.
inline PiecewiseField transform_route_steady(const Landscape& landscape, const PatchEnvironment& env,
                                             const SpeciesTraits& traits, std::size_t cells_per_patch) {
  const auto t = to_transformed(landscape, env, traits);
  return pull_back(solve_transformed_steady(t, cells_per_patch), t);
}

/// max |a - b| / max |b| with a read piecewise-linearly at b's nodes.
inline double relative_sup_difference(const PiecewiseField& a, const PiecewiseField& b) {
  const Grid& gb = b.grid();
  if (gb.patches() != a.grid().patches()) throw ValidationError("fields live on different landscapes");
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < gb.patches(); ++i) {
    const auto& x = gb.nodes(i);
    const auto v = b.patch(i);
    for (std::size_t j = 0; j < x.size(); ++j) {
      diff = std::max(diff, std::abs(a.evaluate(i, x[j]) - v[j]));
      ref = std::max(ref, std::abs(v[j]));
    }
  }
  return ref > 0.0 ? diff / ref : diff;
}

}  // namespace patchcomp
