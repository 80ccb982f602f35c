#pragma once

// Assembly of d_i u_xx + c(x) u with density jumps u(x_i^+) = p_i u(x_i^-),
// balanced flux and Neumann ends, over the reduced unknowns that remain
// after eliminating right traces.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "patchcomp/grid.hpp"
#include "patchcomp/tridiagonal.hpp"

namespace patchcomp {

/// One grid edge in reduced coordinates: contributes a (f0 y_r0 - f1 y_r1)^2
/// to the stiffness form.
struct OperatorEdge {
  std::size_t r0, r1;
  double f0, f1, a;
};

/// Pointwise operator A = M^{-1}(-K + D) on reduced unknowns, with K the
/// weighted stiffness matrix, M the lumped weighted mass and D the weighted
/// potential. The weight on patch i is 1/(p_1 ... p_{i-1}).
class LinearOperator {
 public:
  LinearOperator(GridPtr grid, std::vector<double> d, StrategyVector p, const std::optional<PiecewiseField>& potential)
      : grid_(std::move(grid)), d_(std::move(d)), p_(std::move(p)), elim_(*grid_, p_) {
    const Grid& g = *grid_;
    if (d_.size() != g.patches()) throw ValidationError("operator: diffusion vector does not match the grid");
    if (potential && potential->grid().total_dofs() != g.total_dofs()) {
      throw ValidationError("operator: potential is not sampled on the grid");
    }
    const std::size_t nr = elim_.reduced_size();
    stiffness_ = Tridiagonal(nr);
    mass_.assign(nr, 0.0);
    potential_.assign(nr, 0.0);
    full_weight_.assign(g.total_dofs(), 0.0);

    double cumulative = 1.0;
    for (std::size_t i = 0; i < g.patches(); ++i) {
      if (i > 0) cumulative *= p_[i - 1];
      const double w = 1.0 / cumulative;
      const auto& x = g.nodes(i);
      const auto q = trapezoid_weights(x);
      for (std::size_t j = 0; j < x.size(); ++j) {
        const std::size_t k = g.index(i, j);
        const std::size_t r = elim_.reduced_index(k);
        const double f = elim_.factor(k);
        full_weight_[k] = w * q[j];
        mass_[r] += w * q[j] * f * f;
        if (potential) potential_[r] += w * q[j] * (*potential)[k] * f * f;
      }
      for (std::size_t j = 1; j < x.size(); ++j) {
        const std::size_t k0 = g.index(i, j - 1), k1 = g.index(i, j);
        OperatorEdge e{elim_.reduced_index(k0), elim_.reduced_index(k1), elim_.factor(k0), elim_.factor(k1),
                       w * d_[i] / (x[j] - x[j - 1])};
        stiffness_.diag[e.r0] += e.a * e.f0 * e.f0;
        stiffness_.diag[e.r1] += e.a * e.f1 * e.f1;
        stiffness_.upper[e.r0] -= e.a * e.f0 * e.f1;
        stiffness_.lower[e.r1] -= e.a * e.f0 * e.f1;
        edges_.push_back(e);
      }
    }

    matrix_ = Tridiagonal(nr);
    for (std::size_t r = 0; r < nr; ++r) {
      potential_[r] /= mass_[r];
      matrix_.diag[r] = -stiffness_.diag[r] / mass_[r] + potential_[r];
      matrix_.lower[r] = -stiffness_.lower[r] / mass_[r];
      matrix_.upper[r] = -stiffness_.upper[r] / mass_[r];
    }
  }

  const GridPtr& grid_ptr() const { return grid_; }
  const Grid& grid() const { return *grid_; }
  const std::vector<double>& d() const { return d_; }
  const StrategyVector& p() const { return p_; }
  const JumpElimination& elimination() const { return elim_; }
  std::size_t size() const { return mass_.size(); }

  /// Banded pointwise matrix over reduced unknowns.
  const Tridiagonal& matrix() const { return matrix_; }
  /// Weighted stiffness (symmetric, positive semidefinite).
  const Tridiagonal& stiffness() const { return stiffness_; }
  /// Symmetrization weights: weighted lumped mass per reduced unknown.
  const std::vector<double>& mass() const { return mass_; }
  /// Pointwise potential per reduced unknown (mass-averaged c).
  const std::vector<double>& potential() const { return potential_; }
  /// Patch weight times trapezoid weight at every full DOF.
  const std::vector<double>& full_weight() const { return full_weight_; }
  const std::vector<OperatorEdge>& edges() const { return edges_; }

  /// M^{1/2} A M^{-1/2}.
  SymTridiagonal symmetrized() const {
    const std::size_t n = size();
    SymTridiagonal s{matrix_.diag, std::vector<double>(n > 0 ? n - 1 : 0, 0.0)};
    for (std::size_t r = 0; r + 1 < n; ++r) s.b[r] = -stiffness_.upper[r] / std::sqrt(mass_[r] * mass_[r + 1]);
    return s;
  }

  /// max |S - S^T| / ||S||_inf of the similarity-transformed matrix,
  /// formed directly from the pointwise entries.
  double antisymmetry() const {
    double worst = 0.0;
    Tridiagonal s(size());
    for (std::size_t r = 0; r < size(); ++r) {
      s.diag[r] = matrix_.diag[r];
      if (r > 0) s.lower[r] = std::sqrt(mass_[r]) * matrix_.lower[r] / std::sqrt(mass_[r - 1]);
      if (r + 1 < size()) s.upper[r] = std::sqrt(mass_[r]) * matrix_.upper[r] / std::sqrt(mass_[r + 1]);
    }
    for (std::size_t r = 0; r + 1 < size(); ++r) worst = std::max(worst, std::abs(s.upper[r] - s.lower[r + 1]));
    const double norm = s.inf_norm();
    return norm > 0.0 ? worst / norm : 0.0;
  }

  /// y^T K y from edge contributions (no cancellation between large terms).
  double stiffness_form(std::span<const double> y) const {
    double s = 0.0;
    for (const auto& e : edges_) {
      const double diff = e.f0 * y[e.r0] - e.f1 * y[e.r1];
      s += e.a * diff * diff;
    }
    return s;
  }

  /// (-y^T K y + y^T M c y) / y^T M y.
  double rayleigh_quotient(std::span<const double> y) const {
    double num = -stiffness_form(y), den = 0.0;
    for (std::size_t r = 0; r < size(); ++r) {
      num += mass_[r] * potential_[r] * y[r] * y[r];
      den += mass_[r] * y[r] * y[r];
    }
    return num / den;
  }

  std::vector<double> apply_reduced(std::span<const double> y) const { return matrix_.apply(y); }

  /// A applied to a field; the field is read through its reduced representative.
  PiecewiseField apply(const PiecewiseField& u) const {
    const auto y = elim_.restrict_to_reduced(u.values());
    return PiecewiseField(grid_, elim_.expand(matrix_.apply(y)));
  }

  std::vector<double> reduce(const PiecewiseField& u) const { return elim_.restrict_to_reduced(u.values()); }
  PiecewiseField expand(std::span<const double> y) const { return PiecewiseField(grid_, elim_.expand(y)); }

  /// Mass-weighted projection of nodal values g onto reduced unknowns:
  /// (sum_k w_k f_k g_k) / M_r. Used for reaction terms.
  std::vector<double> project(std::span<const double> g) const {
    std::vector<double> out(size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) out[elim_.reduced_index(k)] += full_weight_[k] * elim_.factor(k) * g[k];
    for (std::size_t r = 0; r < size(); ++r) out[r] /= mass_[r];
    return out;
  }

  /// (sum_k w_k f_k^2 c_k) / M_r: the reduced diagonal of a pointwise multiplier.
  std::vector<double> project_diagonal(std::span<const double> c) const {
    std::vector<double> out(size(), 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      const double f = elim_.factor(k);
      out[elim_.reduced_index(k)] += full_weight_[k] * f * f * c[k];
    }
    for (std::size_t r = 0; r < size(); ++r) out[r] /= mass_[r];
    return out;
  }

  /// Weighted sum y_c^T M A y for the jump-consistent constant y_c; zero for
  /// pure diffusion (discrete conservation).
  double conservation_defect(std::span<const double> y) const {
    const auto ay = matrix_.apply(y);
    const auto yc = null_vector();
    double s = 0.0;
    for (std::size_t r = 0; r < size(); ++r) s += yc[r] * mass_[r] * (ay[r] - potential_[r] * y[r]);
    return s;
  }

  /// Reduced form of the jump-consistent constant (1, p_1, p_1 p_2, ...).
  std::vector<double> null_vector() const {
    return elim_.restrict_to_reduced(jump_consistent_constant(grid_, p_).values());
  }

 private:
  GridPtr grid_;
  std::vector<double> d_;
  StrategyVector p_;
  JumpElimination elim_;
  Tridiagonal stiffness_;
  Tridiagonal matrix_;
  std::vector<double> mass_;
  std::vector<double> potential_;
  std::vector<double> full_weight_;
  std::vector<OperatorEdge> edges_;
};

inline void require_traits_fit(const Grid& grid, const SpeciesTraits& traits) {
  if (traits.patches() != grid.patches()) {
    throw ValidationError("traits.d: expected " + std::to_string(grid.patches()) + " entries for this landscape");
  }
}

/// d_i u_xx with the species' interface conditions and Neumann ends.
inline LinearOperator assemble_diffusion(const GridPtr& grid, const SpeciesTraits& traits) {
  require_traits_fit(*grid, traits);
  return LinearOperator(grid, traits.d(), traits.p(), std::nullopt);
}

/// d_i phi_xx + c(x) phi with the species' interface conditions and Neumann ends.
inline LinearOperator assemble_linearization(const GridPtr& grid, const SpeciesTraits& traits,
                                             const PiecewiseField& potential) {
  require_traits_fit(*grid, traits);
  return LinearOperator(grid, traits.d(), traits.p(), potential);
}

/// c = r_i (1 - scale * u_i / k_i) sampled at every DOF.
inline PiecewiseField logistic_potential(const PiecewiseField& u, const PatchEnvironment& env, double scale = 1.0) {
  PiecewiseField c(u.grid_ptr());
  for (std::size_t i = 0; i < u.grid().patches(); ++i) {
    const auto src = u.patch(i);
    auto dst = c.patch(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] = env.r[i] * (1.0 - scale * src[j] / env.k[i]);
  }
  return c;
}

}  // namespace patchcomp
