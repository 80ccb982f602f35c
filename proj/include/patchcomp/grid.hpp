#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "patchcomp/landscape.hpp"

namespace patchcomp {

/// Node layout over the patch union. Every patch owns its own endpoints, so
/// an interior interface x_i carries two collocated nodes: the last node of
/// patch i (left trace) and the first node of patch i+1 (right trace).
class Grid {
 public:
  Grid(Landscape landscape, std::vector<std::vector<double>> nodes)
      : landscape_(std::move(landscape)), nodes_(std::move(nodes)) {
    if (nodes_.size() != landscape_.patches()) throw ValidationError("grid: one node list per patch required");
    offsets_.reserve(nodes_.size() + 1);
    offsets_.push_back(0);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto& x = nodes_[i];
      const std::string path = "grid.patch[" + std::to_string(i) + "]";
      if (x.size() < 2) throw ValidationError(path + ": needs at least one subinterval");
      if (x.front() != landscape_.left(i) || x.back() != landscape_.right(i)) {
        throw ValidationError(path + ": patch endpoints must be nodes");
      }
      for (std::size_t j = 1; j < x.size(); ++j) {
        if (!(x[j] > x[j - 1])) throw ValidationError(path + ": nodes must be strictly increasing");
      }
      offsets_.push_back(offsets_.back() + x.size());
    }
  }

  const Landscape& landscape() const { return landscape_; }
  std::size_t patches() const { return nodes_.size(); }
  const std::vector<double>& nodes(std::size_t patch) const { return nodes_[patch]; }
  std::size_t subintervals(std::size_t patch) const { return nodes_[patch].size() - 1; }
  std::size_t offset(std::size_t patch) const { return offsets_[patch]; }
  std::size_t index(std::size_t patch, std::size_t node) const { return offsets_[patch] + node; }
  std::size_t total_dofs() const { return offsets_.back(); }
  /// Unknowns left after eliminating every right trace.
  std::size_t reduced_dofs() const { return total_dofs() - (patches() - 1); }

  double min_spacing() const {
    double h = std::numeric_limits<double>::infinity();
    for (const auto& x : nodes_)
      for (std::size_t j = 1; j < x.size(); ++j) h = std::min(h, x[j] - x[j - 1]);
    return h;
  }
  double max_spacing() const {
    double h = 0.0;
    for (const auto& x : nodes_)
      for (std::size_t j = 1; j < x.size(); ++j) h = std::max(h, x[j] - x[j - 1]);
    return h;
  }

  bool operator==(const Grid& o) const { return landscape_ == o.landscape_ && nodes_ == o.nodes_; }

 private:
  Landscape landscape_;
  std::vector<std::vector<double>> nodes_;
  std::vector<std::size_t> offsets_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Either a target spacing or explicit per-patch subinterval counts.
struct GridResolution {
  std::optional<double> h;
  std::vector<std::size_t> per_patch;

  static GridResolution spacing(double h) { return GridResolution{h, {}}; }
  static GridResolution counts(std::vector<std::size_t> n) { return GridResolution{std::nullopt, std::move(n)}; }
  static GridResolution uniform_count(std::size_t patches, std::size_t n) {
    return counts(std::vector<std::size_t>(patches, n));
  }
};

inline std::vector<double> uniform_nodes(double a, double b, std::size_t n) {
  std::vector<double> x(n + 1);
  for (std::size_t j = 0; j < n; ++j) x[j] = a + (b - a) * static_cast<double>(j) / static_cast<double>(n);
  x[n] = b;
  return x;
}

/// Uniform nodes per patch. With a target spacing h each patch receives the
/// smallest count whose spacing does not exceed h; every patch needs >= 4.
inline GridPtr build_grid(const Landscape& landscape, const GridResolution& res) {
  const std::size_t n = landscape.patches();
  std::vector<std::size_t> counts;
  if (res.h) {
    const double h = *res.h;
    if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("grid.h: must be positive");
    for (std::size_t i = 0; i < n; ++i) {
      const double len = landscape.length(i);
      const double ratio = len / h;
      if (ratio < 4.0 * (1.0 - 1e-12)) {
        throw ValidationError("grid.h: patch " + std::to_string(i + 1) + " is shorter than 4h; use a finer resolution");
      }
      counts.push_back(static_cast<std::size_t>(std::ceil(ratio * (1.0 - 1e-12))));
    }
  } else {
    if (res.per_patch.size() != n) throw ValidationError("grid.per_patch: one count per patch required");
    for (std::size_t i = 0; i < n; ++i) {
      if (res.per_patch[i] < 4) {
        throw ValidationError("grid.per_patch[" + std::to_string(i) + "]: at least 4 subintervals required");
      }
    }
    counts = res.per_patch;
  }
  std::vector<std::vector<double>> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back(uniform_nodes(landscape.left(i), landscape.right(i), counts[i]));
  return std::make_shared<const Grid>(landscape, std::move(nodes));
}

/// Values at every grid node, both traces included.
class PiecewiseField {
 public:
  PiecewiseField() = default;
  explicit PiecewiseField(GridPtr grid, double fill = 0.0)
      : grid_(std::move(grid)), values_(grid_->total_dofs(), fill) {}
  PiecewiseField(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->total_dofs()) throw ValidationError("field: value count does not match grid");
  }

  const GridPtr& grid_ptr() const { return grid_; }
  const Grid& grid() const { return *grid_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }

  std::span<const double> patch(std::size_t i) const {
    return {values_.data() + grid_->offset(i), grid_->nodes(i).size()};
  }
  std::span<double> patch(std::size_t i) { return {values_.data() + grid_->offset(i), grid_->nodes(i).size()}; }

  double at(std::size_t patch, std::size_t node) const { return values_[grid_->index(patch, node)]; }

  /// u(x_i^-) for the interface between patch i and patch i+1.
  double left_trace(std::size_t interface) const { return patch(interface).back(); }
  /// u(x_i^+) for the interface between patch i and patch i+1.
  double right_trace(std::size_t interface) const { return patch(interface + 1).front(); }

  double max() const { return *std::max_element(values_.begin(), values_.end()); }
  double min() const { return *std::min_element(values_.begin(), values_.end()); }

  /// u(x_i^+) = p_i u(x_i^-) at every interface, within rel_tol.
  bool jump_consistent(const StrategyVector& p, double rel_tol = 1e-12) const {
    for (std::size_t i = 0; i + 1 < grid_->patches(); ++i) {
      const double expect = p[i] * left_trace(i);
      const double got = right_trace(i);
      if (std::abs(got - expect) > rel_tol * std::max({std::abs(got), std::abs(expect), 1e-300})) return false;
    }
    return true;
  }

  /// Piecewise-linear evaluation inside a patch (x clamped to the patch).
  double evaluate(std::size_t patch_index, double x) const {
    const auto& xs = grid_->nodes(patch_index);
    const auto vals = patch(patch_index);
    if (x <= xs.front()) return vals.front();
    if (x >= xs.back()) return vals.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    return (1.0 - t) * vals[j - 1] + t * vals[j];
  }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Composite trapezoid integral over the patch union.
inline double integrate_field(const PiecewiseField& f) {
  double s = 0.0;
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < g.patches(); ++i) {
    const auto& x = g.nodes(i);
    const auto v = f.patch(i);
    for (std::size_t j = 1; j < x.size(); ++j) s += 0.5 * (x[j] - x[j - 1]) * (v[j] + v[j - 1]);
  }
  return s;
}

/// Trapezoid weights of one patch's nodes.
inline std::vector<double> trapezoid_weights(const std::vector<double>& x) {
  std::vector<double> w(x.size(), 0.0);
  for (std::size_t j = 1; j < x.size(); ++j) {
    const double h = x[j] - x[j - 1];
    w[j - 1] += 0.5 * h;
    w[j] += 0.5 * h;
  }
  return w;
}

/// Derivative at x0 of the quadratic through (x0,f0), (x1,f1), (x2,f2).
inline double three_point_derivative(double x0, double x1, double x2, double f0, double f1, double f2) {
  const double h1 = x1 - x0;
  const double h2 = x2 - x0;
  return f0 * (-(h1 + h2) / (h1 * h2)) + f1 * (h2 / (h1 * (h2 - h1))) + f2 * (-h1 / (h2 * (h2 - h1)));
}

/// One-sided second-order derivative at node j of a patch. Forward stencil
/// when `from_right` (the x^+ limit), backward otherwise.
inline double one_sided_derivative(const PiecewiseField& f, std::size_t patch, std::size_t j, bool from_right) {
  const auto& x = f.grid().nodes(patch);
  const auto v = f.patch(patch);
  if (from_right) {
    if (j + 2 >= x.size()) throw ValidationError("one_sided_derivative: stencil leaves patch");
    return three_point_derivative(x[j], x[j + 1], x[j + 2], v[j], v[j + 1], v[j + 2]);
  }
  if (j < 2) throw ValidationError("one_sided_derivative: stencil leaves patch");
  return three_point_derivative(x[j], x[j - 1], x[j - 2], v[j], v[j - 1], v[j - 2]);
}

/// Second-order nodal derivative on one patch: centered inside, one-sided at the ends.
inline std::vector<double> nodal_derivative(const PiecewiseField& f, std::size_t patch) {
  const auto& x = f.grid().nodes(patch);
  const auto v = f.patch(patch);
  const std::size_t m = x.size();
  std::vector<double> d(m, 0.0);
  if (m == 2) {
    d[0] = d[1] = (v[1] - v[0]) / (x[1] - x[0]);
    return d;
  }
  d[0] = three_point_derivative(x[0], x[1], x[2], v[0], v[1], v[2]);
  d[m - 1] = three_point_derivative(x[m - 1], x[m - 2], x[m - 3], v[m - 1], v[m - 2], v[m - 3]);
  for (std::size_t j = 1; j + 1 < m; ++j) {
    d[j] = three_point_derivative(x[j], x[j - 1], x[j + 1], v[j], v[j - 1], v[j + 1]);
  }
  return d;
}

/// Maps between full nodal values and the reduced unknowns that remain after
/// eliminating right traces through u(x_i^+) = p_i u(x_i^-). Reduced unknowns
/// are numbered left to right, so nearest-neighbour couplings stay tridiagonal.
class JumpElimination {
 public:
  JumpElimination(const Grid& grid, const StrategyVector& p) {
    if (p.size() + 1 != grid.patches()) throw ValidationError("jump ratios do not match the grid's patch count");
    reduced_.resize(grid.total_dofs());
    factor_.assign(grid.total_dofs(), 1.0);
    std::size_t r = 0;
    for (std::size_t i = 0; i < grid.patches(); ++i) {
      const std::size_t m = grid.nodes(i).size();
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t k = grid.index(i, j);
        if (i > 0 && j == 0) {
          reduced_[k] = r - 1;
          factor_[k] = p[i - 1];
        } else {
          reduced_[k] = r++;
        }
      }
    }
    reduced_size_ = r;
  }

  std::size_t reduced_size() const { return reduced_size_; }
  std::size_t full_size() const { return reduced_.size(); }
  std::size_t reduced_index(std::size_t full) const { return reduced_[full]; }
  double factor(std::size_t full) const { return factor_[full]; }

  std::vector<double> expand(std::span<const double> y) const {
    std::vector<double> u(reduced_.size());
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = factor_[k] * y[reduced_[k]];
    return u;
  }

  /// Reduced representative of a field (right traces are dropped).
  std::vector<double> restrict_to_reduced(std::span<const double> u) const {
    std::vector<double> y(reduced_size_, 0.0);
    for (std::size_t k = 0; k < u.size(); ++k)
      if (!is_right_trace(k)) y[reduced_[k]] = u[k];
    return y;
  }

 private:
  bool is_right_trace(std::size_t k) const { return k > 0 && reduced_[k] == reduced_[k - 1]; }

  std::vector<std::size_t> reduced_;
  std::vector<double> factor_;
  std::size_t reduced_size_ = 0;
};

/// Jump-consistent field that is constant c_i on each patch with c_1 = base.
inline PiecewiseField jump_consistent_constant(const GridPtr& grid, const StrategyVector& p, double base = 1.0) {
  PiecewiseField f(grid);
  double level = base;
  for (std::size_t i = 0; i < grid->patches(); ++i) {
    if (i > 0) level *= p[i - 1];
    for (double& v : f.patch(i)) v = level;
  }
  return f;
}

/// Field equal to value[i] on patch i.
inline PiecewiseField piecewise_constant(const GridPtr& grid, const std::vector<double>& value) {
  if (value.size() != grid->patches()) throw ValidationError("piecewise_constant: one value per patch required");
  PiecewiseField f(grid);
  for (std::size_t i = 0; i < grid->patches(); ++i)
    for (double& v : f.patch(i)) v = value[i];
  return f;
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// CSV rows (patch_index, x, value); patch indices are 1-based.
inline void write_field_csv(std::ostream& os, const PiecewiseField& f, const std::string& value_name = "value") {
  os << "patch_index,x," << value_name << "\n";
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < g.patches(); ++i) {
    const auto& x = g.nodes(i);
    const auto v = f.patch(i);
    for (std::size_t j = 0; j < x.size(); ++j) os << (i + 1) << ',' << format_number(x[j]) << ',' << format_number(v[j]) << '\n';
  }
}

}  // namespace patchcomp
