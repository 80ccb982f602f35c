#pragma once

// Landscape geometry, per-patch environment, species traits and the
// strategy-vector orderings used to classify parameter points.

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace patchcomp {

/// Raised when inputs violate a documented invariant. The message carries a
/// field path such as "resident.d[1]".
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails to meet its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string indexed(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

inline void require_positive(const std::vector<double>& v, const std::string& path) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
      throw ValidationError(indexed(path, i) + ": must be a positive finite number");
    }
  }
}

inline void require_size(const std::vector<double>& v, std::size_t n, const std::string& path) {
  if (v.size() != n) {
    throw ValidationError(path + ": expected " + std::to_string(n) + " entries, got " +
                          std::to_string(v.size()));
  }
}

}  // namespace detail

/// Patch geometry 0 = x_0 < x_1 < ... < x_n = L. Patch i (1-based in the
/// mathematics, 0-based here) is the open interval (x_i, x_{i+1}).
class Landscape {
 public:
  explicit Landscape(std::vector<double> boundaries, const std::string& path = "landscape.boundaries")
      : boundaries_(std::move(boundaries)) {
    if (boundaries_.size() < 2) {
      throw ValidationError(path + ": need at least two boundaries (one patch)");
    }
    if (boundaries_.front() != 0.0) {
      throw ValidationError(detail::indexed(path, 0) + ": first boundary must be 0");
    }
    for (std::size_t i = 1; i < boundaries_.size(); ++i) {
      if (!(boundaries_[i] > boundaries_[i - 1]) || !std::isfinite(boundaries_[i])) {
        throw ValidationError(detail::indexed(path, i) + ": boundaries must be strictly increasing");
      }
    }
  }

  std::size_t patches() const { return boundaries_.size() - 1; }
  std::size_t interfaces() const { return patches() - 1; }
  const std::vector<double>& boundaries() const { return boundaries_; }
  double left(std::size_t patch) const { return boundaries_[patch]; }
  double right(std::size_t patch) const { return boundaries_[patch + 1]; }
  double length(std::size_t patch) const { return right(patch) - left(patch); }
  double total_length() const { return boundaries_.back(); }

  bool operator==(const Landscape&) const = default;

 private:
  std::vector<double> boundaries_;
};

/// Per-patch intrinsic growth rates r_i and carrying capacities k_i.
struct PatchEnvironment {
  std::vector<double> r;
  std::vector<double> k;

  void validate(std::size_t patches, const std::string& path = "environment") const {
    detail::require_size(r, patches, path + ".r");
    detail::require_size(k, patches, path + ".k");
    detail::require_positive(r, path + ".r");
    detail::require_positive(k, path + ".k");
  }

  double max_k() const {
    double m = 0.0;
    for (double v : k) m = std::max(m, v);
    return m;
  }
  double min_k() const {
    double m = k.empty() ? 0.0 : k.front();
    for (double v : k) m = std::min(m, v);
    return m;
  }
  bool operator==(const PatchEnvironment&) const = default;
};

/// Positive vector of length n-1: jump ratios, their IFD reference, or any
/// other operand of the componentwise orderings.
struct StrategyVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  bool operator==(const StrategyVector&) const = default;
};

/// p_i = [alpha_i / (1 - alpha_i)] * (d_i / d_{i+1}).
inline StrategyVector derive_jump_ratios(const std::vector<double>& alpha, const std::vector<double>& d,
                                         const std::string& path = "alpha") {
  if (d.size() != alpha.size() + 1) {
    throw ValidationError(path + ": preference vector must have one entry fewer than the diffusion vector");
  }
  detail::require_positive(d, path + "(d)");
  StrategyVector p;
  p.values.reserve(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double a = alpha[i];
    if (!(a > 0.0 && a < 1.0)) {
      throw ValidationError(detail::indexed(path, i) + ": preference must lie strictly inside (0,1)");
    }
    p.values.push_back(a / (1.0 - a) * (d[i] / d[i + 1]));
  }
  return p;
}

/// Inverse of derive_jump_ratios: alpha_i = q / (1 + q), q = p_i d_{i+1} / d_i.
inline std::vector<double> recover_preferences(const StrategyVector& p, const std::vector<double>& d) {
  if (d.size() != p.size() + 1) throw ValidationError("recover_preferences: dimension mismatch");
  std::vector<double> alpha(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = p[i] * d[i + 1] / d[i];
    alpha[i] = q / (1.0 + q);
  }
  return alpha;
}

/// Diffusion vector plus interface jump ratios of one species. Jump ratios
/// may be given directly or through edge preferences; the canonical form is p.
class SpeciesTraits {
 public:
  SpeciesTraits(std::vector<double> d, StrategyVector p, const std::string& path = "traits")
      : d_(std::move(d)), p_(std::move(p)) {
    if (d_.empty()) throw ValidationError(path + ".d: must not be empty");
    detail::require_positive(d_, path + ".d");
    detail::require_size(p_.values, d_.size() - 1, path + ".p");
    detail::require_positive(p_.values, path + ".p");
  }

  static SpeciesTraits from_preferences(std::vector<double> d, const std::vector<double>& alpha,
                                        const std::string& path = "traits") {
    if (d.empty()) throw ValidationError(path + ".d: must not be empty");
    detail::require_positive(d, path + ".d");
    StrategyVector p = derive_jump_ratios(alpha, d, path + ".alpha");
    return SpeciesTraits(std::move(d), std::move(p), path);
  }

  const std::vector<double>& d() const { return d_; }
  const StrategyVector& p() const { return p_; }
  std::size_t patches() const { return d_.size(); }

  /// Cumulative products P_i = p_1 ... p_{i-1} (P_1 = 1), one per patch.
  std::vector<double> cumulative_jumps() const {
    std::vector<double> c(d_.size(), 1.0);
    for (std::size_t i = 1; i < c.size(); ++i) c[i] = c[i - 1] * p_[i - 1];
    return c;
  }

  bool operator==(const SpeciesTraits&) const = default;

 private:
  std::vector<double> d_;
  StrategyVector p_;
};

/// IFD strategy (k_2/k_1, ..., k_n/k_{n-1}).
inline StrategyVector ifd_strategy(const PatchEnvironment& env) {
  if (env.k.size() < 2) throw ValidationError("environment.k: no interfaces");
  detail::require_positive(env.k, "environment.k");
  StrategyVector s;
  for (std::size_t i = 0; i + 1 < env.k.size(); ++i) s.values.push_back(env.k[i + 1] / env.k[i]);
  return s;
}

namespace detail {
inline void require_same_length(const StrategyVector& a, const StrategyVector& b) {
  if (a.size() != b.size()) throw ValidationError("strategy vectors differ in length");
}
inline void require_same_length(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ValidationError("diffusion vectors differ in length");
}
}  // namespace detail

/// a >> b: every component strictly larger. No tolerance.
inline bool strict_dominates(const StrategyVector& a, const StrategyVector& b) {
  detail::require_same_length(a, b);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i] > b[i])) return false;
  return true;
}

/// a >= b componentwise.
inline bool weakly_dominates(const std::vector<double>& a, const std::vector<double>& b) {
  detail::require_same_length(a, b);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i] >= b[i])) return false;
  return true;
}

/// a and b lie strictly on opposite sides of the reference (a >> ref >> b or b >> ref >> a).
inline bool opposite_sides(const StrategyVector& a, const StrategyVector& b, const StrategyVector& ref) {
  return (strict_dominates(a, ref) && strict_dominates(ref, b)) ||
         (strict_dominates(b, ref) && strict_dominates(ref, a));
}

enum class RegionLabel { L1, L1star, L2, L3, S1, S1star, S2, S3, IFDResident, Unclassified };

inline const char* to_string(RegionLabel r) {
  switch (r) {
    case RegionLabel::L1: return "L1";
    case RegionLabel::L1star: return "L1star";
    case RegionLabel::L2: return "L2";
    case RegionLabel::L3: return "L3";
    case RegionLabel::S1: return "S1";
    case RegionLabel::S1star: return "S1star";
    case RegionLabel::S2: return "S2";
    case RegionLabel::S3: return "S3";
    case RegionLabel::IFDResident: return "IFDResident";
    case RegionLabel::Unclassified: return "Unclassified";
  }
  return "Unclassified";
}

/// Region of a (resident, mutant) parameter point. Where sets overlap the more
/// specific label wins: the starred exclusion sets and the opposite-side sets
/// take precedence over the plain invasion sets L1/S1.
inline RegionLabel classify_region(const StrategyVector& p, const StrategyVector& p_hat, const std::vector<double>& d,
                                   const std::vector<double>& d_hat, const StrategyVector& kbar) {
  detail::require_same_length(p, p_hat);
  detail::require_same_length(p, kbar);
  detail::require_same_length(d, d_hat);
  if (d.size() != p.size() + 1) throw ValidationError("classify_region: diffusion/strategy dimension mismatch");
  detail::require_positive(p.values, "p");
  detail::require_positive(p_hat.values, "p_hat");
  detail::require_positive(kbar.values, "kbar");
  detail::require_positive(d, "d");
  detail::require_positive(d_hat, "d_hat");

  if (p == kbar) return RegionLabel::IFDResident;

  const bool d_ge = weakly_dominates(d, d_hat);
  const bool dhat_ge = weakly_dominates(d_hat, d);

  if (strict_dominates(p, kbar)) {
    if (strict_dominates(p, p_hat) && strict_dominates(p_hat, kbar) && d_ge) return RegionLabel::L1star;
    if (strict_dominates(p_hat, p) && dhat_ge) return RegionLabel::L2;
    if (strict_dominates(kbar, p_hat)) return RegionLabel::L3;
    if (strict_dominates(p, p_hat) && d_ge) return RegionLabel::L1;
    return RegionLabel::Unclassified;
  }
  if (strict_dominates(kbar, p)) {
    if (strict_dominates(kbar, p_hat) && strict_dominates(p_hat, p) && d_ge) return RegionLabel::S1star;
    if (strict_dominates(p, p_hat) && dhat_ge) return RegionLabel::S2;
    if (strict_dominates(p_hat, kbar)) return RegionLabel::S3;
    if (strict_dominates(p_hat, p) && d_ge) return RegionLabel::S1;
    return RegionLabel::Unclassified;
  }
  return RegionLabel::Unclassified;
}

inline bool is_l_region(RegionLabel r) {
  return r == RegionLabel::L1 || r == RegionLabel::L1star || r == RegionLabel::L2 || r == RegionLabel::L3;
}
inline bool is_s_region(RegionLabel r) {
  return r == RegionLabel::S1 || r == RegionLabel::S1star || r == RegionLabel::S2 || r == RegionLabel::S3;
}

}  // namespace patchcomp
