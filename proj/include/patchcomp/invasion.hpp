#pragma once

// Region-based predictions, semi-trivial stability, pairwise invasibility
// scans, sampled ESS / NIS / CSS certificates and prediction-vs-simulation
// cross-validation.

#include <atomic>
#include <exception>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "patchcomp/dynamics.hpp"
#include "patchcomp/eigen.hpp"

namespace patchcomp {

enum class Invasion { Yes, No, Neutral, OutsideTheory };
enum class GlobalVerdict { ResidentWins, MutantWins, Coexistence, OutsideTheory };

inline const char* to_string(Invasion v) {
  switch (v) {
    case Invasion::Yes: return "Yes";
    case Invasion::No: return "No";
    case Invasion::Neutral: return "Neutral";
    case Invasion::OutsideTheory: return "OutsideTheory";
  }
  return "OutsideTheory";
}
inline const char* to_string(GlobalVerdict v) {
  switch (v) {
    case GlobalVerdict::ResidentWins: return "ResidentWins";
    case GlobalVerdict::MutantWins: return "MutantWins";
    case GlobalVerdict::Coexistence: return "Coexistence";
    case GlobalVerdict::OutsideTheory: return "OutsideTheory";
  }
  return "OutsideTheory";
}

struct Prediction {
  Invasion invade_when_rare = Invasion::OutsideTheory;
  GlobalVerdict global_verdict = GlobalVerdict::OutsideTheory;
  RegionLabel region = RegionLabel::Unclassified;
};

inline Prediction predict_outcome(const StrategyVector& p, const StrategyVector& p_hat, const std::vector<double>& d,
                                  const std::vector<double>& d_hat, const PatchEnvironment& env) {
  // One patch: no interfaces, no strategy to compare.
  if (p.size() == 0) return {};
  const RegionLabel region = classify_region(p, p_hat, d, d_hat, ifd_strategy(env));
  Prediction out;
  out.region = region;
  switch (region) {
    case RegionLabel::L1:
    case RegionLabel::S1: out.invade_when_rare = Invasion::Yes; break;
    case RegionLabel::L1star:
    case RegionLabel::S1star:
      out.invade_when_rare = Invasion::Yes;
      out.global_verdict = GlobalVerdict::MutantWins;
      break;
    case RegionLabel::L2:
    case RegionLabel::S2:
      out.invade_when_rare = Invasion::No;
      out.global_verdict = GlobalVerdict::ResidentWins;
      break;
    case RegionLabel::L3:
    case RegionLabel::S3:
      out.invade_when_rare = Invasion::Yes;
      out.global_verdict = GlobalVerdict::Coexistence;
      break;
    case RegionLabel::IFDResident: out.invade_when_rare = Invasion::Neutral; break;
    case RegionLabel::Unclassified: break;
  }
  return out;
}

inline void write_prediction_header(std::ostream& os) { os << "region,invade,verdict\n"; }
inline void write_prediction_row(std::ostream& os, const Prediction& p) {
  os << to_string(p.region) << ',' << to_string(p.invade_when_rare) << ',' << to_string(p.global_verdict) << '\n';
}

/// Landscape, environment and both species.
struct ModelParams {
  Landscape landscape;
  PatchEnvironment env;
  SpeciesTraits resident;
  SpeciesTraits mutant;

  void validate() const {
    const std::size_t n = landscape.patches();
    env.validate(n);
    if (resident.patches() != n) throw ValidationError("resident.d: expected " + std::to_string(n) + " entries");
    if (mutant.patches() != n) throw ValidationError("mutant.d: expected " + std::to_string(n) + " entries");
  }
  ModelParams swapped() const { return {landscape, env, mutant, resident}; }
};

struct SolverConfigs {
  SteadyConfig steady;
  EigenConfig eigen;
  SimConfig sim;
};

/// Runs fn(0..count-1) on at most `workers` threads; results are written by
/// index so the outcome does not depend on scheduling. The first exception
/// is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n = std::min(workers, count);
  for (std::size_t t = 0; t < n; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

enum class Stability { Stable, Unstable, Neutral };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Neutral: return "neutral";
  }
  return "neutral";
}

inline Stability stability_from(double lambda, double tol) {
  if (lambda < -tol) return Stability::Stable;
  if (lambda > tol) return Stability::Unstable;
  return Stability::Neutral;
}

struct StabilityTable {
  double lambda_resident_state = 0.0;  // mutant invading (u*, 0)
  double lambda_mutant_state = 0.0;    // resident invading (0, v*)
  Stability resident_state = Stability::Neutral;
  Stability mutant_state = Stability::Neutral;
};

inline StabilityTable stability_table(const ModelParams& params, const GridPtr& grid, const SolverConfigs& cfg = {}) {
  params.validate();
  StabilityTable t;
  t.lambda_resident_state =
      invasion_fitness(params.landscape, params.env, params.resident, params.mutant, grid, cfg.steady, cfg.eigen).lambda1;
  t.lambda_mutant_state =
      invasion_fitness(params.landscape, params.env, params.mutant, params.resident, grid, cfg.steady, cfg.eigen).lambda1;
  t.resident_state = stability_from(t.lambda_resident_state, cfg.eigen.sign_tol);
  t.mutant_state = stability_from(t.lambda_mutant_state, cfg.eigen.sign_tol);
  return t;
}

struct PIPGrid {
  std::vector<double> resident_axis;
  std::vector<double> mutant_axis;
  std::vector<std::vector<double>> lambda;  // [resident][mutant]
  std::vector<std::vector<Sign>> sign;
};

namespace detail {
inline void require_two_patches(const Landscape& land, const char* what) {
  if (land.patches() != 2) throw ValidationError(std::string(what) + ": defined for two-patch landscapes only");
}
inline void require_positive_scan(const std::vector<double>& v, const std::string& path) {
  if (v.empty()) throw ValidationError(path + ": scan must not be empty");
  detail::require_positive(v, path);
}
}  // namespace detail

/// Scalar strategies on two patches; diffusion d is shared by both species.
/// One resident steady state per row; rows run concurrently.
inline PIPGrid pip(const std::vector<double>& resident_scan, const std::vector<double>& mutant_scan,
                   const std::vector<double>& d, const Landscape& landscape, const PatchEnvironment& env,
                   const GridPtr& grid, const SolverConfigs& cfg = {}, std::size_t workers = 1) {
  detail::require_two_patches(landscape, "pip");
  detail::require_positive_scan(resident_scan, "pip.resident_p1");
  detail::require_positive_scan(mutant_scan, "pip.mutant_p1");
  PIPGrid out{resident_scan, mutant_scan, {}, {}};
  out.lambda.assign(resident_scan.size(), std::vector<double>(mutant_scan.size(), 0.0));
  out.sign.assign(resident_scan.size(), std::vector<Sign>(mutant_scan.size(), Sign::Neutral));
  parallel_for(resident_scan.size(), workers, [&](std::size_t a) {
    const SpeciesTraits res(d, StrategyVector{{resident_scan[a]}}, "resident");
    const auto ustar = solve_resident_steady(landscape, env, res, grid, cfg.steady);
    const auto potential = logistic_potential(ustar, env);
    for (std::size_t b = 0; b < mutant_scan.size(); ++b) {
      const SpeciesTraits mut(d, StrategyVector{{mutant_scan[b]}}, "mutant");
      const double lambda = principal_eigenpair(assemble_linearization(grid, mut, potential), cfg.eigen).lambda1;
      out.lambda[a][b] = lambda;
      out.sign[a][b] = sign_of(lambda, cfg.eigen.sign_tol);
    }
  });
  return out;
}

/// Matrix of lambda1 values: the first row holds the mutant axis, every
/// following row starts with its resident value.
inline void write_pip_csv(std::ostream& os, const PIPGrid& g) {
  os << "resident_p1\\mutant_p1";
  for (double m : g.mutant_axis) os << ',' << format_number(m);
  os << '\n';
  for (std::size_t a = 0; a < g.resident_axis.size(); ++a) {
    os << format_number(g.resident_axis[a]);
    for (double l : g.lambda[a]) os << ',' << format_number(l);
    os << '\n';
  }
}

inline void write_pip_sign_csv(std::ostream& os, const PIPGrid& g) {
  os << "resident_p1\\mutant_p1";
  for (double m : g.mutant_axis) os << ',' << format_number(m);
  os << '\n';
  for (std::size_t a = 0; a < g.resident_axis.size(); ++a) {
    os << format_number(g.resident_axis[a]);
    for (Sign s : g.sign[a]) os << ',' << (s == Sign::Positive ? "+" : s == Sign::Negative ? "-" : "0");
    os << '\n';
  }
}

struct StrategyWitness {
  double resident;
  double mutant;
  double lambda1;
};

struct StrategyCheck {
  bool passed = true;
  std::size_t pairs_checked = 0;
  double min_margin = std::numeric_limits<double>::infinity();  // smallest |lambda1| among checked pairs
  std::vector<StrategyWitness> violations;
};

/// Two-patch setting for the strategy checks: landscape, environment and a
/// diffusion vector shared by resident and mutant.
struct StrategySetting {
  Landscape landscape;
  PatchEnvironment env;
  std::vector<double> d;
  GridPtr grid;
  SolverConfigs cfg;
};

/// p* +- delta s/(samples+1), s = 1..samples, keeping positive values.
inline std::vector<double> strategy_samples(double p_star, double delta, std::size_t samples) {
  if (!(p_star > 0.0)) throw ValidationError("strategy check: p* must be positive");
  if (!(delta > 0.0)) throw ValidationError("strategy check: delta must be positive");
  if (samples < 3) throw ValidationError("strategy check: at least 3 samples per side required");
  std::vector<double> out;
  for (std::size_t s = samples; s >= 1; --s) {
    const double v = p_star - delta * static_cast<double>(s) / static_cast<double>(samples + 1);
    if (v > 0.0) out.push_back(v);
  }
  for (std::size_t s = 1; s <= samples; ++s)
    out.push_back(p_star + delta * static_cast<double>(s) / static_cast<double>(samples + 1));
  return out;
}

namespace detail {
inline double scalar_fitness(const StrategySetting& s, double resident, double mutant) {
  const SpeciesTraits res(s.d, StrategyVector{{resident}}, "resident");
  const SpeciesTraits mut(s.d, StrategyVector{{mutant}}, "mutant");
  return invasion_fitness(s.landscape, s.env, res, mut, s.grid, s.cfg.steady, s.cfg.eigen).lambda1;
}
inline void record(StrategyCheck& c, double res, double mut, double lambda, bool ok) {
  ++c.pairs_checked;
  c.min_margin = std::min(c.min_margin, std::abs(lambda));
  if (!ok) {
    c.passed = false;
    c.violations.push_back({res, mut, lambda});
  }
}
}  // namespace detail

/// Sampled ESS: lambda1(p*, p_hat) < -sign_tol for every sampled p_hat != p*.
inline StrategyCheck ess_check(double p_star, double delta, std::size_t samples, const StrategySetting& s) {
  detail::require_two_patches(s.landscape, "ess_check");
  StrategyCheck out;
  for (double m : strategy_samples(p_star, delta, samples)) {
    const double l = detail::scalar_fitness(s, p_star, m);
    detail::record(out, p_star, m, l, l < -s.cfg.eigen.sign_tol);
  }
  return out;
}

/// Sampled NIS: lambda1(p, p*) > sign_tol for every sampled p != p*.
inline StrategyCheck nis_check(double p_star, double delta, std::size_t samples, const StrategySetting& s) {
  detail::require_two_patches(s.landscape, "nis_check");
  StrategyCheck out;
  for (double r : strategy_samples(p_star, delta, samples)) {
    const double l = detail::scalar_fitness(s, r, p_star);
    detail::record(out, r, p_star, l, l > s.cfg.eigen.sign_tol);
  }
  return out;
}

/// Sampled CSS sign pattern over ordered pairs from {p*} and the samples:
/// lambda1 < 0 when p* <= p < p_hat or p_hat < p <= p*, lambda1 > 0 when
/// p* <= p_hat < p or p < p_hat <= p*. Pairs with p = p_hat, and resident
/// values within the guard band around the IFD strategy (where the resident
/// potential vanishes and lambda1 = 0 identically), are excluded.
inline StrategyCheck css_check(double p_star, double delta, std::size_t samples, const StrategySetting& s) {
  detail::require_two_patches(s.landscape, "css_check");
  const double kbar = s.env.k[1] / s.env.k[0];
  const double guard = 10.0 * s.cfg.eigen.sign_tol * std::max(1.0, kbar);
  auto values = strategy_samples(p_star, delta, samples);
  values.push_back(p_star);
  std::sort(values.begin(), values.end());
  StrategyCheck out;
  for (double res : values) {
    if (std::abs(res - kbar) <= guard) continue;
    const SpeciesTraits rt(s.d, StrategyVector{{res}}, "resident");
    const auto ustar = solve_resident_steady(s.landscape, s.env, rt, s.grid, s.cfg.steady);
    const auto potential = logistic_potential(ustar, s.env);
    for (double mut : values) {
      if (std::abs(mut - res) <= guard) continue;
      const bool expect_negative = (p_star <= res && res < mut) || (mut < res && res <= p_star);
      const bool expect_positive = (p_star <= mut && mut < res) || (res < mut && mut <= p_star);
      if (!expect_negative && !expect_positive) continue;
      const SpeciesTraits mt(s.d, StrategyVector{{mut}}, "mutant");
      const double l = principal_eigenpair(assemble_linearization(s.grid, mt, potential), s.cfg.eigen).lambda1;
      const double tol = s.cfg.eigen.sign_tol;
      detail::record(out, res, mut, l, expect_negative ? l < -tol : l > tol);
    }
  }
  return out;
}

enum class Agreement { Match, Mismatch, Inconclusive, Skipped };

inline const char* to_string(Agreement a) {
  switch (a) {
    case Agreement::Match: return "match";
    case Agreement::Mismatch: return "mismatch";
    case Agreement::Inconclusive: return "inconclusive";
    case Agreement::Skipped: return "skipped";
  }
  return "skipped";
}

struct CrossValidation {
  Prediction prediction;
  std::optional<OutcomeRecord> outcome;
  Agreement agreement = Agreement::Skipped;
};

inline std::optional<Verdict> as_simulation_verdict(GlobalVerdict g) {
  switch (g) {
    case GlobalVerdict::ResidentWins: return Verdict::ResidentWins;
    case GlobalVerdict::MutantWins: return Verdict::MutantWins;
    case GlobalVerdict::Coexistence: return Verdict::Coexistence;
    case GlobalVerdict::OutsideTheory: return std::nullopt;
  }
  return std::nullopt;
}

inline CrossValidation cross_validate(const ModelParams& params, const GridPtr& grid, const SolverConfigs& cfg = {}) {
  params.validate();
  CrossValidation out;
  out.prediction = predict_outcome(params.resident.p(), params.mutant.p(), params.resident.d(), params.mutant.d(),
                                   params.env);
  const auto expected = as_simulation_verdict(out.prediction.global_verdict);
  if (!expected) return out;
  const CompetitionSystem sys(grid, params.env, params.resident, params.mutant);
  out.outcome = simulate_default(sys, cfg.sim, cfg.steady);
  if (out.outcome->verdict == *expected) out.agreement = Agreement::Match;
  else if (out.outcome->verdict == Verdict::Undetermined) out.agreement = Agreement::Inconclusive;
  else out.agreement = Agreement::Mismatch;
  return out;
}

enum class SweepMode { Classify, Fitness };

inline SweepMode parse_sweep_mode(const std::string& s) {
  if (s == "classify") return SweepMode::Classify;
  if (s == "fitness") return SweepMode::Fitness;
  throw ValidationError("sweep.mode: expected \"classify\" or \"fitness\"");
}
inline const char* to_string(SweepMode m) { return m == SweepMode::Classify ? "classify" : "fitness"; }

struct SweepRow {
  StrategyVector resident_p;
  StrategyVector mutant_p;
  Prediction prediction;
  std::optional<double> lambda1;
};

/// Every (resident p, mutant p) pair on top of the base parameters.
inline std::vector<SweepRow> sweep(const ModelParams& base, const std::vector<StrategyVector>& resident_ps,
                                   const std::vector<StrategyVector>& mutant_ps, SweepMode mode, const GridPtr& grid,
                                   const SolverConfigs& cfg = {}, std::size_t workers = 1) {
  base.validate();
  std::vector<SweepRow> rows(resident_ps.size() * mutant_ps.size());
  parallel_for(rows.size(), workers, [&](std::size_t idx) {
    const auto& rp = resident_ps[idx / mutant_ps.size()];
    const auto& mp = mutant_ps[idx % mutant_ps.size()];
    const SpeciesTraits res(base.resident.d(), rp, "sweep.resident_p");
    const SpeciesTraits mut(base.mutant.d(), mp, "sweep.mutant_p");
    SweepRow row{rp, mp, predict_outcome(rp, mp, res.d(), mut.d(), base.env), std::nullopt};
    if (mode == SweepMode::Fitness) {
      row.lambda1 = invasion_fitness(base.landscape, base.env, res, mut, grid, cfg.steady, cfg.eigen).lambda1;
    }
    rows[idx] = std::move(row);
  });
  return rows;
}

inline std::string join_vector(const StrategyVector& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_number(v[i]);
  return s;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "resident_p,mutant_p,region,invade,verdict,lambda1\n";
  for (const auto& r : rows) {
    os << join_vector(r.resident_p) << ',' << join_vector(r.mutant_p) << ',' << to_string(r.prediction.region) << ','
       << to_string(r.prediction.invade_when_rare) << ',' << to_string(r.prediction.global_verdict) << ','
       << (r.lambda1 ? format_number(*r.lambda1) : "") << '\n';
  }
}

}  // namespace patchcomp
