#pragma once

// JSON run configuration. Parsing validates every field and reports errors
// with a field path; serialization writes back exactly what was parsed.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "patchcomp/invasion.hpp"

namespace patchcomp {

using json = nlohmann::json;

/// Species as written in a config: diffusion plus either p or alpha.
struct TraitsSpec {
  std::vector<double> d;
  std::optional<std::vector<double>> p;
  std::optional<std::vector<double>> alpha;

  SpeciesTraits build(const std::string& path) const {
    if (p) return SpeciesTraits(d, StrategyVector{*p}, path);
    return SpeciesTraits::from_preferences(d, *alpha, path);
  }
  bool operator==(const TraitsSpec&) const = default;
};

struct PipSpec {
  std::vector<double> resident_p1;
  std::vector<double> mutant_p1;
  bool operator==(const PipSpec&) const = default;
};

struct SweepSpec {
  std::vector<std::vector<double>> resident_p;
  std::vector<std::vector<double>> mutant_p;
  SweepMode mode = SweepMode::Classify;
  bool operator==(const SweepSpec&) const = default;
};

struct RunConfig {
  std::vector<double> boundaries{0.0, 1.0, 2.0};
  PatchEnvironment env{{1.0, 1.0}, {1.0, 2.0}};
  TraitsSpec resident{{1.0, 1.0}, std::vector<double>{3.0}, std::nullopt};
  TraitsSpec mutant{{1.0, 1.0}, std::vector<double>{2.5}, std::nullopt};
  GridResolution grid = GridResolution::spacing(0.01);
  SteadyConfig steady;
  EigenConfig eigen;
  SimConfig sim;
  std::optional<PipSpec> pip;
  std::optional<SweepSpec> sweep;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  std::size_t workers = 1;

  bool operator==(const RunConfig& o) const {
    return boundaries == o.boundaries && env == o.env && resident == o.resident && mutant == o.mutant &&
           grid.h == o.grid.h && grid.per_patch == o.grid.per_patch && steady == o.steady && eigen == o.eigen &&
           sim == o.sim && pip == o.pip && sweep == o.sweep && output_dir == o.output_dir && seed == o.seed &&
           workers == o.workers;
  }

  Landscape landscape() const { return Landscape(boundaries); }

  ModelParams params() const {
    ModelParams m{landscape(), env, resident.build("resident"), mutant.build("mutant")};
    m.validate();
    return m;
  }

  GridPtr build() const { return build_grid(landscape(), grid); }

  SolverConfigs solvers() const { return {steady, eigen, sim}; }

  /// Checks every component invariant.
  void validate() const {
    const auto m = params();
    (void)build();
    steady.validate();
    eigen.validate();
    sim.validate();
    if (workers < 1) throw ValidationError("workers: must be at least 1");
    if (pip) {
      detail::require_positive(pip->resident_p1, "pip.resident_p1");
      detail::require_positive(pip->mutant_p1, "pip.mutant_p1");
    }
    if (sweep) {
      for (std::size_t i = 0; i < sweep->resident_p.size(); ++i)
        (void)SpeciesTraits(m.resident.d(), StrategyVector{sweep->resident_p[i]}, detail::indexed("sweep.resident_p", i));
      for (std::size_t i = 0; i < sweep->mutant_p.size(); ++i)
        (void)SpeciesTraits(m.mutant.d(), StrategyVector{sweep->mutant_p[i]}, detail::indexed("sweep.mutant_p", i));
    }
  }
};

namespace detail {

inline void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ValidationError(path + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!ok.count(key)) throw ValidationError((path.empty() ? key : path + "." + key) + ": unknown field");
  }
}

inline std::string join_path(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline double read_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path + ": expected a number");
  return j.get<double>();
}

inline std::vector<double> read_numbers(const json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_number(j[i], indexed(path, i)));
  return out;
}

inline std::size_t read_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ValidationError(path + ": expected a nonnegative integer");
  return j.get<std::size_t>();
}

inline int read_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ValidationError(path + ": expected an integer");
  return j.get<int>();
}

template <class T, class F>
void read_optional(const json& j, const char* key, const std::string& path, T& target, F&& reader) {
  if (j.contains(key)) target = reader(j.at(key), join_path(path, key));
}

inline TraitsSpec read_traits(const json& j, const std::string& path) {
  reject_unknown(j, path, {"d", "p", "alpha"});
  if (!j.contains("d")) throw ValidationError(path + ".d: required");
  TraitsSpec t;
  t.d = read_numbers(j.at("d"), path + ".d");
  if (j.contains("p") == j.contains("alpha")) {
    throw ValidationError(path + ": exactly one of \"p\" or \"alpha\" is required");
  }
  if (j.contains("p")) t.p = read_numbers(j.at("p"), path + ".p");
  else t.alpha = read_numbers(j.at("alpha"), path + ".alpha");
  (void)t.build(path);
  return t;
}

inline json write_traits(const TraitsSpec& t) {
  json j{{"d", t.d}};
  if (t.p) j["p"] = *t.p;
  if (t.alpha) j["alpha"] = *t.alpha;
  return j;
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
  using namespace detail;
  reject_unknown(j, "", {"landscape", "environment", "resident", "mutant", "grid", "steady", "eigen", "sim", "pip",
                         "sweep", "output_dir", "seed", "workers"});
  RunConfig c;
  for (const char* key : {"landscape", "environment", "resident", "mutant"}) {
    if (!j.contains(key)) throw ValidationError(std::string(key) + ": required section");
  }
  const json& land = j.at("landscape");
  reject_unknown(land, "landscape", {"boundaries"});
  if (!land.contains("boundaries")) throw ValidationError("landscape.boundaries: required");
  c.boundaries = read_numbers(land.at("boundaries"), "landscape.boundaries");
  const Landscape landscape(c.boundaries);

  const json& env = j.at("environment");
  reject_unknown(env, "environment", {"r", "k"});
  if (!env.contains("r") || !env.contains("k")) throw ValidationError("environment: both \"r\" and \"k\" are required");
  c.env.r = read_numbers(env.at("r"), "environment.r");
  c.env.k = read_numbers(env.at("k"), "environment.k");
  c.env.validate(landscape.patches());

  c.resident = read_traits(j.at("resident"), "resident");
  c.mutant = read_traits(j.at("mutant"), "mutant");

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    reject_unknown(g, "grid", {"h", "per_patch"});
    if (g.contains("h") == g.contains("per_patch")) {
      throw ValidationError("grid: exactly one of \"h\" or \"per_patch\" is required");
    }
    if (g.contains("h")) {
      c.grid = GridResolution::spacing(read_number(g.at("h"), "grid.h"));
    } else {
      std::vector<std::size_t> counts;
      const json& pp = g.at("per_patch");
      if (!pp.is_array()) throw ValidationError("grid.per_patch: expected an array of integers");
      for (std::size_t i = 0; i < pp.size(); ++i) counts.push_back(read_count(pp[i], indexed("grid.per_patch", i)));
      c.grid = GridResolution::counts(std::move(counts));
    }
  }
  if (j.contains("steady")) {
    const json& s = j.at("steady");
    reject_unknown(s, "steady", {"newton_tol", "max_newton_iters", "armijo", "min_damping", "fallback_dt",
                                 "fallback_horizon", "fallback_max_steps"});
    read_optional(s, "newton_tol", "steady", c.steady.newton_tol, read_number);
    read_optional(s, "max_newton_iters", "steady", c.steady.max_newton_iters, read_int);
    read_optional(s, "armijo", "steady", c.steady.armijo, read_number);
    read_optional(s, "min_damping", "steady", c.steady.min_damping, read_number);
    read_optional(s, "fallback_dt", "steady", c.steady.fallback_dt, read_number);
    read_optional(s, "fallback_horizon", "steady", c.steady.fallback_horizon, read_number);
    read_optional(s, "fallback_max_steps", "steady", c.steady.fallback_max_steps, read_int);
  }
  if (j.contains("eigen")) {
    const json& e = j.at("eigen");
    reject_unknown(e, "eigen", {"sign_tol", "max_iterations"});
    read_optional(e, "sign_tol", "eigen", c.eigen.sign_tol, read_number);
    read_optional(e, "max_iterations", "eigen", c.eigen.max_iterations, read_int);
  }
  if (j.contains("sim")) {
    const json& s = j.at("sim");
    reject_unknown(s, "sim", {"dt", "t_max", "steady_tol", "extinction_eps", "scheme", "snapshot_stride"});
    read_optional(s, "dt", "sim", c.sim.dt, read_number);
    read_optional(s, "t_max", "sim", c.sim.t_max, read_number);
    read_optional(s, "steady_tol", "sim", c.sim.steady_tol, read_number);
    read_optional(s, "extinction_eps", "sim", c.sim.extinction_eps, read_number);
    read_optional(s, "snapshot_stride", "sim", c.sim.snapshot_stride, read_count);
    if (s.contains("scheme")) {
      if (!s.at("scheme").is_string()) throw ValidationError("sim.scheme: expected a string");
      c.sim.scheme = parse_scheme(s.at("scheme").get<std::string>());
    }
  }
  if (j.contains("pip")) {
    const json& p = j.at("pip");
    reject_unknown(p, "pip", {"resident_p1", "mutant_p1"});
    PipSpec spec;
    if (!p.contains("resident_p1") || !p.contains("mutant_p1")) {
      throw ValidationError("pip: both \"resident_p1\" and \"mutant_p1\" are required");
    }
    spec.resident_p1 = read_numbers(p.at("resident_p1"), "pip.resident_p1");
    spec.mutant_p1 = read_numbers(p.at("mutant_p1"), "pip.mutant_p1");
    c.pip = std::move(spec);
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    reject_unknown(s, "sweep", {"resident_p", "mutant_p", "mode"});
    SweepSpec spec;
    for (const char* key : {"resident_p", "mutant_p"}) {
      const std::string path = std::string("sweep.") + key;
      if (!s.contains(key) || !s.at(key).is_array()) throw ValidationError(path + ": expected an array of vectors");
      auto& target = std::string(key) == "resident_p" ? spec.resident_p : spec.mutant_p;
      for (std::size_t i = 0; i < s.at(key).size(); ++i) target.push_back(read_numbers(s.at(key)[i], indexed(path, i)));
    }
    if (s.contains("mode")) {
      if (!s.at("mode").is_string()) throw ValidationError("sweep.mode: expected a string");
      spec.mode = parse_sweep_mode(s.at("mode").get<std::string>());
    }
    c.sweep = std::move(spec);
  }
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) throw ValidationError("output_dir: expected a string");
    c.output_dir = j.at("output_dir").get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ValidationError("seed: expected a nonnegative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  read_optional(j, "workers", "", c.workers, read_count);
  c.validate();
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

inline json to_json(const RunConfig& c) {
  json j;
  j["landscape"] = {{"boundaries", c.boundaries}};
  j["environment"] = {{"r", c.env.r}, {"k", c.env.k}};
  j["resident"] = detail::write_traits(c.resident);
  j["mutant"] = detail::write_traits(c.mutant);
  if (c.grid.h) j["grid"] = {{"h", *c.grid.h}};
  else j["grid"] = {{"per_patch", c.grid.per_patch}};
  j["steady"] = {{"newton_tol", c.steady.newton_tol},
                 {"max_newton_iters", c.steady.max_newton_iters},
                 {"armijo", c.steady.armijo},
                 {"min_damping", c.steady.min_damping},
                 {"fallback_dt", c.steady.fallback_dt},
                 {"fallback_horizon", c.steady.fallback_horizon},
                 {"fallback_max_steps", c.steady.fallback_max_steps}};
  j["eigen"] = {{"sign_tol", c.eigen.sign_tol}, {"max_iterations", c.eigen.max_iterations}};
  j["sim"] = {{"dt", c.sim.dt},
              {"t_max", c.sim.t_max},
              {"steady_tol", c.sim.steady_tol},
              {"extinction_eps", c.sim.extinction_eps},
              {"scheme", to_string(c.sim.scheme)},
              {"snapshot_stride", c.sim.snapshot_stride}};
  if (c.pip) j["pip"] = {{"resident_p1", c.pip->resident_p1}, {"mutant_p1", c.pip->mutant_p1}};
  if (c.sweep) {
    j["sweep"] = {{"resident_p", c.sweep->resident_p}, {"mutant_p", c.sweep->mutant_p}, {"mode", to_string(c.sweep->mode)}};
  }
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  return j;
}

}  // namespace patchcomp
