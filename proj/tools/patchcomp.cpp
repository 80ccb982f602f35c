// patchcomp command-line front end.
//
//   patchcomp <command> [--config PATH] [--out DIR] [--seed N] [--resolution H] [--workers N]
//
// Flags fall back to PATCHCOMP_CONFIG, PATCHCOMP_OUT, PATCHCOMP_SEED,
// PATCHCOMP_RESOLUTION and PATCHCOMP_WORKERS. Exit codes: 0 success,
// 1 invalid input, 2 numerical failure (or a failed validate check).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "patchcomp/patchcomp.hpp"

namespace fs = std::filesystem;
using namespace patchcomp;

namespace {

struct Options {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> resolution;
  std::optional<std::size_t> workers;
  bool print_defaults = false;
};

RunConfig resolve(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.out) c.output_dir = *o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.resolution) c.grid = GridResolution::spacing(*o.resolution);
  if (o.workers) c.workers = *o.workers;
  c.validate();
  return c;
}

std::ofstream open_output(const RunConfig& c, const std::string& name) {
  fs::create_directories(c.output_dir);
  const fs::path path = fs::path(c.output_dir) / name;
  std::ofstream os(path);
  if (!os) throw ValidationError("output_dir: cannot write " + path.string());
  return os;
}

int run_steady(const RunConfig& c) {
  const auto m = c.params();
  const auto grid = c.build();
  const auto res = solve_resident_steady_detailed(m.landscape, m.env, m.resident, grid, c.steady);
  auto os = open_output(c, "steady.csv");
  write_field_csv(os, res.u, "u");

  const auto rep = monotonicity_report(res.u, m.env, m.resident);
  auto ms = open_output(c, "monotonicity.csv");
  ms << "item,value\n";
  for (std::size_t i = 0; i < rep.patch_sign.size(); ++i)
    ms << "patch_" << (i + 1) << ',' << to_string(rep.patch_sign[i]) << '\n';
  for (std::size_t i = 0; i < rep.interface_slopes.size(); ++i) {
    ms << "interface_" << (i + 1) << "_left_slope," << format_number(rep.interface_slopes[i].left) << '\n';
    ms << "interface_" << (i + 1) << "_right_slope," << format_number(rep.interface_slopes[i].right) << '\n';
  }
  ms << "left_end_vs_k1," << to_string(rep.left_end_vs_k1) << '\n';
  ms << "right_end_vs_kn," << to_string(rep.right_end_vs_kn) << '\n';
  ms << "expectation," << to_string(rep.expectation) << '\n';
  ms << "matches_expectation," << (rep.matches_expectation() ? "true" : "false") << '\n';
  ms << "non_monotone," << (rep.non_monotone() ? "true" : "false") << '\n';

  std::cout << "steady: residual " << format_number(res.residual) << ", newton iterations " << res.newton_iterations
            << (rep.non_monotone() ? ", non-monotone" : "") << '\n';
  return 0;
}

int run_eigen(const RunConfig& c, bool fitness) {
  const auto m = c.params();
  const auto grid = c.build();
  EigenPair e;
  if (fitness) {
    e = invasion_fitness(m.landscape, m.env, m.resident, m.mutant, grid, c.steady, c.eigen);
  } else {
    const auto u = solve_resident_steady(m.landscape, m.env, m.resident, grid, c.steady);
    e = resident_linearization_eigenpair(u, m.env, m.resident, c.eigen);
  }
  auto os = open_output(c, fitness ? "fitness.csv" : "eigen.csv");
  write_eigenpair_csv(os, e);
  std::cout << "lambda1 " << format_number(e.lambda1) << " (" << to_string(sign_of(e.lambda1, c.eigen.sign_tol))
            << ")\n";
  return 0;
}

int run_simulate(const RunConfig& c) {
  const auto m = c.params();
  const auto grid = c.build();
  const CompetitionSystem sys(grid, m.env, m.resident, m.mutant);
  std::optional<std::ofstream> traj;
  if (c.sim.snapshot_stride > 0) traj = open_output(c, "trajectory.csv");
  const auto rec = simulate_default(sys, c.sim, c.steady, traj ? &*traj : nullptr);

  auto os = open_output(c, "outcome.csv");
  os << "verdict,time,steps,converged,rate,steady_residual,max_clip,u_distance,v_distance,box_violation,"
        "box_respected,dt,extinction_eps,note\n";
  os << to_string(rec.verdict) << ',' << format_number(rec.time) << ',' << rec.steps << ','
     << (rec.converged ? "true" : "false") << ',' << format_number(rec.rate) << ','
     << format_number(rec.steady_residual) << ',' << format_number(rec.max_clip) << ','
     << format_number(rec.u_distance) << ',' << format_number(rec.v_distance) << ','
     << format_number(rec.box_violation) << ',' << (rec.box_respected ? "true" : "false") << ','
     << format_number(rec.config.dt) << ',' << format_number(rec.config.extinction_eps) << ",\"" << rec.note
     << "\"\n";
  auto fs_ = open_output(c, "final_state.csv");
  write_trajectory_header(fs_);
  write_trajectory_rows(fs_, rec.time, rec.final_state);
  std::cout << "verdict " << to_string(rec.verdict) << " at t = " << format_number(rec.time) << '\n';
  return 0;
}

int run_pip(const RunConfig& c) {
  if (!c.pip) throw ValidationError("pip: config has no \"pip\" section");
  const auto m = c.params();
  const auto g = pip(c.pip->resident_p1, c.pip->mutant_p1, m.resident.d(), m.landscape, m.env, c.build(), c.solvers(),
                     c.workers);
  auto os = open_output(c, "pip.csv");
  write_pip_csv(os, g);
  auto ss = open_output(c, "pip_sign.csv");
  write_pip_sign_csv(ss, g);
  std::cout << "pip: " << g.resident_axis.size() << " x " << g.mutant_axis.size() << " points\n";
  return 0;
}

int run_classify(const RunConfig& c) {
  const auto m = c.params();
  const auto pred = predict_outcome(m.resident.p(), m.mutant.p(), m.resident.d(), m.mutant.d(), m.env);
  auto os = open_output(c, "classify.csv");
  write_prediction_header(os);
  write_prediction_row(os, pred);
  std::cout << to_string(pred.region) << ' ' << to_string(pred.invade_when_rare) << ' '
            << to_string(pred.global_verdict) << '\n';
  return 0;
}

int run_sweep(const RunConfig& c) {
  if (!c.sweep) throw ValidationError("sweep: config has no \"sweep\" section");
  std::vector<StrategyVector> rp, mp;
  for (const auto& p : c.sweep->resident_p) rp.emplace_back(p);
  for (const auto& p : c.sweep->mutant_p) mp.emplace_back(p);
  const auto rows = sweep(c.params(), rp, mp, c.sweep->mode, c.build(), c.solvers(), c.workers);
  auto os = open_output(c, "sweep.csv");
  write_sweep_csv(os, rows);
  std::cout << "sweep: " << rows.size() << " points\n";
  return 0;
}

int run_validate(const RunConfig& c) {
  const auto results = validate_model(c);
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    all = all && r.passed;
  }
  return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-species competition on a patchy landscape"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "JSON run configuration")->envname("PATCHCOMP_CONFIG");
  app.add_option("--out", o.out, "output directory")->envname("PATCHCOMP_OUT");
  app.add_option("--seed", o.seed, "seed for randomized checks")->envname("PATCHCOMP_SEED");
  app.add_option("--resolution", o.resolution, "grid spacing h")->envname("PATCHCOMP_RESOLUTION");
  app.add_option("--workers", o.workers, "worker threads for pip and sweep")->envname("PATCHCOMP_WORKERS");
  app.add_flag("--print-defaults", o.print_defaults, "print the default configuration and exit");

  const char* commands[][2] = {{"steady", "resident steady state and monotonicity report"},
                               {"eigen", "principal eigenpair of the resident's own linearization"},
                               {"fitness", "invasion fitness of the mutant"},
                               {"simulate", "time integration from the default initial data"},
                               {"pip", "pairwise invasibility plot"},
                               {"classify", "region and predicted outcome"},
                               {"sweep", "batched classify or fitness"},
                               {"validate", "identity residuals and property checks"}};
  for (auto& cmd : commands) app.add_subcommand(cmd[0], cmd[1]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (o.print_defaults) {
      std::cout << to_json(RunConfig{}).dump(2) << '\n';
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << app.help();
      return 1;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    const RunConfig c = resolve(o);
    if (cmd == "steady") return run_steady(c);
    if (cmd == "eigen") return run_eigen(c, false);
    if (cmd == "fitness") return run_eigen(c, true);
    if (cmd == "simulate") return run_simulate(c);
    if (cmd == "pip") return run_pip(c);
    if (cmd == "classify") return run_classify(c);
    if (cmd == "sweep") return run_sweep(c);
    return run_validate(c);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
