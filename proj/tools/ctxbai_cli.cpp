// ctxbai command line: instance generation, weight solving, single runs and
// multi-trial benchmarks.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctxbai/algorithms.hpp"
#include "ctxbai/env.hpp"
#include "ctxbai/harness.hpp"
#include "ctxbai/instance_io.hpp"
#include "ctxbai/optim.hpp"

using namespace ctxbai;
using nlohmann::json;

namespace {

void write_or_print(const std::string& out, const json& doc) {
  if (out.empty() || out == "-") {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot open " + out + " for writing");
  f << doc.dump(2) << '\n';
  if (!f) throw std::runtime_error("failed writing " + out);
}

int cmd_gen_instance(std::size_t n, std::size_t k, const std::string& kind, std::uint64_t seed,
                     const std::string& out) {
  GenConstraints c;
  c.n = n;
  c.k = k;
  const Setting s = setting_from_string(kind);
  RngStream rng(seed, derive_stream(0x67656E, 0));
  InstanceFile file{gen_random_instance(c, s, rng), std::make_pair(c.mu_lo, c.mu_hi),
                    json{{"generator", "dirichlet_floor_translate"}, {"seed", seed}}};
  write_or_print(out, instance_to_json(file));
  return 0;
}

int cmd_solve_weights(const std::string& path, bool oracle, double tol, double resolution) {
  const InstanceFile file = load_instance(path);
  const Instance& inst = file.instance;
  json doc;
  doc["kind"] = to_string(inst.setting());
  doc["best_arm"] = *best_arm(inst) + 1;
  doc["gaps"] = gaps(inst);
  if (inst.setting() == Setting::non_separator) {
    const auto g = gaps(inst);
    const auto sol = solve_nonsep(g);
    const double obj = nonsep_objective(sol.weights.w, g);
    doc["weights"] = sol.weights.w;
    doc["objective"] = obj;
    doc["t_star"] = 1.0 / obj;
    doc["root"] = sol.root;
    doc["root_residual"] = sol.residual;
  } else {
    const auto sol = solve_sep_weights(inst, tol);
    doc["weights"] = sol.wz.p;
    doc["mixture"] = sol.certificate.pi;
    doc["objective"] = sol.objective;
    doc["t_star"] = 1.0 / sol.objective;
    doc["optimality_gap"] = sol.optimality_gap;
    doc["converged"] = sol.converged;
    doc["iterations"] = sol.iterations;
  }
  if (oracle) {
    const auto g = grid_oracle(inst, resolution);
    doc["oracle"] = {{"resolution", resolution},
                     {"objective", g.objective},
                     {"weights", g.weights},
                     {"objective_difference", doc["objective"].get<double>() - g.objective}};
  }
  std::cout << doc.dump(2) << '\n';
  return 0;
}

int cmd_run(const std::string& algo_name, const std::string& path, double delta, std::uint64_t seed,
            std::size_t stride, std::size_t max_rounds, const std::string& out) {
  const InstanceFile file = load_instance(path);
  RunConfig cfg;
  cfg.delta = delta;
  cfg.trajectory_stride = stride;
  cfg.max_rounds = max_rounds;
  if (file.mu_range) std::tie(cfg.mu_lo, cfg.mu_hi) = *file.mu_range;
  const Algo algo = algo_from_string(algo_name);
  RngStream rng(seed, 0);
  const RunResult r = run_algorithm(algo, file.instance, cfg, rng);
  write_or_print(out, to_json(r, stride > 0));
  return 0;
}

int cmd_bench(const std::string& config, const std::string& out, std::optional<std::size_t> jobs) {
  ExperimentConfig cfg;
  ExperimentResult res;
  try {
    cfg = load_experiment_config(config);
    if (jobs) cfg.jobs = *jobs;
    if (!out.empty()) cfg.output_dir = out;
    if (!cfg.output_dir) throw ConfigError("no output directory: pass --out or set output_dir");
    res = run_experiment(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  const std::filesystem::path dir = *cfg.output_dir;
  try {
    emit_csv(res.aggregates, dir);
    emit_trajectories(res.aggregates, dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  if (res.failures() > 0) {
    std::ofstream f(dir / "failures.txt");
    for (const auto& r : res.runs) {
      if (r.error.empty()) continue;
      f << res.instances[r.instance].id << ' ' << to_string(r.algo) << " trial " << r.trial << ": "
        << r.error << '\n';
    }
    std::cerr << res.failures() << " run(s) failed, see failures.txt\n";
    return 3;
  }
  for (const auto& a : res.aggregates) {
    std::fprintf(stderr, "%-16s %-4s trials=%zu mean_tau=%.1f errors=%zu truncated=%zu\n",
                 a.instance_id.c_str(), to_string(a.algo).c_str(), a.trials, a.mean_tau, a.errors,
                 a.truncated);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Best-arm identification with post-action context"};
  app.require_subcommand(1);

  std::size_t n = 5, k = 3;
  std::string kind = "non_separator";
  std::uint64_t seed = 1;
  std::string out;
  auto* gen = app.add_subcommand("gen-instance", "Generate a random instance");
  gen->add_option("--n", n, "Number of arms")->check(CLI::Range(2, 1000));
  gen->add_option("--k", k, "Number of contexts")->check(CLI::Range(1, 1000));
  gen->add_option("--kind", kind, "separator or non_separator");
  gen->add_option("--seed", seed, "RNG seed");
  gen->add_option("--out", out, "Output path (stdout if omitted)");

  std::string instance;
  bool oracle = false;
  double tol = 1e-9;
  double resolution = 0.01;
  auto* solve = app.add_subcommand("solve-weights", "Optimal proportions and T* for an instance");
  solve->add_option("--instance", instance, "Instance JSON")->required();
  solve->add_flag("--oracle", oracle, "Compare with the grid oracle");
  solve->add_option("--tol", tol, "Separator solver tolerance");
  solve->add_option("--resolution", resolution, "Grid oracle spacing");

  std::string algo = "nsts";
  double delta = 0.1;
  std::size_t stride = 0;
  std::size_t max_rounds = RunConfig{}.max_rounds;
  auto* run = app.add_subcommand("run", "Single run of one algorithm");
  run->add_option("--algo", algo, "nsts, sts or ts")->required();
  run->add_option("--instance", instance, "Instance JSON")->required();
  run->add_option("--delta", delta, "Confidence parameter");
  run->add_option("--seed", seed, "RNG seed");
  run->add_option("--trajectory", stride, "Snapshot stride (0 = none)");
  run->add_option("--max-rounds", max_rounds, "Round cap");
  run->add_option("--out", out, "Output path (stdout if omitted)");

  std::string config;
  std::optional<std::size_t> jobs;
  auto* bench = app.add_subcommand("bench", "Multi-trial experiment from a JSON config");
  bench->add_option("--config", config, "Experiment config")->required();
  bench->add_option("--out", out, "Output directory (overrides output_dir)");
  bench->add_option("--jobs", jobs, "Worker threads (0 = all cores)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen_instance(n, k, kind, seed, out);
    if (*solve) return cmd_solve_weights(instance, oracle, tol, resolution);
    if (*run) return cmd_run(algo, instance, delta, seed, stride, max_rounds, out);
    if (*bench) return cmd_bench(config, out, jobs);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
