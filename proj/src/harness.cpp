#include "ctxbai/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "ctxbai/stopping.hpp"

namespace ctxbai {

using nlohmann::json;

namespace {

constexpr std::uint64_t kGenerateTag = 0x67656E;  // "gen"
constexpr std::uint64_t kRunTag = 0x72756E;       // "run"

const std::set<std::string> kConfigKeys = {
    "instances",        "generate",         "algorithms",      "delta",      "trials",
    "master_seed",      "jobs",             "max_rounds",      "recompute_every",
    "trajectory_stride", "trajectory_limit", "ignore_stopping", "sep_solver_tol",
    "mu_range",         "output_dir"};

const std::set<std::string> kGenerateKeys = {"count",       "n",         "k",           "kind",
                                             "mu_range",    "a_min_floor", "gap_bands",
                                             "max_attempts"};

template <typename T>
T get_or(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

std::pair<double, double> read_range(const json& v, const std::string& what) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError(what + " must be [lo, hi]");
  }
  const double lo = v[0].get<double>();
  const double hi = v[1].get<double>();
  if (!(lo < hi)) throw ConfigError(what + " must satisfy lo < hi");
  return {lo, hi};
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << body;
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (algorithms.empty()) throw ConfigError("at least one algorithm is required");
  if (instance_paths.empty() && !generate) throw ConfigError("no instances: give 'instances' or 'generate'");
  if (generate && generate->count < 1) throw ConfigError("generate.count must be at least 1");
  try {
    RunConfig r = run;
    r.delta = delta;
    r.validate();
    if (generate) generate->constraints.validate();
  } catch (const UsageError& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig parse_experiment_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("experiment config must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (!kConfigKeys.count(key)) throw ConfigError("unknown config field '" + key + "'");
  }
  ExperimentConfig cfg;
  if (doc.contains("instances")) {
    for (const auto& p : doc["instances"]) {
      if (!p.is_string()) throw ConfigError("'instances' must be a list of paths");
      std::filesystem::path path = p.get<std::string>();
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      cfg.instance_paths.push_back(path);
    }
  }
  if (doc.contains("generate")) {
    const auto& g = doc["generate"];
    if (!g.is_object()) throw ConfigError("'generate' must be an object");
    for (const auto& [key, _] : g.items()) {
      if (!kGenerateKeys.count(key)) throw ConfigError("unknown generate field '" + key + "'");
    }
    GenerateSpec spec;
    spec.count = get_or<std::size_t>(g, "count", 1);
    spec.constraints.n = get_or<std::size_t>(g, "n", 5);
    spec.constraints.k = get_or<std::size_t>(g, "k", 3);
    try {
      spec.kind = setting_from_string(get_or<std::string>(g, "kind", "non_separator"));
    } catch (const UsageError& e) {
      throw ConfigError(e.what());
    }
    if (g.contains("mu_range")) {
      std::tie(spec.constraints.mu_lo, spec.constraints.mu_hi) = read_range(g["mu_range"], "generate.mu_range");
    }
    if (g.contains("a_min_floor")) spec.constraints.a_min_floor = get_or<double>(g, "a_min_floor", 0.0);
    if (g.contains("gap_bands")) {
      for (const auto& band : g["gap_bands"]) {
        if (band.is_null()) {
          spec.constraints.gap_bands.push_back({0.0, 0.0});
          continue;
        }
        const auto [lo, hi] = read_range(band, "generate.gap_bands entry");
        spec.constraints.gap_bands.push_back({lo, hi});
      }
    }
    spec.constraints.max_attempts = get_or<std::size_t>(g, "max_attempts", 100000);
    cfg.generate = spec;
  }
  if (!doc.contains("algorithms") || !doc["algorithms"].is_array()) {
    throw ConfigError("'algorithms' must be a list such as [\"nsts\", \"ts\"]");
  }
  for (const auto& a : doc["algorithms"]) {
    try {
      cfg.algorithms.push_back(algo_from_string(a.get<std::string>()));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("algorithms: ") + e.what());
    }
  }
  cfg.delta = get_or<double>(doc, "delta", 0.1);
  cfg.trials = get_or<std::size_t>(doc, "trials", 1);
  cfg.master_seed = get_or<std::uint64_t>(doc, "master_seed", 1);
  cfg.jobs = get_or<std::size_t>(doc, "jobs", 1);
  cfg.run.max_rounds = get_or<std::size_t>(doc, "max_rounds", cfg.run.max_rounds);
  cfg.run.recompute_every = get_or<std::size_t>(doc, "recompute_every", 1);
  cfg.run.trajectory_stride = get_or<std::size_t>(doc, "trajectory_stride", 500);
  cfg.run.trajectory_limit = get_or<std::size_t>(doc, "trajectory_limit", cfg.run.trajectory_limit);
  cfg.run.ignore_stopping = get_or<bool>(doc, "ignore_stopping", false);
  cfg.run.sep_solver_tol = get_or<double>(doc, "sep_solver_tol", cfg.run.sep_solver_tol);
  if (doc.contains("mu_range")) cfg.mu_range = read_range(doc["mu_range"], "mu_range");
  if (doc.contains("output_dir")) {
    std::filesystem::path out = get_or<std::string>(doc, "output_dir", "");
    if (out.is_relative() && !base_dir.empty()) out = base_dir / out;
    cfg.output_dir = out;
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_experiment_config(doc, path.parent_path());
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double nn = double(trials);
  const double p = double(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::size_t ExperimentResult::failures() const {
  return std::size_t(std::count_if(runs.begin(), runs.end(),
                                   [](const RunRecord& r) { return !r.error.empty(); }));
}

std::vector<PreparedInstance> prepare_instances(const ExperimentConfig& cfg) {
  std::vector<PreparedInstance> out;
  std::set<std::string> used;
  auto unique_id = [&](std::string id) {
    std::string candidate = id;
    for (int suffix = 2; used.count(candidate); ++suffix) candidate = id + "_" + std::to_string(suffix);
    used.insert(candidate);
    return candidate;
  };
  for (const auto& path : cfg.instance_paths) {
    PreparedInstance p;
    try {
      p.file = load_instance(path);
    } catch (const UsageError& e) {
      throw ConfigError(e.what());
    }
    p.id = unique_id(path.stem().string());
    out.push_back(std::move(p));
  }
  if (cfg.generate) {
    const auto& g = *cfg.generate;
    for (std::size_t idx = 0; idx < g.count; ++idx) {
      RngStream rng(cfg.master_seed, derive_stream(kGenerateTag, idx));
      PreparedInstance p;
      try {
        p.file.instance = gen_random_instance(g.constraints, g.kind, rng);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("instance generation failed: ") + e.what());
      }
      p.file.mu_range = std::make_pair(g.constraints.mu_lo, g.constraints.mu_hi);
      p.file.meta = {{"generator", "dirichlet_floor_translate"},
                     {"master_seed", cfg.master_seed},
                     {"index", idx}};
      p.id = unique_id("gen" + std::to_string(idx + 1));
      out.push_back(std::move(p));
    }
  }
  for (auto& p : out) {
    p.characteristic = characteristic_time(p.file.instance);
    if (cfg.mu_range) {
      p.mu_range = *cfg.mu_range;
    } else if (p.file.mu_range) {
      p.mu_range = *p.file.mu_range;
    } else {
      p.mu_range = {0.0, 10.0};
    }
  }
  return out;
}

namespace {

bool compatible(Algo algo, Setting s) {
  if (algo == Algo::nsts) return s == Setting::non_separator;
  if (algo == Algo::sts) return s == Setting::separator;
  return true;
}

}  // namespace

TrialAggregate aggregate_runs(const PreparedInstance& inst, Algo algo, double delta,
                              const std::vector<const RunRecord*>& runs) {
  TrialAggregate agg;
  agg.instance_id = inst.id;
  agg.algo = algo;
  agg.n = inst.file.instance.arms();
  agg.k = inst.file.instance.contexts();
  agg.delta = delta;
  agg.t_star = inst.characteristic.t_star;
  agg.lower_bound = agg.t_star * d_bernoulli(delta);

  std::vector<double> taus;
  std::size_t decided = 0;
  struct Acc {
    double dist = 0.0, lambda = 0.0, threshold = 0.0;
    std::size_t count = 0;
  };
  std::map<std::size_t, Acc> curve;
  for (const RunRecord* rec : runs) {
    if (!rec->result) {
      ++agg.failed;
      continue;
    }
    const RunResult& r = *rec->result;
    taus.push_back(double(r.tau));
    if (r.truncated) {
      ++agg.truncated;
    } else {
      ++decided;
      if (!r.correct) ++agg.errors;
    }
    for (const auto& s : r.trajectory) {
      auto& a = curve[s.round];
      a.dist += s.dist_l2;
      a.lambda += s.lambda;
      a.threshold += s.threshold;
      ++a.count;
    }
  }
  agg.trials = taus.size();
  if (!taus.empty()) {
    double sum = 0.0;
    for (double t : taus) sum += t;
    agg.mean_tau = sum / double(taus.size());
    double ss = 0.0;
    for (double t : taus) ss += (t - agg.mean_tau) * (t - agg.mean_tau);
    agg.std_tau = taus.size() > 1 ? std::sqrt(ss / double(taus.size() - 1)) : 0.0;
    std::vector<double> sorted = taus;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    agg.median_tau = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  }
  agg.error_rate = decided ? double(agg.errors) / double(decided) : 0.0;
  const auto ci = wilson_interval(agg.errors, decided);
  agg.err_ci_lo = ci.lo;
  agg.err_ci_hi = ci.hi;
  for (const auto& [round, a] : curve) {
    const double c = double(a.count);
    agg.curve.push_back({round, a.dist / c, a.lambda / c, a.threshold / c, a.count});
  }
  return agg;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult out;
  out.instances = prepare_instances(cfg);
  for (const auto& inst : out.instances) {
    for (Algo algo : cfg.algorithms) {
      if (!compatible(algo, inst.file.instance.setting())) {
        throw ConfigError(to_string(algo) + " cannot run on " + to_string(inst.file.instance.setting()) +
                          " instance '" + inst.id + "'");
      }
    }
  }

  for (std::size_t i = 0; i < out.instances.size(); ++i) {
    for (Algo algo : cfg.algorithms) {
      for (std::size_t t = 0; t < cfg.trials; ++t) out.runs.push_back({i, algo, t, std::nullopt, {}});
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx = next++; idx < out.runs.size(); idx = next++) {
      RunRecord& rec = out.runs[idx];
      const PreparedInstance& inst = out.instances[rec.instance];
      RunConfig rc = cfg.run;
      rc.delta = cfg.delta;
      rc.mu_lo = inst.mu_range.first;
      rc.mu_hi = inst.mu_range.second;
      RngStream rng(cfg.master_seed,
                    derive_stream(kRunTag, rec.instance, std::uint64_t(rec.algo), rec.trial));
      try {
        rec.result = run_algorithm(rec.algo, inst.file.instance, rc, rng);
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
    }
  };
  std::size_t jobs = cfg.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.jobs;
  jobs = std::min(jobs, std::max<std::size_t>(out.runs.size(), 1));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < out.instances.size(); ++i) {
    for (Algo algo : cfg.algorithms) {
      std::vector<const RunRecord*> runs;
      for (const auto& r : out.runs) {
        if (r.instance == i && r.algo == algo) runs.push_back(&r);
      }
      out.aggregates.push_back(aggregate_runs(out.instances[i], algo, cfg.delta, runs));
    }
  }
  return out;
}

std::string summary_csv(const std::vector<TrialAggregate>& aggs) {
  std::ostringstream os;
  os << kSummaryHeader << '\n';
  for (const auto& a : aggs) {
    os << a.instance_id << ',' << to_string(a.algo) << ',' << a.n << ',' << a.k << ','
       << fmt(a.delta) << ',' << a.trials << ',' << fmt(a.mean_tau) << ',' << fmt(a.median_tau)
       << ',' << fmt(a.std_tau) << ',' << fmt(a.error_rate) << ',' << fmt(a.err_ci_lo) << ','
       << fmt(a.err_ci_hi) << ',' << a.truncated << ',' << fmt(a.t_star) << ','
       << fmt(a.lower_bound) << '\n';
  }
  return os.str();
}

std::string trajectory_csv(const TrialAggregate& agg) {
  std::ostringstream os;
  os << kTrajectoryHeader << '\n';
  for (const auto& p : agg.curve) {
    os << p.round << ',' << fmt(p.mean_dist_l2) << ',' << fmt(p.mean_lambda) << ','
       << fmt(p.mean_threshold) << '\n';
  }
  return os.str();
}

void emit_csv(const std::vector<TrialAggregate>& aggs, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "summary.csv", summary_csv(aggs));
}

void emit_trajectories(const std::vector<TrialAggregate>& aggs, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& a : aggs) {
    if (a.curve.empty()) continue;
    write_file(dir / ("trajectory_" + a.instance_id + "_" + to_string(a.algo) + ".csv"),
               trajectory_csv(a));
  }
}

json to_json(const RunResult& r, bool with_trajectory) {
  json doc;
  doc["algo"] = to_string(r.algo);
  doc["tau"] = r.tau;
  doc["recommendation"] = r.recommendation ? json(*r.recommendation + 1) : json(nullptr);
  doc["correct"] = r.correct;
  doc["truncated"] = r.truncated;
  doc["init_rounds"] = r.init_rounds;
  doc["random_rounds"] = r.random_rounds;
  doc["final_lambda"] = r.final_lambda;
  doc["final_threshold"] = r.final_threshold;
  doc["seed"] = r.seed;
  doc["stream"] = r.stream;
  if (with_trajectory) {
    doc["trajectory_stride"] = r.trajectory_stride;
    json traj = json::array();
    for (const auto& s : r.trajectory) {
      traj.push_back({{"round", s.round},
                      {"arm_freq", s.arm_freq},
                      {"context_freq", s.context_freq},
                      {"lambda", s.lambda},
                      {"threshold", s.threshold},
                      {"dist_l2", s.dist_l2}});
    }
    doc["trajectory"] = traj;
  }
  return doc;
}

}  // namespace ctxbai
