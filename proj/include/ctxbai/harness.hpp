#pragma once
// Multi-trial experiments: instance preparation, parallel execution with
// per-trial RNG streams, aggregation and CSV/JSON output.
//
// Every run draws from the stream derive_stream(tag, instance, algo, trial)
// of the master seed, so results do not depend on the number of worker
// threads or on completion order.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ctxbai/algorithms.hpp"
#include "ctxbai/env.hpp"
#include "ctxbai/instance_io.hpp"
#include "ctxbai/optim.hpp"

namespace ctxbai {

/// Exit status classes used by the bench CLI.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GenerateSpec {
  GenConstraints constraints;
  Setting kind = Setting::non_separator;
  std::size_t count = 1;
};

struct ExperimentConfig {
  std::vector<std::filesystem::path> instance_paths;
  std::optional<GenerateSpec> generate;
  std::vector<Algo> algorithms;
  double delta = 0.1;
  std::size_t trials = 1;
  std::uint64_t master_seed = 1;
  /// Worker threads; 0 means one per hardware thread.
  std::size_t jobs = 1;
  /// delta and mu range are filled per instance; the rest applies to all runs.
  RunConfig run;
  /// Overrides the reward range used by TS for every instance.
  std::optional<std::pair<double, double>> mu_range;
  /// Where bench writes its CSV files; the CLI's --out takes precedence.
  std::optional<std::filesystem::path> output_dir;

  void validate() const;
};

/// Parses the JSON form of ExperimentConfig. Relative instance paths resolve
/// against `base_dir`. Throws ConfigError.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct PreparedInstance {
  std::string id;
  InstanceFile file;
  CharacteristicTime characteristic;
  std::pair<double, double> mu_range;
};

struct WilsonInterval {
  double lo;
  double hi;
};

/// Wilson score interval for `successes` out of `trials` at normal quantile z.
WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.96);

struct TrajectoryPoint {
  std::size_t round;
  double mean_dist_l2;
  double mean_lambda;
  double mean_threshold;
  std::size_t runs;  ///< runs contributing a snapshot at this round
};

struct TrialAggregate {
  std::string instance_id;
  Algo algo = Algo::nsts;
  std::size_t n = 0;
  std::size_t k = 0;
  double delta = 0.0;
  std::size_t trials = 0;  ///< runs that finished without an exception
  double mean_tau = 0.0;
  double median_tau = 0.0;
  double std_tau = 0.0;
  std::size_t errors = 0;
  double error_rate = 0.0;
  double err_ci_lo = 0.0;
  double err_ci_hi = 0.0;
  std::size_t truncated = 0;
  std::size_t failed = 0;
  double t_star = 0.0;
  double lower_bound = 0.0;  ///< t_star * d_bernoulli(delta)
  std::vector<TrajectoryPoint> curve;
};

struct RunRecord {
  std::size_t instance = 0;
  Algo algo = Algo::nsts;
  std::size_t trial = 0;
  std::optional<RunResult> result;
  std::string error;  ///< non-empty when the run threw
};

struct ExperimentResult {
  std::vector<PreparedInstance> instances;
  std::vector<RunRecord> runs;  ///< ordered by (instance, algorithm, trial)
  std::vector<TrialAggregate> aggregates;
  std::size_t failures() const;
};

/// Loads or generates the instances and computes their characteristic times.
std::vector<PreparedInstance> prepare_instances(const ExperimentConfig& cfg);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Aggregates the runs of one (instance, algorithm) pair, in trial order.
TrialAggregate aggregate_runs(const PreparedInstance& inst, Algo algo, double delta,
                              const std::vector<const RunRecord*>& runs);

inline constexpr const char* kSummaryHeader =
    "instance_id,algo,n,k,delta,trials,mean_tau,median_tau,std_tau,error_rate,err_ci_lo,"
    "err_ci_hi,truncated,t_star,lower_bound";
inline constexpr const char* kTrajectoryHeader = "round,mean_dist_l2,mean_lambda,mean_threshold";

std::string summary_csv(const std::vector<TrialAggregate>& aggs);
std::string trajectory_csv(const TrialAggregate& agg);

/// Writes summary.csv into `dir`.
void emit_csv(const std::vector<TrialAggregate>& aggs, const std::filesystem::path& dir);
/// Writes trajectory_<instance>_<algo>.csv for every aggregate with a curve.
void emit_trajectories(const std::vector<TrialAggregate>& aggs, const std::filesystem::path& dir);

nlohmann::json to_json(const RunResult& r, bool with_trajectory = true);

}  // namespace ctxbai
