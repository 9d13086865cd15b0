#pragma once
// Sequential best-arm identification agents:
//   NSTS - non-separator track-and-stop: D-tracking on the optimal arm
//          proportions, stopping on the cell-level GLR.
//   STS  - separator track-and-stop: G-tracking on the optimal context
//          distribution, stopping on the context-level GLR.
//   TS   - classic track-and-stop that ignores contexts and treats each arm's
//          reward as sub-Gaussian with an inflated variance.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctxbai/env.hpp"
#include "ctxbai/geometry.hpp"
#include "ctxbai/model.hpp"

namespace ctxbai {

enum class Algo { nsts, sts, ts };

std::string to_string(Algo a);
Algo algo_from_string(const std::string& s);

struct RunConfig {
  double delta = 0.1;
  std::size_t max_rounds = 50'000'000;
  /// Optimal weights are recomputed every m rounds (1 = every round).
  std::size_t recompute_every = 1;
  /// Snapshot every this many rounds; 0 disables the trajectory.
  std::size_t trajectory_stride = 0;
  /// Snapshots kept per run before the stride is doubled and every other
  /// snapshot dropped.
  std::size_t trajectory_limit = 2000;
  /// Keep sampling until max_rounds regardless of the stopping rule. Used for
  /// tracking diagnostics; the run is then not flagged as truncated.
  bool ignore_stopping = false;
  /// Reward range used by TS for its variance proxy 1 + (hi - lo)^2 / 4.
  double mu_lo = 0.0;
  double mu_hi = 10.0;
  /// Absolute tolerance of the separator weight solver inside STS.
  double sep_solver_tol = 1e-9;

  void validate() const;
};

struct Snapshot {
  std::size_t round = 0;
  std::vector<double> arm_freq;
  std::vector<double> context_freq;
  double lambda = 0.0;
  double threshold = 0.0;
  /// L2 distance of the tracked frequencies (arms for non-separator
  /// instances, contexts for separator instances) to the optimal weights.
  double dist_l2 = 0.0;
};

struct RunResult {
  Algo algo = Algo::nsts;
  std::size_t tau = 0;
  std::optional<ArmIndex> recommendation;
  bool correct = false;
  bool truncated = false;
  std::size_t init_rounds = 0;
  /// Rounds played uniformly at random because the estimate had no unique
  /// best arm.
  std::size_t random_rounds = 0;
  double final_lambda = 0.0;
  double final_threshold = 0.0;
  std::vector<Snapshot> trajectory;
  std::size_t trajectory_stride = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// D-tracking: the least-pulled arm among those with N_i <= max(sqrt(t) - n/2, 0),
/// otherwise argmax of t w_i - N_i. Ties go to the lowest index.
ArmIndex d_track_next(std::span<const std::size_t> counts, std::size_t t,
                      std::span<const double> w_star);
ArmIndex d_track_next(const EmpiricalState& state, const WeightVector& w_star);

/// Policy chosen by G-tracking: the point where the ray from the observed
/// context frequencies through w_star leaves ch(A), with its arm mixture.
/// When the frequencies already equal w_star the certificate of w_star itself
/// is returned.
ArmMixture g_track_policy(const EmpiricalState& state, const ContextDistribution& w_star,
                          const ArmMixture& w_star_certificate, const ContextMatrix& a);
ArmIndex g_track_next(const EmpiricalState& state, const ContextDistribution& w_star,
                      const ArmMixture& w_star_certificate, const ContextMatrix& a,
                      RngStream& rng);

RunResult nsts_run(const Instance& inst, const RunConfig& cfg, RngStream& rng);
RunResult sts_run(const Instance& inst, const RunConfig& cfg, RngStream& rng);
RunResult ts_baseline_run(const Instance& inst, const RunConfig& cfg, RngStream& rng);
RunResult run_algorithm(Algo algo, const Instance& inst, const RunConfig& cfg, RngStream& rng);

/// Optimal proportions the trajectory distance is measured against:
/// arm weights for non-separator instances, the solver's context
/// distribution for separator instances.
std::vector<double> tracking_target(const Instance& inst);

}  // namespace ctxbai
