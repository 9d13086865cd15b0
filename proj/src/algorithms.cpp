#include "ctxbai/algorithms.hpp"

#include <algorithm>
#include <cmath>

#include "ctxbai/optim.hpp"
#include "ctxbai/stopping.hpp"

namespace ctxbai {

std::string to_string(Algo a) {
  switch (a) {
    case Algo::nsts: return "nsts";
    case Algo::sts: return "sts";
    case Algo::ts: return "ts";
  }
  return "?";
}

Algo algo_from_string(const std::string& s) {
  if (s == "nsts") return Algo::nsts;
  if (s == "sts") return Algo::sts;
  if (s == "ts") return Algo::ts;
  throw UsageError("unknown algorithm '" + s + "' (expected nsts|sts|ts)");
}

void RunConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw UsageError("delta must lie in (0, 1)");
  if (max_rounds < 1) throw UsageError("max_rounds must be at least 1");
  if (recompute_every < 1) throw UsageError("recompute_every must be at least 1");
  if (!(mu_lo <= mu_hi)) throw UsageError("mu range must satisfy lo <= hi");
  if (trajectory_stride > 0 && trajectory_limit < 2) throw UsageError("trajectory_limit must be >= 2");
}

ArmIndex d_track_next(std::span<const std::size_t> counts, std::size_t t,
                      std::span<const double> w_star) {
  const std::size_t n = counts.size();
  if (w_star.size() != n) throw UsageError("d_track_next: length mismatch");
  const double floor = std::max(std::sqrt(double(t)) - double(n) / 2.0, 0.0);
  std::optional<ArmIndex> under;
  for (std::size_t i = 0; i < n; ++i) {
    if (double(counts[i]) <= floor && (!under || counts[i] < counts[*under])) under = i;
  }
  if (under) return *under;
  ArmIndex best = 0;
  double best_lag = double(t) * w_star[0] - double(counts[0]);
  for (std::size_t i = 1; i < n; ++i) {
    const double lag = double(t) * w_star[i] - double(counts[i]);
    if (lag > best_lag) {
      best_lag = lag;
      best = i;
    }
  }
  return best;
}

ArmIndex d_track_next(const EmpiricalState& state, const WeightVector& w_star) {
  return d_track_next(state.arm_counts(), state.t(), w_star.w);
}

ArmMixture g_track_policy(const EmpiricalState& state, const ContextDistribution& w_star,
                          const ArmMixture& w_star_certificate, const ContextMatrix& a) {
  const ContextDistribution origin{state.context_frequencies()};
  double diff = 0.0;
  for (std::size_t j = 0; j < origin.p.size(); ++j) {
    diff = std::max(diff, std::abs(origin.p[j] - w_star.p[j]));
  }
  if (diff <= kDegenerateRayTolerance) return w_star_certificate;
  try {
    return ray_exit(origin, w_star, a).mixture;
  } catch (const RayInfeasible&) {
    // w_star sits on the hull boundary up to rounding; playing w_star itself
    // is still a point of the segment.
    return w_star_certificate;
  }
}

ArmIndex g_track_next(const EmpiricalState& state, const ContextDistribution& w_star,
                      const ArmMixture& w_star_certificate, const ContextMatrix& a,
                      RngStream& rng) {
  const auto policy = g_track_policy(state, w_star, w_star_certificate, a);
  return rng.categorical(policy.pi);
}

std::vector<double> tracking_target(const Instance& inst) {
  return characteristic_time(inst).weights;
}

namespace {

class TrajectoryRecorder {
 public:
  TrajectoryRecorder(const RunConfig& cfg, const Instance& inst)
      : stride_(cfg.trajectory_stride), limit_(cfg.trajectory_limit) {
    if (stride_ > 0) {
      target_ = tracking_target(inst);
      separator_ = inst.setting() == Setting::separator;
    }
  }

  void observe(const EmpiricalState& state, double lambda, double threshold) {
    if (stride_ == 0 || state.t() % stride_ != 0) return;
    Snapshot s;
    s.round = state.t();
    s.arm_freq = state.arm_frequencies();
    s.context_freq = state.context_frequencies();
    s.lambda = lambda;
    s.threshold = threshold;
    const auto& tracked = separator_ ? s.context_freq : s.arm_freq;
    double acc = 0.0;
    for (std::size_t i = 0; i < tracked.size(); ++i) {
      acc += (tracked[i] - target_[i]) * (tracked[i] - target_[i]);
    }
    s.dist_l2 = std::sqrt(acc);
    snaps_.push_back(std::move(s));
    if (snaps_.size() > limit_) {
      stride_ *= 2;
      std::vector<Snapshot> kept;
      for (auto& snap : snaps_) {
        if (snap.round % stride_ == 0) kept.push_back(std::move(snap));
      }
      snaps_ = std::move(kept);
    }
  }

  void finish(RunResult& r) {
    r.trajectory = std::move(snaps_);
    r.trajectory_stride = stride_;
  }

 private:
  std::size_t stride_;
  std::size_t limit_;
  bool separator_ = false;
  std::vector<double> target_;
  std::vector<Snapshot> snaps_;
};

void pull(const Instance& inst, ArmIndex arm, EmpiricalState& state, RngStream& rng) {
  const auto obs = sample_step(inst, arm, rng);
  state.record(arm, obs.context, obs.reward);
}

RunResult start_result(Algo algo, const RngStream& rng) {
  RunResult r;
  r.algo = algo;
  r.seed = rng.seed();
  r.stream = rng.stream();
  return r;
}

void finish_result(RunResult& r, const Instance& inst, const EmpiricalState& state,
                   std::optional<ArmIndex> recommendation, bool stopped, const RunConfig& cfg) {
  r.tau = state.t();
  r.recommendation = recommendation;
  r.truncated = !stopped && !cfg.ignore_stopping;
  const auto truth = best_arm(inst);
  r.correct = recommendation.has_value() && truth.has_value() && *recommendation == *truth;
}

std::vector<double> gaps_from_rewards(const std::vector<double>& r, ArmIndex b, double scale = 1.0) {
  std::vector<double> g(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) g[i] = i == b ? 0.0 : (r[b] - r[i]) / scale;
  return g;
}

// NSTS initialization: the arm with the most probability mass on its own
// still-unseen cells.
ArmIndex nsts_init_arm(const EmpiricalState& state, const ContextMatrix& a) {
  ArmIndex best = 0;
  double best_mass = -1.0;
  for (std::size_t i = 0; i < a.arms(); ++i) {
    double mass = 0.0;
    for (std::size_t j = 0; j < a.contexts(); ++j) {
      if (state.cell_count(j, i) == 0) mass += a(j, i);
    }
    if (mass > best_mass) {
      best_mass = mass;
      best = i;
    }
  }
  return best;
}

// STS initialization: target the unseen context that is hardest to reach
// and pull the arm most likely to produce it.
ArmIndex sts_init_arm(const EmpiricalState& state, const ContextMatrix& a) {
  std::optional<ContextIndex> rarest;
  double rarest_reach = 2.0;
  for (std::size_t j = 0; j < a.contexts(); ++j) {
    if (state.context_count(j) > 0) continue;
    double reach = 0.0;
    for (std::size_t i = 0; i < a.arms(); ++i) reach = std::max(reach, a(j, i));
    if (reach < rarest_reach) {
      rarest_reach = reach;
      rarest = j;
    }
  }
  ArmIndex best = 0;
  for (std::size_t i = 1; i < a.arms(); ++i) {
    if (a(*rarest, i) > a(*rarest, best)) best = i;
  }
  return best;
}

}  // namespace

RunResult nsts_run(const Instance& inst, const RunConfig& cfg, RngStream& rng) {
  if (inst.setting() != Setting::non_separator) throw UsageError("NSTS needs a non-separator instance");
  cfg.validate();
  const auto& a = inst.a();
  const std::size_t n = inst.arms();
  const std::size_t k = inst.contexts();
  RunResult res = start_result(Algo::nsts, rng);
  TrajectoryRecorder rec(cfg, inst);
  EmpiricalState state(n, k, Setting::non_separator);

  while (!state.all_cells_seen() && state.t() < cfg.max_rounds) pull(inst, nsts_init_arm(state, a), state, rng);
  res.init_rounds = state.t();

  WeightVector w;
  std::size_t last_solve = 0;
  bool stopped = false;
  std::optional<ArmIndex> recommendation;
  while (state.initialized()) {
    const std::size_t t = state.t();
    const auto glr = glr_nonsep(state, a);
    const double thr = threshold_nonsep(t, cfg.delta, n, k);
    rec.observe(state, glr.lambda, thr);
    res.final_lambda = glr.lambda;
    res.final_threshold = thr;
    recommendation = glr.empirical_best;
    if (!cfg.ignore_stopping && glr.lambda > thr) {
      stopped = true;
      break;
    }
    if (t >= cfg.max_rounds) break;

    ArmIndex arm;
    if (glr.empirical_best) {
      if (w.w.empty() || t - last_solve >= cfg.recompute_every) {
        const auto r = expected_rewards(a, empirical_means(state));
        w = solve_nonsep_weights(gaps_from_rewards(r, *glr.empirical_best));
        last_solve = t;
      }
      arm = d_track_next(state, w);
    } else {
      arm = rng.uniform_index(n);
      ++res.random_rounds;
    }
    pull(inst, arm, state, rng);
  }
  finish_result(res, inst, state, recommendation, stopped, cfg);
  rec.finish(res);
  return res;
}

RunResult sts_run(const Instance& inst, const RunConfig& cfg, RngStream& rng) {
  if (inst.setting() != Setting::separator) throw UsageError("STS needs a separator instance");
  cfg.validate();
  const auto& a = inst.a();
  const std::size_t n = inst.arms();
  const std::size_t k = inst.contexts();
  RunResult res = start_result(Algo::sts, rng);
  TrajectoryRecorder rec(cfg, inst);
  EmpiricalState state(n, k, Setting::separator);

  while (!state.all_contexts_seen() && state.t() < cfg.max_rounds) pull(inst, sts_init_arm(state, a), state, rng);
  res.init_rounds = state.t();

  SepSolverOptions sopt;
  sopt.tol = cfg.sep_solver_tol;
  std::optional<SepSolution> target;
  std::size_t last_solve = 0;
  bool stopped = false;
  std::optional<ArmIndex> recommendation;
  while (state.initialized()) {
    const std::size_t t = state.t();
    const auto glr = glr_sep(state, a);
    const double thr = threshold_sep(state, cfg.delta);
    rec.observe(state, glr.lambda, thr);
    res.final_lambda = glr.lambda;
    res.final_threshold = thr;
    recommendation = glr.empirical_best;
    if (!cfg.ignore_stopping && glr.lambda > thr) {
      stopped = true;
      break;
    }
    if (t >= cfg.max_rounds) break;

    ArmIndex arm;
    if (glr.empirical_best) {
      if (!target || t - last_solve >= cfg.recompute_every) {
        const auto r = expected_rewards(a, empirical_means(state));
        if (target) sopt.warm_start = target->certificate.pi;
        target = solve_sep(a, gaps_from_rewards(r, *glr.empirical_best), sopt);
        last_solve = t;
      }
      arm = g_track_next(state, target->wz, target->certificate, a, rng);
    } else {
      arm = rng.uniform_index(n);
      ++res.random_rounds;
    }
    pull(inst, arm, state, rng);
  }
  finish_result(res, inst, state, recommendation, stopped, cfg);
  rec.finish(res);
  return res;
}

RunResult ts_baseline_run(const Instance& inst, const RunConfig& cfg, RngStream& rng) {
  cfg.validate();
  const std::size_t n = inst.arms();
  const std::size_t k = inst.contexts();
  const double sigma2 = subgaussian_variance(cfg.mu_lo, cfg.mu_hi);
  const double sigma = std::sqrt(sigma2);
  RunResult res = start_result(Algo::ts, rng);
  TrajectoryRecorder rec(cfg, inst);
  EmpiricalState state(n, k, inst.setting());

  for (std::size_t i = 0; i < n && state.t() < cfg.max_rounds; ++i) pull(inst, i, state, rng);
  res.init_rounds = state.t();

  std::vector<double> means(n);
  WeightVector w;
  std::size_t last_solve = 0;
  bool stopped = false;
  std::optional<ArmIndex> recommendation;
  while (state.t() >= n) {
    const std::size_t t = state.t();
    for (std::size_t i = 0; i < n; ++i) means[i] = state.arm_sum(i) / double(state.arm_count(i));
    const auto glr = glr_classic(state.arm_counts(), means, sigma2);
    const double thr = threshold_classic(t, cfg.delta, n);
    rec.observe(state, glr.lambda, thr);
    res.final_lambda = glr.lambda;
    res.final_threshold = thr;
    recommendation = glr.empirical_best;
    if (!cfg.ignore_stopping && glr.lambda > thr) {
      stopped = true;
      break;
    }
    if (t >= cfg.max_rounds) break;

    ArmIndex arm;
    if (glr.empirical_best) {
      if (w.w.empty() || t - last_solve >= cfg.recompute_every) {
        w = solve_nonsep_weights(gaps_from_rewards(means, *glr.empirical_best, sigma));
        last_solve = t;
      }
      arm = d_track_next(state, w);
    } else {
      arm = rng.uniform_index(n);
      ++res.random_rounds;
    }
    pull(inst, arm, state, rng);
  }
  finish_result(res, inst, state, recommendation, stopped, cfg);
  rec.finish(res);
  return res;
}

RunResult run_algorithm(Algo algo, const Instance& inst, const RunConfig& cfg, RngStream& rng) {
  switch (algo) {
    case Algo::nsts: return nsts_run(inst, cfg, rng);
    case Algo::sts: return sts_run(inst, cfg, rng);
    case Algo::ts: return ts_baseline_run(inst, cfg, rng);
  }
  throw UsageError("unknown algorithm");
}

}  // namespace ctxbai
