#include "ctxbai/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "ctxbai/env.hpp"
#include "ctxbai/special.hpp"

namespace ctxbai {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw UsageError("delta must lie in (0, 1)");
}

double clamped_log_log(double x) {
  // ln(max(4 + ln x, e))
  const double inner = 4.0 + std::log(x);
  return std::log(std::max(inner, std::numbers::e));
}

template <typename Denominator>
GlrReport glr_min(std::span<const double> rewards, Denominator&& denom) {
  GlrReport rep;
  rep.empirical_best = unique_argmax(rewards);
  if (!rep.empirical_best) return rep;
  const std::size_t b = *rep.empirical_best;
  double best = kInf;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (i == b) continue;
    const double d = denom(b, i);
    if (d == 0.0) continue;
    const double gap = rewards[b] - rewards[i];
    const double v = gap * gap / d;
    if (v < best) {
      best = v;
      rep.challenger = i;
    }
  }
  rep.lambda = best;
  return rep;
}

}  // namespace

GlrReport glr_nonsep(const EmpiricalState& state, const ContextMatrix& a) {
  if (state.setting() != Setting::non_separator) throw UsageError("glr_nonsep needs a non-separator state");
  const auto mu = empirical_means(state);
  const auto r = expected_rewards(a, mu);
  const std::size_t k = a.contexts();
  return glr_min(r, [&](std::size_t b, std::size_t i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      acc += a(j, b) * a(j, b) / double(state.cell_count(j, b)) +
             a(j, i) * a(j, i) / double(state.cell_count(j, i));
    }
    return 2.0 * acc;
  });
}

GlrReport glr_sep(const EmpiricalState& state, const ContextMatrix& a) {
  if (state.setting() != Setting::separator) throw UsageError("glr_sep needs a separator state");
  const auto mu = empirical_means(state);
  const auto r = expected_rewards(a, mu);
  const std::size_t k = a.contexts();
  return glr_min(r, [&](std::size_t b, std::size_t i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double d = a(j, b) - a(j, i);
      acc += d * d / double(state.context_count(j));
    }
    return 2.0 * acc;
  });
}

double threshold_nonsep(std::size_t t, double delta, std::size_t n, std::size_t k) {
  check_delta(delta);
  if (t < 1 || n < 2 || k < 1) throw UsageError("threshold_nonsep needs t >= 1, n >= 2, k >= 1");
  const double kk = double(k);
  return 4.0 * kk * clamped_log_log(double(t) / (2.0 * kk)) +
         2.0 * kk * c_g(std::log(double(n - 1) / delta) / (2.0 * kk));
}

double threshold_sep(const EmpiricalState& state, double delta) {
  check_delta(delta);
  const std::size_t k = state.contexts();
  double acc = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const auto c = state.context_count(j);
    if (c == 0) throw NotInitializedError("threshold_sep: context " + std::to_string(j + 1) + " unseen");
    acc += std::log(4.0 + std::log(double(c)));
  }
  return 2.0 * acc + double(k) * c_g(std::log(1.0 / delta) / double(k));
}

double subgaussian_variance(double lo, double hi) {
  if (!(lo <= hi)) throw UsageError("subgaussian_variance needs lo <= hi");
  return 1.0 + (hi - lo) * (hi - lo) / 4.0;
}

GlrReport glr_classic(std::span<const std::size_t> counts, std::span<const double> means,
                      double sigma2) {
  if (counts.size() != means.size()) throw UsageError("glr_classic: length mismatch");
  if (!(sigma2 > 0.0)) throw UsageError("glr_classic needs sigma2 > 0");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) throw NotInitializedError("arm " + std::to_string(i + 1) + " never pulled");
  }
  return glr_min(means, [&](std::size_t b, std::size_t i) {
    return 2.0 * sigma2 * (1.0 / double(counts[b]) + 1.0 / double(counts[i]));
  });
}

double threshold_classic(std::size_t t, double delta, std::size_t n) {
  check_delta(delta);
  if (t < 1 || n < 2) throw UsageError("threshold_classic needs t >= 1, n >= 2");
  return 4.0 * clamped_log_log(double(t) / 2.0) + 2.0 * c_g(std::log(double(n - 1) / delta) / 2.0);
}

namespace {

// One challenger problem: minimize sum_v weight_v (target_v - x_v)^2 / 2 over
// coef . x = 0. The pivot coordinate is eliminated and the rest are updated
// by exact coordinate minimization.
struct HyperplaneProblem {
  std::vector<double> weight;
  std::vector<double> target;
  std::vector<double> coef;
};

double solve_on_hyperplane(const HyperplaneProblem& prob, RngStream& rng, int starts) {
  const std::size_t dim = prob.coef.size();
  std::size_t pivot = 0;
  for (std::size_t v = 1; v < dim; ++v) {
    if (std::abs(prob.coef[v]) > std::abs(prob.coef[pivot])) pivot = v;
  }
  auto pivot_value = [&](const std::vector<double>& x) {
    double acc = 0.0;
    for (std::size_t v = 0; v < dim; ++v) {
      if (v != pivot) acc += prob.coef[v] * x[v];
    }
    return -acc / prob.coef[pivot];
  };
  auto cost = [&](const std::vector<double>& x) {
    double acc = 0.0;
    for (std::size_t v = 0; v < dim; ++v) {
      const double xv = v == pivot ? pivot_value(x) : x[v];
      acc += 0.5 * prob.weight[v] * (prob.target[v] - xv) * (prob.target[v] - xv);
    }
    return acc;
  };

  double best = kInf;
  std::vector<double> x(dim);
  for (int s = 0; s < starts; ++s) {
    for (std::size_t v = 0; v < dim; ++v) x[v] = prob.target[v] + 4.0 * (rng.uniform() - 0.5);
    const double wp = prob.weight[pivot];
    for (int sweep = 0; sweep < 200000; ++sweep) {
      double moved = 0.0;
      for (std::size_t v = 0; v < dim; ++v) {
        if (v == pivot) continue;
        // pivot = p0 + c x_v
        const double c = -prob.coef[v] / prob.coef[pivot];
        const double p0 = pivot_value(x) - c * x[v];
        const double nx = (prob.weight[v] * prob.target[v] + c * wp * (prob.target[pivot] - p0)) /
                          (prob.weight[v] + c * c * wp);
        moved = std::max(moved, std::abs(nx - x[v]));
        x[v] = nx;
      }
      if (moved <= 1e-15 * (1.0 + std::abs(x[0]))) break;
    }
    best = std::min(best, cost(x));
  }
  return best;
}

}  // namespace

double glr_brute_oracle(const EmpiricalState& state, const ContextMatrix& a, std::uint64_t seed) {
  const std::size_t n = a.arms();
  const std::size_t k = a.contexts();
  if (n > 3 || k > 3) throw UsageError("glr_brute_oracle is limited to n, k <= 3");
  const bool sep = state.setting() == Setting::separator;

  // Estimates and per-arm expected rewards, computed directly from the sums.
  std::vector<double> mu(sep ? k : k * n);
  std::vector<double> weight(mu.size());
  for (std::size_t j = 0; j < k; ++j) {
    if (sep) {
      if (state.context_count(j) == 0) throw NotInitializedError("context unseen");
      weight[j] = double(state.context_count(j));
      mu[j] = state.context_sum(j) / weight[j];
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (state.cell_count(j, i) == 0) throw NotInitializedError("cell unseen");
        weight[j * n + i] = double(state.cell_count(j, i));
        mu[j * n + i] = state.cell_sum(j, i) / weight[j * n + i];
      }
    }
  }
  std::vector<double> reward(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) reward[i] += a(j, i) * (sep ? mu[j] : mu[j * n + i]);
  }
  std::size_t b = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (reward[i] > reward[b]) b = i;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i != b && reward[b] - reward[i] <= kTieTolerance) return 0.0;
  }

  RngStream rng(seed, 0x0BAC1E);
  double best = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == b) continue;
    HyperplaneProblem prob;
    if (sep) {
      prob.weight = weight;
      prob.target = mu;
      prob.coef.resize(k);
      bool any = false;
      for (std::size_t j = 0; j < k; ++j) {
        prob.coef[j] = a(j, i) - a(j, b);
        any = any || prob.coef[j] != 0.0;
      }
      if (!any) continue;
    } else {
      // Only the cells of arms b and i enter the constraint; all other cells
      // stay at their estimates at zero cost.
      for (std::size_t j = 0; j < k; ++j) {
        prob.weight.push_back(weight[j * n + i]);
        prob.target.push_back(mu[j * n + i]);
        prob.coef.push_back(a(j, i));
        prob.weight.push_back(weight[j * n + b]);
        prob.target.push_back(mu[j * n + b]);
        prob.coef.push_back(-a(j, b));
      }
    }
    best = std::min(best, solve_on_hyperplane(prob, rng, 50));
  }
  return best;
}

}  // namespace ctxbai
