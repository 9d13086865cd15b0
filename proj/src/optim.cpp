#include "ctxbai/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>

#include "ctxbai/simplex_lp.hpp"

namespace ctxbai {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kWeightClamp = 1e-12;

std::size_t best_from_gaps(std::span<const double> gaps) {
  if (gaps.size() < 2) throw UsageError("need at least two arms");
  std::size_t best = gaps.size();
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (gaps[i] == 0.0) {
      if (best != gaps.size()) throw UsageError("gap vector has more than one zero entry");
      best = i;
    } else if (!(gaps[i] > 0.0) || !std::isfinite(gaps[i])) {
      throw UsageError("suboptimal gaps must be positive and finite");
    }
  }
  if (best == gaps.size()) throw UsageError("gap vector has no zero entry for the best arm");
  return best;
}

}  // namespace

std::vector<double> nonsep_arm_values(std::span<const double> w, std::span<const double> gaps) {
  const std::size_t b = best_from_gaps(gaps);
  if (w.size() != gaps.size()) throw UsageError("weights and gaps differ in length");
  std::vector<double> out(w.size(), kInf);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i == b) continue;
    const double denom = w[b] + w[i];
    out[i] = (w[b] <= 0.0 || w[i] <= 0.0) ? 0.0 : 0.5 * gaps[i] * gaps[i] * w[b] * w[i] / denom;
  }
  return out;
}

double nonsep_objective(std::span<const double> w, std::span<const double> gaps) {
  const auto v = nonsep_arm_values(w, gaps);
  return *std::min_element(v.begin(), v.end());
}

NonsepSolution solve_nonsep(std::span<const double> gaps) {
  const std::size_t b = best_from_gaps(gaps);
  const std::size_t n = gaps.size();
  double min_gap = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    if (i != b) min_gap = std::min(min_gap, gaps[i]);
  }
  const double g2 = min_gap * min_gap;

  // Strictly decreasing on the bracket; lhs(lo) >= 1 >= lhs(hi).
  auto lhs = [&](double w) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == b) continue;
      const double x = w * gaps[i] * gaps[i] - 1.0;
      acc += 1.0 / (x * x);
    }
    return acc;
  };

  NonsepSolution sol;
  sol.bracket_lo = 2.0 / g2;
  sol.bracket_hi = (1.0 + std::sqrt(double(n - 1))) / g2;
  double lo = sol.bracket_lo;
  double hi = sol.bracket_hi;
  while (hi - lo > 1e-14 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (lhs(mid) > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double root = std::abs(lhs(lo) - 1.0) <= std::abs(lhs(hi) - 1.0) ? lo : hi;
  sol.root = root;
  sol.residual = std::abs(lhs(root) - 1.0);

  std::vector<double> u(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = i == b ? root : root / (root * gaps[i] * gaps[i] - 1.0);
    total += u[i];
  }
  for (auto& x : u) x /= total;
  sol.weights.w = std::move(u);
  return sol;
}

WeightVector solve_nonsep_weights(std::span<const double> gaps) { return solve_nonsep(gaps).weights; }

double sep_objective(std::span<const double> wz, const ContextMatrix& a,
                     std::span<const double> gaps) {
  const std::size_t b = best_from_gaps(gaps);
  const std::size_t k = a.contexts();
  if (wz.size() != k || gaps.size() != a.arms()) throw UsageError("sep_objective: dimension mismatch");
  double best = kInf;
  for (std::size_t i = 0; i < a.arms(); ++i) {
    if (i == b) continue;
    double denom = 0.0;
    bool starved = false;
    bool any_diff = false;
    for (std::size_t j = 0; j < k; ++j) {
      const double d = a(j, b) - a(j, i);
      if (d == 0.0) continue;
      any_diff = true;
      if (wz[j] <= 0.0) {
        starved = true;
        break;
      }
      denom += d * d / wz[j];
    }
    if (!any_diff) continue;
    const double v = starved ? 0.0 : gaps[i] * gaps[i] / (2.0 * denom);
    best = std::min(best, v);
  }
  return best;
}

double sep_objective(const ContextDistribution& wz, const Instance& inst) {
  return sep_objective(wz.p, inst.a(), gaps(inst));
}

namespace {

// Challenger terms g_i(lambda) = gap_i^2 / (2 sum_j d_ij^2 / (A lambda)_j),
// each concave in the arm mixture lambda.
class SepProblem {
 public:
  SepProblem(const ContextMatrix& a, std::span<const double> gaps) : a_(a) {
    const std::size_t b = best_from_gaps(gaps);
    for (std::size_t i = 0; i < a.arms(); ++i) {
      if (i == b) continue;
      std::vector<double> d2(a.contexts());
      double total = 0.0;
      for (std::size_t j = 0; j < a.contexts(); ++j) {
        const double d = a(j, b) - a(j, i);
        d2[j] = d * d;
        total += d2[j];
      }
      if (total == 0.0) continue;
      half_gap2_.push_back(0.5 * gaps[i] * gaps[i]);
      diff2_.push_back(std::move(d2));
    }
    if (diff2_.empty()) throw UsageError("every challenger column equals the best column");
  }

  std::size_t pieces() const { return diff2_.size(); }
  std::size_t arms() const { return a_.arms(); }
  const ContextMatrix& a() const { return a_; }

  struct Eval {
    double phi = kInf;
    std::vector<double> value;               // per piece
    std::vector<std::vector<double>> grad;   // per piece, d/d lambda
  };

  Eval evaluate(const std::vector<double>& lambda) const {
    const std::size_t k = a_.contexts();
    const std::size_t n = a_.arms();
    std::vector<double> w = a_.mix(lambda);
    for (auto& x : w) x = std::max(x, kWeightClamp);
    Eval e;
    e.value.resize(pieces());
    e.grad.assign(pieces(), std::vector<double>(n, 0.0));
    std::vector<double> dw(k);
    for (std::size_t p = 0; p < pieces(); ++p) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += diff2_[p][j] / w[j];
      const double v = half_gap2_[p] / s;
      e.value[p] = v;
      e.phi = std::min(e.phi, v);
      const double scale = half_gap2_[p] / (s * s);
      for (std::size_t j = 0; j < k; ++j) dw[j] = scale * diff2_[p][j] / (w[j] * w[j]);
      for (std::size_t m = 0; m < n; ++m) {
        double acc = 0.0;
        for (std::size_t j = 0; j < k; ++j) acc += dw[j] * a_(j, m);
        e.grad[p][m] = acc;
      }
    }
    return e;
  }

 private:
  const ContextMatrix& a_;
  std::vector<double> half_gap2_;
  std::vector<std::vector<double>> diff2_;
};

// Affine upper bound intercept + slope·lambda on one concave piece.
struct Cut {
  double intercept;
  std::vector<double> slope;
};

struct CutBatch {
  std::size_t id;
  std::vector<Cut> cuts;
};

CutBatch make_batch(std::size_t id, const std::vector<double>& lambda, const SepProblem::Eval& e) {
  CutBatch batch{id, {}};
  for (std::size_t p = 0; p < e.value.size(); ++p) {
    double dot = 0.0;
    for (std::size_t m = 0; m < lambda.size(); ++m) dot += e.grad[p][m] * lambda[m];
    batch.cuts.push_back({e.value[p] - dot, e.grad[p]});
  }
  return batch;
}

struct ModelMax {
  bool ok = false;
  double z = 0.0;
  std::vector<double> lambda;
};

// maximize z  s.t.  z <= cut(lambda) for all cuts,  lambda on the simplex,
// lo <= lambda <= hi.
ModelMax maximize_model(const std::deque<CutBatch>& bundle, const std::vector<double>& lo,
                        const std::vector<double>& hi, bool boxed) {
  const std::size_t n = lo.size();
  std::size_t ncuts = 0;
  for (const auto& b : bundle) ncuts += b.cuts.size();
  const std::size_t zp = n;
  const std::size_t zm = n + 1;
  const std::size_t slack0 = n + 2;
  const std::size_t box0 = slack0 + ncuts;
  const std::size_t cols = box0 + (boxed ? n : 0);
  const std::size_t rows = ncuts + 1 + (boxed ? n : 0);
  Matrix m(rows, cols);
  std::vector<double> rhs(rows, 0.0);
  std::size_t r = 0;
  for (const auto& b : bundle) {
    for (const auto& cut : b.cuts) {
      double shift = cut.intercept;
      for (std::size_t i = 0; i < n; ++i) {
        m(r, i) = -cut.slope[i];
        shift += cut.slope[i] * lo[i];
      }
      m(r, zp) = 1.0;
      m(r, zm) = -1.0;
      m(r, slack0 + r) = 1.0;
      rhs[r] = shift;
      ++r;
    }
  }
  double lo_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m(r, i) = 1.0;
    lo_sum += lo[i];
  }
  rhs[r] = 1.0 - lo_sum;
  ++r;
  if (boxed) {
    for (std::size_t i = 0; i < n; ++i, ++r) {
      m(r, i) = 1.0;
      m(r, box0 + i) = 1.0;
      rhs[r] = hi[i] - lo[i];
    }
  }
  std::vector<double> cost(cols, 0.0);
  cost[zp] = 1.0;
  cost[zm] = -1.0;
  const auto res = solve_lp(m, rhs, cost);
  ModelMax out;
  if (res.status != LpStatus::optimal) return out;
  out.ok = true;
  out.z = res.x[zp] - res.x[zm];
  out.lambda.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.lambda[i] = std::max(lo[i] + res.x[i], 0.0);
    total += out.lambda[i];
  }
  if (!(total > 0.5)) return ModelMax{};
  for (auto& x : out.lambda) x /= total;
  return out;
}

constexpr std::size_t kMaxBundle = 12;

}  // namespace

SepSolution solve_sep(const ContextMatrix& a, std::span<const double> gaps,
                      const SepSolverOptions& opt) {
  const SepProblem prob(a, gaps);
  const std::size_t n = a.arms();

  std::vector<double> center(n, 1.0 / double(n));
  if (opt.warm_start && opt.warm_start->size() == n && on_simplex(*opt.warm_start, 1e-9)) {
    center = *opt.warm_start;
  }
  auto ec = prob.evaluate(center);
  std::size_t next_id = 0;
  std::size_t center_id = next_id;
  std::deque<CutBatch> bundle;
  bundle.push_back(make_batch(next_id++, center, ec));

  auto add_batch = [&](CutBatch batch) {
    bundle.push_back(std::move(batch));
    while (bundle.size() > kMaxBundle) {
      auto victim = std::find_if(bundle.begin(), bundle.end(),
                                 [&](const CutBatch& b) { return b.id != center_id; });
      bundle.erase(victim);
    }
  };

  const std::vector<double> zeros(n, 0.0);
  const std::vector<double> ones(n, 1.0);
  double radius = 0.25;
  SepSolution sol;
  sol.optimality_gap = kInf;
  std::size_t iter = 0;
  for (; iter < opt.max_iterations; ++iter) {
    const auto full = maximize_model(bundle, zeros, ones, false);
    if (!full.ok) break;
    sol.optimality_gap = std::max(full.z - ec.phi, 0.0);
    if (sol.optimality_gap <= opt.tol) {
      sol.converged = true;
      break;
    }

    // Global candidate from the whole-simplex model.
    auto ef = prob.evaluate(full.lambda);
    add_batch(make_batch(next_id++, full.lambda, ef));
    if (ef.phi > ec.phi) {
      center = full.lambda;
      ec = std::move(ef);
      center_id = next_id - 1;
      continue;
    }

    std::vector<double> lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = std::max(0.0, center[i] - radius);
      hi[i] = std::min(1.0, center[i] + radius);
    }
    const auto tr = maximize_model(bundle, lo, hi, true);
    if (!tr.ok) break;
    const double predicted = tr.z - ec.phi;
    if (predicted <= 0.0) {
      radius = std::min(1.0, radius * 4.0);
      continue;
    }
    auto et = prob.evaluate(tr.lambda);
    const double actual = et.phi - ec.phi;
    add_batch(make_batch(next_id++, tr.lambda, et));
    if (actual >= 0.1 * predicted) {
      center = tr.lambda;
      ec = std::move(et);
      center_id = next_id - 1;
      if (actual >= 0.75 * predicted) radius = std::min(1.0, radius * 2.0);
    } else {
      radius = std::max(radius * 0.5, 1e-12);
    }
  }
  sol.iterations = iter;
  sol.objective = ec.phi;
  sol.wz.p = a.mix(center);
  sol.certificate = ArmMixture{center, sol.wz};
  return sol;
}

SepSolution solve_sep_weights(const Instance& inst, double tol) {
  if (inst.setting() != Setting::separator) throw UsageError("solve_sep_weights needs a separator instance");
  SepSolverOptions opt;
  opt.tol = tol;
  return solve_sep(inst.a(), gaps(inst), opt);
}

CharacteristicTime characteristic_time(const Instance& inst) {
  const auto g = gaps(inst);
  CharacteristicTime ct;
  if (inst.setting() == Setting::non_separator) {
    ct.weights = solve_nonsep_weights(g).w;
    ct.objective = nonsep_objective(ct.weights, g);
  } else {
    const auto sol = solve_sep_weights(inst);
    ct.weights = sol.wz.p;
    ct.mixture = sol.certificate.pi;
    ct.objective = sol.objective;
  }
  ct.t_star = 1.0 / ct.objective;
  return ct;
}

double d_bernoulli(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw UsageError("d_bernoulli needs 0 < delta < 1");
  return (1.0 - 2.0 * delta) * std::log((1.0 - delta) / delta);
}

namespace {

// Calls f on every composition of `steps` into `parts` nonnegative integers.
void for_each_grid_node(std::size_t parts, std::size_t steps,
                        const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> node(parts, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t left) {
    if (pos + 1 == parts) {
      node[pos] = left;
      f(node);
      return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
      node[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, steps);
}

}  // namespace

CharacteristicTime grid_oracle(const Instance& inst, double resolution) {
  const std::size_t n = inst.arms();
  const std::size_t k = inst.contexts();
  if (n > 4 || k > 4) throw UsageError("grid_oracle is limited to n, k <= 4");
  if (!(resolution > 0.0 && resolution <= 0.5)) throw UsageError("grid_oracle resolution must be in (0, 1/2]");
  const auto steps = std::size_t(std::llround(1.0 / resolution));
  const auto g = gaps(inst);

  CharacteristicTime best;
  best.objective = -1.0;
  std::vector<double> point(n);
  for_each_grid_node(n, steps, [&](const std::vector<std::size_t>& node) {
    for (std::size_t i = 0; i < n; ++i) point[i] = double(node[i]) / double(steps);
    double v;
    if (inst.setting() == Setting::non_separator) {
      v = nonsep_objective(point, g);
    } else {
      v = sep_objective(inst.a().mix(point), inst.a(), g);
    }
    if (v > best.objective) {
      best.objective = v;
      if (inst.setting() == Setting::non_separator) {
        best.weights = point;
      } else {
        best.weights = inst.a().mix(point);
        best.mixture = point;
      }
    }
  });
  best.t_star = best.objective > 0.0 ? 1.0 / best.objective : kInf;
  return best;
}

}  // namespace ctxbai
