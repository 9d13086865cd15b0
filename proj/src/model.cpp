#include "ctxbai/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ctxbai {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) {
      throw UsageError("ragged matrix: row " + std::to_string(r + 1) + " has " +
                       std::to_string(rows[r].size()) + " entries, expected " +
                       std::to_string(m.cols()));
    }
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

ContextMatrix::ContextMatrix(Matrix entries) : entries_(std::move(entries)) {
  const std::size_t k = entries_.rows();
  const std::size_t n = entries_.cols();
  if (k < 1) throw UsageError("context matrix needs at least one context");
  if (n < 2) throw UsageError("context matrix needs at least two arms");
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double v = entries_(j, i);
      if (!std::isfinite(v) || v <= 0.0) {
        std::ostringstream msg;
        msg << "A[" << j + 1 << "][" << i + 1 << "] = " << v
            << ": context probabilities must be strictly positive";
        throw UsageError(msg.str());
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kColumnSumTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "column " << i + 1 << " of A sums to " << sum << ", expected 1";
      throw UsageError(msg.str());
    }
  }
}

double ContextMatrix::min_entry() const {
  const auto& d = entries_.data();
  return *std::min_element(d.begin(), d.end());
}

std::vector<double> ContextMatrix::mix(std::span<const double> pi) const {
  if (pi.size() != arms()) throw UsageError("mixture length does not match arm count");
  std::vector<double> out(contexts(), 0.0);
  for (std::size_t j = 0; j < contexts(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < arms(); ++i) acc += entries_(j, i) * pi[i];
    out[j] = acc;
  }
  return out;
}

std::string to_string(Setting s) {
  return s == Setting::separator ? "separator" : "non_separator";
}

Setting setting_from_string(const std::string& s) {
  if (s == "separator") return Setting::separator;
  if (s == "non_separator" || s == "non-separator") return Setting::non_separator;
  throw UsageError("unknown instance kind '" + s + "' (expected separator|non_separator)");
}

MeanSpec MeanSpec::separator(std::vector<double> per_context) {
  MeanSpec m;
  m.setting_ = Setting::separator;
  m.means_ = Matrix(per_context.size(), 1);
  for (std::size_t j = 0; j < per_context.size(); ++j) m.means_(j, 0) = per_context[j];
  return m;
}

MeanSpec MeanSpec::non_separator(Matrix per_cell) {
  MeanSpec m;
  m.setting_ = Setting::non_separator;
  m.means_ = std::move(per_cell);
  return m;
}

std::vector<double> MeanSpec::per_context() const {
  if (!is_separator()) throw UsageError("per-context means exist only in the separator setting");
  return means_.column(0);
}

Instance::Instance(ContextMatrix a, MeanSpec mu) : a_(std::move(a)), mu_(std::move(mu)) {
  if (mu_.contexts() != a_.contexts()) {
    throw UsageError("mu has " + std::to_string(mu_.contexts()) + " contexts but A has " +
                     std::to_string(a_.contexts()));
  }
  if (!mu_.is_separator() && mu_.matrix().cols() != a_.arms()) {
    throw UsageError("mu has " + std::to_string(mu_.matrix().cols()) + " arms but A has " +
                     std::to_string(a_.arms()));
  }
  for (double v : mu_.matrix().data()) {
    if (!std::isfinite(v)) throw UsageError("mu contains a non-finite entry");
  }
}

bool on_simplex(std::span<const double> v, double tol) {
  double sum = 0.0;
  for (double x : v) {
    if (!(x >= -tol)) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= tol;
}

std::vector<double> expected_rewards(const ContextMatrix& a, const MeanSpec& mu) {
  std::vector<double> r(a.arms(), 0.0);
  for (std::size_t i = 0; i < a.arms(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.contexts(); ++j) acc += a(j, i) * mu.mean(j, i);
    r[i] = acc;
  }
  return r;
}

double expected_reward(const Instance& inst, ArmIndex arm) {
  if (arm >= inst.arms()) {
    throw UsageError("arm index " + std::to_string(arm) + " out of range for " +
                     std::to_string(inst.arms()) + " arms");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < inst.contexts(); ++j) acc += inst.a()(j, arm) * inst.mu().mean(j, arm);
  return acc;
}

std::optional<std::size_t> unique_argmax(std::span<const double> values, double tol) {
  if (values.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i != best && values[best] - values[i] <= tol) return std::nullopt;
  }
  return best;
}

std::optional<ArmIndex> best_arm(const Instance& inst) {
  const auto r = expected_rewards(inst.a(), inst.mu());
  return unique_argmax(r);
}

std::vector<double> gaps(const Instance& inst) {
  const auto r = expected_rewards(inst.a(), inst.mu());
  const auto best = unique_argmax(r);
  if (!best) throw NoUniqueBestArm("instance has no unique best arm");
  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = i == *best ? 0.0 : r[*best] - r[i];
  return out;
}

EmpiricalState::EmpiricalState(std::size_t arms, std::size_t contexts, Setting setting)
    : setting_(setting),
      arm_counts_(arms, 0),
      context_counts_(contexts, 0),
      cell_counts_(arms * contexts, 0),
      cell_sums_(arms * contexts, 0.0),
      context_sums_(contexts, 0.0),
      arm_sums_(arms, 0.0) {}

void EmpiricalState::record(ArmIndex arm, ContextIndex context, double reward) {
  if (arm >= arms() || context >= contexts()) throw UsageError("observation index out of range");
  ++t_;
  ++arm_counts_[arm];
  ++context_counts_[context];
  ++cell_counts_[context * arms() + arm];
  cell_sums_[context * arms() + arm] += reward;
  context_sums_[context] += reward;
  arm_sums_[arm] += reward;
}

bool EmpiricalState::all_cells_seen() const {
  return std::all_of(cell_counts_.begin(), cell_counts_.end(), [](std::size_t c) { return c > 0; });
}

bool EmpiricalState::all_contexts_seen() const {
  return std::all_of(context_counts_.begin(), context_counts_.end(),
                     [](std::size_t c) { return c > 0; });
}

bool EmpiricalState::initialized() const {
  return setting_ == Setting::separator ? all_contexts_seen() : all_cells_seen();
}

std::vector<double> EmpiricalState::arm_frequencies() const {
  std::vector<double> f(arms(), 0.0);
  if (t_ == 0) return f;
  for (std::size_t i = 0; i < arms(); ++i) f[i] = double(arm_counts_[i]) / double(t_);
  return f;
}

std::vector<double> EmpiricalState::context_frequencies() const {
  std::vector<double> f(contexts(), 0.0);
  if (t_ == 0) return f;
  for (std::size_t j = 0; j < contexts(); ++j) f[j] = double(context_counts_[j]) / double(t_);
  return f;
}

MeanSpec empirical_means(const EmpiricalState& state) {
  const std::size_t k = state.contexts();
  const std::size_t n = state.arms();
  if (state.setting() == Setting::separator) {
    std::vector<double> m(k);
    for (std::size_t j = 0; j < k; ++j) {
      if (state.context_count(j) == 0) {
        throw NotInitializedError("context " + std::to_string(j + 1) + " not observed yet");
      }
      m[j] = state.context_sum(j) / double(state.context_count(j));
    }
    return MeanSpec::separator(std::move(m));
  }
  Matrix m(k, n);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = state.cell_count(j, i);
      if (c == 0) {
        throw NotInitializedError("cell (context " + std::to_string(j + 1) + ", arm " +
                                  std::to_string(i + 1) + ") not observed yet");
      }
      m(j, i) = state.cell_sum(j, i) / double(c);
    }
  }
  return MeanSpec::non_separator(std::move(m));
}

}  // namespace ctxbai
