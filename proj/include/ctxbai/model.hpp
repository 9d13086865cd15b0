#pragma once
// Bandit instances with post-action context: the context matrix A, the mean
// specification, running empirical state, and the reward/gap helpers shared
// by every other part of the library.
//
// Indices are 0-based everywhere in the library. File formats and CLI output
// convert to 1-based.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctxbai {

using ArmIndex = std::size_t;
using ContextIndex = std::size_t;

/// Caller passed arguments outside an operation's domain.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A statistic needed a cell/context that has not been observed yet.
class NotInitializedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The instance (or estimate) has two arms tied for the best expected reward.
class NoUniqueBestArm : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kTieTolerance = 1e-12;
inline constexpr double kColumnSumTolerance = 1e-12;
inline constexpr double kSimplexTolerance = 1e-10;

/// Dense row-major matrix. For context/mean matrices rows are contexts (j)
/// and columns are arms (i).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::vector<double> column(std::size_t c) const;
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// k×n matrix of P(Z = j | X = i). Columns are distributions over contexts
/// with strictly positive entries.
class ContextMatrix {
 public:
  ContextMatrix() = default;
  /// Validates shape, positivity and column sums; throws UsageError.
  explicit ContextMatrix(Matrix entries);

  std::size_t contexts() const { return entries_.rows(); }
  std::size_t arms() const { return entries_.cols(); }
  double operator()(ContextIndex j, ArmIndex i) const { return entries_(j, i); }
  const Matrix& matrix() const { return entries_; }
  std::vector<double> column(ArmIndex i) const { return entries_.column(i); }
  double min_entry() const;

  /// A·pi for a mixture pi over arms.
  std::vector<double> mix(std::span<const double> pi) const;

  bool operator==(const ContextMatrix&) const = default;

 private:
  Matrix entries_;
};

enum class Setting { separator, non_separator };

std::string to_string(Setting s);
Setting setting_from_string(const std::string& s);

/// Reward means. Separator: one mean per context (stored k×1).
/// Non-separator: one mean per (context, arm) cell (k×n).
class MeanSpec {
 public:
  MeanSpec() = default;
  static MeanSpec separator(std::vector<double> per_context);
  static MeanSpec non_separator(Matrix per_cell);

  Setting setting() const { return setting_; }
  bool is_separator() const { return setting_ == Setting::separator; }
  std::size_t contexts() const { return means_.rows(); }

  /// Mean reward of cell (j, i); the arm is ignored in the separator setting.
  double mean(ContextIndex j, ArmIndex i) const {
    return setting_ == Setting::separator ? means_(j, 0) : means_(j, i);
  }
  const Matrix& matrix() const { return means_; }
  std::vector<double> per_context() const;  // separator only

  bool operator==(const MeanSpec&) const = default;

 private:
  Setting setting_ = Setting::non_separator;
  Matrix means_;
};

class Instance {
 public:
  Instance() = default;
  /// Checks that dimensions agree and all means are finite. Ties in the best
  /// arm are allowed here so estimates can be represented; use best_arm().
  Instance(ContextMatrix a, MeanSpec mu);

  const ContextMatrix& a() const { return a_; }
  const MeanSpec& mu() const { return mu_; }
  Setting setting() const { return mu_.setting(); }
  std::size_t arms() const { return a_.arms(); }
  std::size_t contexts() const { return a_.contexts(); }

 private:
  ContextMatrix a_;
  MeanSpec mu_;
};

/// Point on the probability simplex over arms.
struct WeightVector {
  std::vector<double> w;
};

/// Point on the probability simplex over contexts.
struct ContextDistribution {
  std::vector<double> p;
};

bool on_simplex(std::span<const double> v, double tol = kSimplexTolerance);

double expected_reward(const Instance& inst, ArmIndex arm);
std::vector<double> expected_rewards(const ContextMatrix& a, const MeanSpec& mu);

/// Index of the unique maximum, or nullopt when another entry is within
/// kTieTolerance of it.
std::optional<std::size_t> unique_argmax(std::span<const double> values,
                                         double tol = kTieTolerance);

std::optional<ArmIndex> best_arm(const Instance& inst);

/// Sub-optimality gaps; throws NoUniqueBestArm on ties.
std::vector<double> gaps(const Instance& inst);

/// Counts and reward sums collected during one run.
class EmpiricalState {
 public:
  EmpiricalState() = default;
  EmpiricalState(std::size_t arms, std::size_t contexts, Setting setting);

  void record(ArmIndex arm, ContextIndex context, double reward);

  std::size_t arms() const { return arm_counts_.size(); }
  std::size_t contexts() const { return context_counts_.size(); }
  Setting setting() const { return setting_; }
  std::size_t t() const { return t_; }

  std::size_t arm_count(ArmIndex i) const { return arm_counts_[i]; }
  std::size_t context_count(ContextIndex j) const { return context_counts_[j]; }
  std::size_t cell_count(ContextIndex j, ArmIndex i) const {
    return cell_counts_[j * arms() + i];
  }
  double cell_sum(ContextIndex j, ArmIndex i) const { return cell_sums_[j * arms() + i]; }
  double context_sum(ContextIndex j) const { return context_sums_[j]; }
  double arm_sum(ArmIndex i) const { return arm_sums_[i]; }

  const std::vector<std::size_t>& arm_counts() const { return arm_counts_; }
  const std::vector<std::size_t>& context_counts() const { return context_counts_; }

  /// True when every mean the setting needs has at least one observation.
  bool initialized() const;
  bool all_cells_seen() const;
  bool all_contexts_seen() const;

  std::vector<double> arm_frequencies() const;
  std::vector<double> context_frequencies() const;

 private:
  Setting setting_ = Setting::non_separator;
  std::size_t t_ = 0;
  std::vector<std::size_t> arm_counts_;
  std::vector<std::size_t> context_counts_;
  std::vector<std::size_t> cell_counts_;
  std::vector<double> cell_sums_;
  std::vector<double> context_sums_;
  std::vector<double> arm_sums_;
};

/// Cell (non-separator) or context (separator) sample means; throws
/// NotInitializedError if a required count is zero.
MeanSpec empirical_means(const EmpiricalState& state);

}  // namespace ctxbai
