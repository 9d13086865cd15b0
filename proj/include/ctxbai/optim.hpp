#pragma once
// Optimal sampling proportions and the characteristic time T* for both
// settings, plus a brute-force grid validator.

#include <optional>
#include <span>
#include <vector>

#include "ctxbai/geometry.hpp"
#include "ctxbai/model.hpp"

namespace ctxbai {

struct CharacteristicTime {
  double t_star = 0.0;
  double objective = 0.0;
  /// Arm weights (non-separator) or context distribution (separator).
  std::vector<double> weights;
  /// Separator only: arm mixture certifying that `weights` lies in ch(A).
  std::vector<double> mixture;
};

/// min over i != i* of (gap_i^2 / 2) * w_b w_i / (w_b + w_i). Zero when the
/// best arm or any suboptimal arm has zero weight.
double nonsep_objective(std::span<const double> w, std::span<const double> gaps);

/// Per-suboptimal-arm terms of nonsep_objective (entry for the best arm is +inf).
std::vector<double> nonsep_arm_values(std::span<const double> w, std::span<const double> gaps);

struct NonsepSolution {
  WeightVector weights;
  double root = 0.0;      ///< w* solving sum 1/(w gap_i^2 - 1)^2 = 1
  double residual = 0.0;  ///< |lhs(root) - 1|
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

/// Unique maximizer of nonsep_objective via bisection on the root equation.
/// `gaps` has exactly one zero entry (the best arm). Throws UsageError for
/// n < 2 or non-positive suboptimal gaps.
NonsepSolution solve_nonsep(std::span<const double> gaps);
WeightVector solve_nonsep_weights(std::span<const double> gaps);

/// min over i != i* of gap_i^2 / (2 sum_j (A_{j,b} - A_{j,i})^2 / wz_j).
/// Challengers whose column equals the best column are skipped (+inf term);
/// a zero wz_j facing a nonzero difference makes that term zero.
double sep_objective(std::span<const double> wz, const ContextMatrix& a,
                     std::span<const double> gaps);
double sep_objective(const ContextDistribution& wz, const Instance& inst);

struct SepSolution {
  ContextDistribution wz;
  ArmMixture certificate;
  double objective = 0.0;
  /// Certified bound on (supremum - objective).
  double optimality_gap = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

struct SepSolverOptions {
  double tol = 1e-9;  ///< absolute tolerance on the objective
  std::size_t max_iterations = 500;
  /// Optional starting mixture over arms (e.g. last round's solution).
  std::optional<std::vector<double>> warm_start;
};

/// Maximizes sep_objective over ch(A) by a box-trust-region cutting-plane
/// method over arm mixtures. Every linearization of a concave challenger term
/// over-estimates it, so the model maximum over the whole simplex certifies
/// the optimality gap.
SepSolution solve_sep(const ContextMatrix& a, std::span<const double> gaps,
                      const SepSolverOptions& opt = {});
SepSolution solve_sep_weights(const Instance& inst, double tol = 1e-9);

CharacteristicTime characteristic_time(const Instance& inst);

/// KL divergence between Bernoulli(delta) and Bernoulli(1 - delta).
double d_bernoulli(double delta);

/// Exhaustive search over simplex grid nodes with spacing `resolution`
/// (arm weights, or arm mixtures for the separator). n, k <= 4.
CharacteristicTime grid_oracle(const Instance& inst, double resolution);

}  // namespace ctxbai
