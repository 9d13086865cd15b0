#pragma once
// GLR statistics and mixture-martingale thresholds for both settings and for
// the context-blind baseline.

#include <cstdint>
#include <optional>
#include <span>

#include "ctxbai/model.hpp"

namespace ctxbai {

struct GlrReport {
  double lambda = 0.0;
  std::optional<ArmIndex> challenger;
  /// Empty when the estimate has no unique best arm (lambda is then 0).
  std::optional<ArmIndex> empirical_best;
};

/// min over i != b of gap_i^2 / (2 sum_j (A_jb^2/N_jb + A_ji^2/N_ji)).
/// Throws NotInitializedError if some cell count is zero.
GlrReport glr_nonsep(const EmpiricalState& state, const ContextMatrix& a);

/// min over i != b of gap_i^2 / (2 sum_j (A_jb - A_ji)^2 / N^Z_j).
/// Throws NotInitializedError if some context count is zero.
GlrReport glr_sep(const EmpiricalState& state, const ContextMatrix& a);

/// 4k ln(4 + ln(t/2k)) + 2k C^g(ln((n-1)/delta) / 2k). The inner argument is
/// clamped below at e.
double threshold_nonsep(std::size_t t, double delta, std::size_t n, std::size_t k);

/// 2 sum_j ln(4 + ln N^Z_j) + k C^g(ln(1/delta) / k).
double threshold_sep(const EmpiricalState& state, double delta);

/// Sub-Gaussian variance proxy of a unit-variance Gaussian mixture whose
/// component means lie in [lo, hi].
double subgaussian_variance(double lo, double hi);

/// Classic (context-blind) Gaussian GLR with variance sigma2.
GlrReport glr_classic(std::span<const std::size_t> counts, std::span<const double> means,
                      double sigma2);

/// 4 ln(4 + ln(t/2)) + 2 C^g(ln((n-1)/delta) / 2), inner argument clamped at e.
double threshold_classic(std::size_t t, double delta, std::size_t n);

/// Independent numerical evaluation of the GLR infimum: for each challenger
/// the weighted squared distance is minimized over the boundary hyperplane by
/// exact cyclic coordinate descent (one pivot coordinate eliminated), from 50
/// random starts. Limited to n, k <= 3.
double glr_brute_oracle(const EmpiricalState& state, const ContextMatrix& a,
                        std::uint64_t seed = 0);

}  // namespace ctxbai
