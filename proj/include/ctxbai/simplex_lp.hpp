#pragma once
// Dense two-phase tableau simplex for small standard-form programs:
//   maximize c'x  subject to  A x = b,  x >= 0.
// Entering columns follow Dantzig's rule and switch to Bland's rule after a
// run of degenerate pivots, so degenerate programs (common for hull problems)
// cannot cycle. The ratio test is Harris' two-pass variant, which prefers
// large pivot elements among near-ties.

#include <span>
#include <vector>

#include "ctxbai/model.hpp"

namespace ctxbai {

/// `numerical` means the final basis no longer satisfies A x = b within
/// tolerance; the result must not be used.
enum class LpStatus { optimal, infeasible, unbounded, numerical };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  /// Phase-one optimum: minimal L1 violation of A x = b over x >= 0.
  double infeasibility = 0.0;
};

struct LpOptions {
  /// Phase-one optimum above this value means infeasible.
  double feasibility_tol = 1e-9;
  double pivot_tol = 1e-9;
  /// Allowed violation of A x = b, relative to the row's magnitude.
  double residual_tol = 1e-8;
  std::size_t max_pivots = 100000;
};

LpResult solve_lp(const Matrix& a, std::span<const double> b, std::span<const double> c,
                  const LpOptions& opt = {});

}  // namespace ctxbai
