#pragma once
// Special functions behind the mixture-martingale stopping thresholds.

namespace ctxbai {

/// Riemann zeta for real s > 1, absolute error below 1e-13 on (1, 2].
double riemann_zeta(double s);

/// g(l) = 2l - 2l ln(4l) + ln zeta(2l) - ln(1 - l)/2 on (1/2, 1).
/// Diverges at both ends of the interval.
double g_fn(double lambda);

/// C^g(x) = min over l in (1/2, 1] of (g(l) + x) / l, for x >= 0.
/// Behaves like x + ln x for large x. Results are memoized per x.
double c_g(double x);

/// Same minimization without the cache; also returns the minimizing lambda.
struct CgMinimum {
  double value;
  double lambda;
};
CgMinimum c_g_uncached(double x);

}  // namespace ctxbai
