#pragma once
// Geometry of the achievable context distributions ch(A), the convex hull of
// the columns of A. Used by G-tracking to turn a target context distribution
// into a distribution over arms.

#include <optional>
#include <stdexcept>
#include <vector>

#include "ctxbai/model.hpp"

namespace ctxbai {

/// Inside/outside threshold for hull membership and certificate residuals.
inline constexpr double kHullTolerance = 1e-8;
inline constexpr double kDegenerateRayTolerance = 1e-12;

/// Distribution over arms whose induced context distribution A·pi is `target`.
struct ArmMixture {
  std::vector<double> pi;
  ContextDistribution target;
};

struct RayExit {
  ContextDistribution exit_point;
  /// exit_point = origin + scale * (through - origin), scale >= 1.
  double scale = 1.0;
  ArmMixture mixture;
};

/// origin and through coincide; the ray has no direction.
class DegenerateRay : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// through is not in ch(A), so no s >= 1 is feasible.
class RayInfeasible : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Functions below take the hull generators as the columns of a k x n matrix
// with nonnegative columns summing to one. Zero entries are allowed here,
// unlike in ContextMatrix. The ContextMatrix overloads forward.

/// Max-norm residual ||A·pi - target||_inf.
double certificate_residual(const Matrix& a, const ArmMixture& m);

/// A mixture pi with A·pi = p when p is in ch(A), up to `tol` in the max norm.
std::optional<ArmMixture> hull_membership(const ContextDistribution& p, const Matrix& a,
                                          double tol = kHullTolerance);

struct ScaleSolution {
  double scale = 1.0;
  std::vector<double> lambda;
};

/// maximize s  s.t.  A·lambda = origin + s·direction,  lambda on the simplex,
/// given that s = 1 is feasible. Throws DegenerateRay for a zero direction
/// and RayInfeasible when s = 1 is not feasible.
ScaleSolution solve_scale_lp(const std::vector<double>& origin,
                             const std::vector<double>& direction, const Matrix& a);

/// Extends the ray origin -> through to the boundary of ch(A). `through`
/// always lies on the segment [origin, exit], so every coordinate of
/// `through` is bracketed by origin and exit.
RayExit ray_exit(const ContextDistribution& origin, const ContextDistribution& through,
                 const Matrix& a);

inline double certificate_residual(const ContextMatrix& a, const ArmMixture& m) {
  return certificate_residual(a.matrix(), m);
}
inline std::optional<ArmMixture> hull_membership(const ContextDistribution& p,
                                                 const ContextMatrix& a,
                                                 double tol = kHullTolerance) {
  return hull_membership(p, a.matrix(), tol);
}
inline ScaleSolution solve_scale_lp(const std::vector<double>& origin,
                                    const std::vector<double>& direction, const ContextMatrix& a) {
  return solve_scale_lp(origin, direction, a.matrix());
}
inline RayExit ray_exit(const ContextDistribution& origin, const ContextDistribution& through,
                        const ContextMatrix& a) {
  return ray_exit(origin, through, a.matrix());
}

}  // namespace ctxbai
