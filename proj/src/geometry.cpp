#include "ctxbai/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "ctxbai/simplex_lp.hpp"

namespace ctxbai {

namespace {

// Rows: one per context plus the mixture-sums-to-one row.
Matrix hull_rows(const Matrix& a, std::size_t extra_cols) {
  const std::size_t k = a.rows();
  const std::size_t n = a.cols();
  Matrix m(k + 1, n + extra_cols);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) m(j, i) = a(j, i);
  }
  for (std::size_t i = 0; i < n; ++i) m(k, i) = 1.0;
  return m;
}

std::vector<double> normalized(std::vector<double> pi) {
  double total = 0.0;
  for (auto& x : pi) {
    x = std::max(x, 0.0);
    total += x;
  }
  if (total > 0.0) {
    for (auto& x : pi) x /= total;
  }
  return pi;
}

}  // namespace

double certificate_residual(const Matrix& a, const ArmMixture& m) {
  if (m.pi.size() != a.cols() || m.target.p.size() != a.rows()) {
    throw UsageError("certificate_residual: dimension mismatch");
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < a.rows(); ++j) {
    double img = 0.0;
    for (std::size_t i = 0; i < a.cols(); ++i) img += a(j, i) * m.pi[i];
    worst = std::max(worst, std::abs(img - m.target.p[j]));
  }
  return worst;
}

std::optional<ArmMixture> hull_membership(const ContextDistribution& p, const Matrix& a,
                                          double tol) {
  if (p.p.size() != a.rows()) throw UsageError("hull_membership: dimension mismatch");
  const Matrix rows = hull_rows(a, 0);
  std::vector<double> b(p.p);
  b.push_back(1.0);
  const std::vector<double> cost(a.cols(), 0.0);
  LpOptions opt;
  opt.feasibility_tol = tol;
  const auto res = solve_lp(rows, b, cost, opt);
  if (res.status != LpStatus::optimal) return std::nullopt;
  ArmMixture mix{normalized(res.x), p};
  if (certificate_residual(a, mix) > tol) return std::nullopt;
  return mix;
}

ScaleSolution solve_scale_lp(const std::vector<double>& origin,
                             const std::vector<double>& direction, const Matrix& a) {
  const std::size_t k = a.rows();
  const std::size_t n = a.cols();
  if (origin.size() != k || direction.size() != k) {
    throw UsageError("solve_scale_lp: dimension mismatch");
  }
  double dnorm = 0.0;
  for (double d : direction) dnorm = std::max(dnorm, std::abs(d));
  if (dnorm <= kDegenerateRayTolerance) throw DegenerateRay("ray direction is zero");

  // Substitute s = 1 + s' with s' >= 0:  A·lambda - s'·d = origin + d.
  Matrix rows = hull_rows(a, 1);
  std::vector<double> b(k + 1);
  for (std::size_t j = 0; j < k; ++j) {
    rows(j, n) = -direction[j];
    b[j] = origin[j] + direction[j];
  }
  b[k] = 1.0;
  std::vector<double> cost(n + 1, 0.0);
  cost[n] = 1.0;
  LpOptions opt;
  opt.feasibility_tol = kHullTolerance;
  const auto res = solve_lp(rows, b, cost, opt);
  if (res.status == LpStatus::infeasible) {
    throw RayInfeasible("ray through-point lies outside ch(A)");
  }
  if (res.status == LpStatus::unbounded) {
    throw RayInfeasible("ray scale unbounded; direction leaves the simplex plane");
  }
  if (res.status == LpStatus::numerical) throw std::runtime_error("ray scale LP lost accuracy");
  ScaleSolution out;
  out.scale = 1.0 + res.x[n];
  out.lambda = normalized(std::vector<double>(res.x.begin(), res.x.begin() + long(n)));
  return out;
}

RayExit ray_exit(const ContextDistribution& origin, const ContextDistribution& through,
                 const Matrix& a) {
  const std::size_t k = a.rows();
  if (origin.p.size() != k || through.p.size() != k) {
    throw UsageError("ray_exit: dimension mismatch");
  }
  std::vector<double> d(k);
  for (std::size_t j = 0; j < k; ++j) d[j] = through.p[j] - origin.p[j];
  const auto sol = solve_scale_lp(origin.p, d, a);

  RayExit out;
  out.scale = sol.scale;
  out.exit_point.p.resize(k);
  for (std::size_t j = 0; j < k; ++j) out.exit_point.p[j] = origin.p[j] + sol.scale * d[j];
  out.mixture = ArmMixture{sol.lambda, out.exit_point};
  return out;
}

}  // namespace ctxbai
