#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctxbai/env.hpp"
#include "ctxbai/geometry.hpp"
#include "ctxbai/simplex_lp.hpp"
#include "fixtures.hpp"

using namespace ctxbai;
using ctxbai::testing::identity;
using ctxbai::testing::max_abs_diff;

namespace {

// Euclidean projection onto the probability simplex (sort-based).
std::vector<double> project_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    const double t = (css - 1.0) / double(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  for (auto& x : v) x = std::max(x - theta, 0.0);
  return v;
}

// Distance from p to ch(A) by projected gradient on min ||A pi - p||^2.
double pg_distance(const Matrix& a, const std::vector<double>& p) {
  const std::size_t k = a.rows(), n = a.cols();
  std::vector<double> pi(n, 1.0 / double(n));
  double lip = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) lip += a(j, i) * a(j, i);
  }
  const double step = 1.0 / (2.0 * lip);
  std::vector<double> r(k);
  for (int it = 0; it < 20000; ++it) {
    for (std::size_t j = 0; j < k; ++j) {
      r[j] = -p[j];
      for (std::size_t i = 0; i < n; ++i) r[j] += a(j, i) * pi[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double g = 0.0;
      for (std::size_t j = 0; j < k; ++j) g += 2.0 * a(j, i) * r[j];
      pi[i] -= step * g;
    }
    pi = project_simplex(pi);
  }
  double d = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    double img = -p[j];
    for (std::size_t i = 0; i < n; ++i) img += a(j, i) * pi[i];
    d = std::max(d, std::abs(img));
  }
  return d;
}

std::vector<double> random_simplex(RngStream& rng, std::size_t k) {
  std::vector<double> v(k);
  double s = 0.0;
  for (auto& x : v) {
    x = -std::log(1.0 - rng.uniform());
    s += x;
  }
  for (auto& x : v) x /= s;
  return v;
}

Matrix random_columns(RngStream& rng, std::size_t k, std::size_t n) {
  Matrix a(k, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = random_simplex(rng, k);
    for (std::size_t j = 0; j < k; ++j) a(j, i) = c[j];
  }
  return a;
}

}  // namespace

TEST_CASE("simplex LP small problems") {
  // max x1 + x2  s.t.  x1 + 2 x2 + s1 = 4,  3 x1 + x2 + s2 = 6
  const Matrix a = Matrix::from_rows({{1, 2, 1, 0}, {3, 1, 0, 1}});
  const std::vector<double> b{4, 6}, c{1, 1, 0, 0};
  const auto res = solve_lp(a, b, c);
  REQUIRE(res.status == LpStatus::optimal);
  CHECK(res.objective == doctest::Approx(2.8));
  CHECK(res.x[0] == doctest::Approx(1.6));
  CHECK(res.x[1] == doctest::Approx(1.2));

  const Matrix inf = Matrix::from_rows({{1, 1}});
  const std::vector<double> bneg{-1}, c2{1, 0};
  CHECK(solve_lp(inf, bneg, c2).status == LpStatus::infeasible);

  const Matrix unb = Matrix::from_rows({{1, -1}});
  const std::vector<double> b1{1}, c3{0, 1};
  CHECK(solve_lp(unb, b1, c3).status == LpStatus::unbounded);
}

TEST_CASE("membership in the full simplex") {
  const Matrix a = identity(3);
  RngStream rng(3, 0);
  for (int t = 0; t < 20; ++t) {
    const auto p = random_simplex(rng, 3);
    const auto m = hull_membership(ContextDistribution{p}, a);
    REQUIRE(m.has_value());
    CHECK(max_abs_diff(m->pi, p) < 1e-9);
  }
}

TEST_CASE("membership at a vertex and outside") {
  const auto inst = ctxbai::testing::rare_context_instance();
  const auto m = hull_membership(ContextDistribution{inst.a().column(2)}, inst.a());
  REQUIRE(m.has_value());
  CHECK(max_abs_diff(m->pi, {0.0, 0.0, 1.0}) < 1e-9);
  CHECK_FALSE(hull_membership(ContextDistribution{{1.0, 0.0, 0.0}}, inst.a()).has_value());
}

TEST_CASE("ray exit through the full simplex") {
  const Matrix a = identity(3);
  const auto r = ray_exit(ContextDistribution{{1.0 / 3, 1.0 / 3, 1.0 / 3}},
                          ContextDistribution{{0.2, 0.4, 0.4}}, a);
  CHECK(r.scale == doctest::Approx(2.5));
  CHECK(max_abs_diff(r.exit_point.p, {0.0, 0.5, 0.5}) < 1e-9);
  CHECK(certificate_residual(a, r.mixture) < 1e-9);

  // exit at a vertex: the mixture is the indicator of that arm
  const auto v = ray_exit(ContextDistribution{{1.0 / 3, 1.0 / 3, 1.0 / 3}},
                          ContextDistribution{{0.6, 0.2, 0.2}}, a);
  CHECK(max_abs_diff(v.exit_point.p, {1.0, 0.0, 0.0}) < 1e-9);
  CHECK(max_abs_diff(v.mixture.pi, {1.0, 0.0, 0.0}) < 1e-9);
}

TEST_CASE("ray already on the boundary stays put") {
  const auto r = ray_exit(ContextDistribution{{0.5, 0.25, 0.25}},
                          ContextDistribution{{0.6, 0.4, 0.0}}, identity(3));
  CHECK(r.scale == doctest::Approx(1.0));
  CHECK(max_abs_diff(r.exit_point.p, {0.6, 0.4, 0.0}) < 1e-9);
}

TEST_CASE("ray from outside through a segment hull") {
  const Matrix a = Matrix::from_rows({{0.9, 0.1}, {0.1, 0.9}});
  const auto r = ray_exit(ContextDistribution{{0.95, 0.05}}, ContextDistribution{{0.5, 0.5}}, a);
  CHECK(max_abs_diff(r.exit_point.p, {0.1, 0.9}) < 1e-9);
  CHECK(r.scale == doctest::Approx(0.85 / 0.45));
}

TEST_CASE("degenerate and infeasible rays") {
  const ContextDistribution c{{0.5, 0.5}};
  const Matrix a = Matrix::from_rows({{0.9, 0.1}, {0.1, 0.9}});
  CHECK_THROWS_AS(ray_exit(c, c, a), DegenerateRay);
  CHECK_THROWS_AS(ray_exit(c, ContextDistribution{{0.95, 0.05}}, a), RayInfeasible);
}

TEST_CASE("ray scale agrees with bisection over membership") {
  RngStream rng(17, 0);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(3);
    const std::size_t n = 2 + rng.uniform_index(3);
    const Matrix a = random_columns(rng, k, n);
    const auto origin = random_simplex(rng, k);
    // through: a random point of the hull
    const auto lam = random_simplex(rng, n);
    std::vector<double> through(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < n; ++i) through[j] += a(j, i) * lam[i];
    }
    if (max_abs_diff(origin, through) < 1e-6) continue;
    const auto r = ray_exit(ContextDistribution{origin}, ContextDistribution{through}, a);
    auto point = [&](double s) {
      std::vector<double> q(k);
      for (std::size_t j = 0; j < k; ++j) q[j] = origin[j] + s * (through[j] - origin[j]);
      return q;
    };
    double lo = 1.0, hi = 2.0;
    while (hull_membership(ContextDistribution{point(hi)}, a)) hi *= 2.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (hull_membership(ContextDistribution{point(mid)}, a) ? lo : hi) = mid;
    }
    CHECK(std::abs(r.scale - lo) < 1e-6 * std::max(1.0, lo));
    CHECK(certificate_residual(a, r.mixture) < 1e-8);
  }
}

TEST_CASE("membership agrees with a projected-gradient distance") {
  RngStream rng(23, 0);
  int inside = 0, outside = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t k = 3;
    const std::size_t n = 2 + rng.uniform_index(3);
    const Matrix a = random_columns(rng, k, n);
    const auto p = random_simplex(rng, k);
    const auto m = hull_membership(ContextDistribution{p}, a);
    const double d = pg_distance(a, p);
    if (m) {
      ++inside;
      CHECK(d < 1e-5);
    } else {
      ++outside;
      CHECK(d > 1e-9);
    }
  }
  CHECK(inside > 0);
  CHECK(outside > 0);
}
