#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ctxbai/special.hpp"

using namespace ctxbai;

TEST_CASE("riemann zeta") {
  CHECK(riemann_zeta(2.0) == doctest::Approx(std::numbers::pi * std::numbers::pi / 6.0).epsilon(1e-14));
  CHECK(riemann_zeta(1.5) == doctest::Approx(2.612375348685488).epsilon(1e-13));
  CHECK(riemann_zeta(4.0) == doctest::Approx(std::pow(std::numbers::pi, 4) / 90.0).epsilon(1e-14));
  double prev = riemann_zeta(1.001);
  for (double s = 1.01; s <= 2.0; s += 0.01) {
    const double z = riemann_zeta(s);
    CHECK(z < prev);
    prev = z;
  }
  CHECK_THROWS(riemann_zeta(1.0));
}

TEST_CASE("g function") {
  const double expect = 1.5 - 1.5 * std::log(3.0) + std::log(riemann_zeta(1.5)) - 0.5 * std::log(0.25);
  CHECK(g_fn(0.75) == doctest::Approx(expect).epsilon(1e-13));
  CHECK(g_fn(0.75) == doctest::Approx(1.505488650288566).epsilon(1e-12));
  CHECK(g_fn(0.5 + 1e-9) > 10.0);
  CHECK(g_fn(1.0 - 1e-12) > 10.0);
  CHECK(std::abs(g_fn(0.8 + 1e-8) - g_fn(0.8)) < 1e-5);
}

TEST_CASE("mixture calibration function") {
  for (double l0 = 0.51; l0 < 1.0; l0 += 0.02) CHECK(c_g(5.0) <= (g_fn(l0) + 5.0) / l0);
  CHECK(c_g(50.0) >= 50.0);
  CHECK(c_g(50.0) <= 50.0 + 2.0 * std::log(50.0) + 10.0);
  double prev = c_g(0.0);
  for (double x = 0.25; x < 30.0; x += 0.25) {
    const double v = c_g(x);
    CHECK(v >= prev);
    prev = v;
  }
  // high-precision reference values
  CHECK(c_g(1.0) == doctest::Approx(2.507094546580581).epsilon(1e-10));
  CHECK(c_g(5.0) == doctest::Approx(6.757320059537902).epsilon(1e-10));
  CHECK(c_g_uncached(5.0).lambda == doctest::Approx(0.9535216423336471).epsilon(1e-6));
}
