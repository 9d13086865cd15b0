#include <doctest.h>

#include <cmath>

#include "ctxbai/env.hpp"
#include "fixtures.hpp"

using namespace ctxbai;

TEST_CASE("streams are reproducible and distinct") {
  RngStream a(7, 3), b(7, 3), c(7, 4);
  double same = 0.0, diff = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    same += std::abs(x - b.uniform());
    diff += std::abs(x - c.uniform());
  }
  CHECK(same == 0.0);
  CHECK(diff > 0.0);
  CHECK(derive_stream(1, 2, 3) != derive_stream(1, 3, 2));
}

TEST_CASE("context sampling follows the arm's column") {
  const auto inst = ctxbai::testing::rare_context_instance();
  RngStream rng(11, 0);
  std::vector<double> freq(3, 0.0);
  const int draws = 100000;
  double reward = 0.0;
  for (int i = 0; i < draws; ++i) {
    const auto obs = sample_step(inst, 0, rng);
    freq[obs.context] += 1.0 / draws;
    if (obs.context == 0) reward += obs.reward;
  }
  CHECK(std::abs(freq[0] - 0.9) < 0.01);
  CHECK(std::abs(freq[1] - 0.09) < 0.01);
  CHECK(std::abs(freq[2] - 0.01) < 0.01);
  CHECK(std::abs(reward / (freq[0] * draws) - 1.0) < 0.02);
}

TEST_CASE("single-context column always yields that context") {
  const Instance inst(ContextMatrix(Matrix::from_rows({{1.0, 1.0}})),
                      MeanSpec::non_separator(Matrix::from_rows({{1.0, 0.0}})));
  RngStream rng(1, 1);
  for (int i = 0; i < 100; ++i) CHECK(sample_step(inst, 1, rng).context == 0);
}

TEST_CASE("generated instances respect the constraints") {
  GenConstraints c;  // n = 5, k = 3
  const auto bands = c.bands();
  CHECK(bands[1].lo == doctest::Approx(0.1));
  CHECK(bands[1].hi == doctest::Approx(0.3));
  for (std::uint64_t s = 0; s < 20; ++s) {
    RngStream rng(s, 0);
    const auto inst = gen_random_instance(c, Setting::non_separator, rng);
    CHECK(inst.a().min_entry() >= 1.0 / 12.0 - 1e-15);
    CHECK(*best_arm(inst) == 0);
    const auto g = gaps(inst);
    for (std::size_t i = 1; i < 5; ++i) {
      CHECK(g[i] >= bands[i].lo - 1e-9);
      CHECK(g[i] <= bands[i].hi + 1e-9);
    }
    for (std::size_t j = 0; j < 3; ++j) {
      for (std::size_t i = 0; i < 5; ++i) {
        CHECK(inst.mu().mean(j, i) >= c.mu_lo);
        CHECK(inst.mu().mean(j, i) <= c.mu_hi);
      }
    }
  }
  RngStream r1(5, 9), r2(5, 9);
  const auto i1 = gen_random_instance(c, Setting::non_separator, r1);
  const auto i2 = gen_random_instance(c, Setting::non_separator, r2);
  CHECK(i1.a() == i2.a());
  CHECK(i1.mu() == i2.mu());
}

TEST_CASE("generated separator instances") {
  GenConstraints c;
  c.n = 3;
  c.k = 3;
  for (std::uint64_t s = 0; s < 10; ++s) {
    RngStream rng(s, 1);
    const auto inst = gen_random_instance(c, Setting::separator, rng);
    CHECK(inst.setting() == Setting::separator);
    CHECK(*best_arm(inst) == 0);
    CHECK(inst.a().min_entry() >= 1.0 / 12.0 - 1e-15);
  }
}

TEST_CASE("impossible constraints are rejected") {
  GenConstraints c;
  c.a_min_floor = 0.5;  // k = 3 columns cannot have every entry >= 0.5
  RngStream rng(1, 1);
  CHECK_THROWS(c.validate());
  CHECK_THROWS(gen_random_instance(c, Setting::non_separator, rng));
}
