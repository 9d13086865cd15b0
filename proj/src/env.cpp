#include "ctxbai/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ctxbai {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_stream(std::uint64_t tag, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(tag);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return splitmix64(h ^ c);
}

namespace {

std::seed_seq make_seed_seq(std::uint64_t seed, std::uint64_t stream) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0xD1B54A32D192ED03ULL));
  return std::seed_seq{std::uint32_t(a), std::uint32_t(a >> 32), std::uint32_t(b),
                       std::uint32_t(b >> 32)};
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
  auto seq = make_seed_seq(seed, stream);
  engine_.seed(seq);
}

double RngStream::uniform() {
  // 53 random bits, same on every platform.
  return double(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() { return gauss_(engine_); }

std::size_t RngStream::uniform_index(std::size_t n) {
  if (n == 0) throw UsageError("uniform_index over an empty range");
  return std::min(n - 1, std::size_t(uniform() * double(n)));
}

std::size_t RngStream::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += std::max(w, 0.0);
  if (!(total > 0.0)) throw UsageError("categorical draw needs a positive weight");
  const double u = uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    acc += weights[i];
    if (u < acc) return i;
  }
  return last_positive;
}

Observation sample_step(const Instance& inst, ArmIndex arm, RngStream& rng) {
  if (arm >= inst.arms()) throw UsageError("arm index out of range");
  const auto& a = inst.a();
  const double u = rng.uniform();
  const std::size_t k = a.contexts();
  std::size_t j = k - 1;
  double acc = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    acc += a(r, arm);
    if (u < acc) {
      j = r;
      break;
    }
  }
  return {j, inst.mu().mean(j, arm) + rng.normal()};
}

std::vector<GapBand> GenConstraints::bands() const {
  if (!gap_bands.empty()) return gap_bands;
  std::vector<GapBand> b(n);
  for (std::size_t i = 1; i < n; ++i) {
    // 1-based arm index is i + 1.
    b[i] = {1.0 / (2.0 * double(n)), double(i + 2) / (2.0 * double(n))};
  }
  return b;
}

void GenConstraints::validate() const {
  if (n < 2) throw UsageError("generator needs n >= 2");
  if (k < 1) throw UsageError("generator needs k >= 1");
  if (!(mu_lo < mu_hi)) throw UsageError("mu_range must satisfy lo < hi");
  const double f = floor();
  if (!(f > 0.0) || f > 1.0 / double(k)) {
    throw UsageError("a_min_floor must lie in (0, 1/k]");
  }
  const auto b = bands();
  if (b.size() != n) throw UsageError("gap_bands needs one entry per arm");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(b[i].lo > 0.0) || !(b[i].lo <= b[i].hi) || !(b[i].hi < mu_hi - mu_lo)) {
      throw UsageError("gap band for arm " + std::to_string(i + 1) +
                       " must satisfy 0 < lo <= hi < mu_hi - mu_lo");
    }
  }
  if (max_attempts == 0) throw UsageError("max_attempts must be positive");
}

namespace {

class AttemptBudget {
 public:
  explicit AttemptBudget(std::size_t limit) : left_(limit) {}
  void spend() {
    if (left_ == 0) throw GenerationError("random instance generation exceeded its attempt budget");
    --left_;
  }

 private:
  std::size_t left_;
};

std::vector<double> floored_dirichlet(std::size_t k, double floor, RngStream& rng,
                                      AttemptBudget& budget) {
  std::vector<double> col(k);
  for (;;) {
    budget.spend();
    double total = 0.0;
    for (auto& x : col) {
      x = -std::log1p(-rng.uniform());
      total += x;
    }
    for (auto& x : col) x /= total;
    if (*std::min_element(col.begin(), col.end()) >= floor) return col;
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
  return acc;
}

std::vector<double> uniform_vector(std::size_t k, double lo, double hi, RngStream& rng) {
  std::vector<double> v(k);
  for (auto& x : v) x = lo + (hi - lo) * rng.uniform();
  return v;
}

constexpr std::size_t kColumnTries = 200;

std::optional<Instance> try_non_separator(const GenConstraints& c,
                                          const std::vector<GapBand>& bands, RngStream& rng,
                                          AttemptBudget& budget) {
  Matrix a(c.k, c.n);
  Matrix mu(c.k, c.n);
  std::vector<std::vector<double>> cols(c.n);
  for (std::size_t i = 0; i < c.n; ++i) cols[i] = floored_dirichlet(c.k, c.floor(), rng, budget);

  const auto best_means = uniform_vector(c.k, c.mu_lo, c.mu_hi, rng);
  const double best_reward = dot(cols[0], best_means);
  std::vector<std::vector<double>> means(c.n);
  means[0] = best_means;
  for (std::size_t i = 1; i < c.n; ++i) {
    bool placed = false;
    for (std::size_t tries = 0; tries < kColumnTries && !placed; ++tries) {
      budget.spend();
      const double gap = bands[i].lo + (bands[i].hi - bands[i].lo) * rng.uniform();
      auto m = uniform_vector(c.k, c.mu_lo, c.mu_hi, rng);
      const double shift = (best_reward - gap) - dot(cols[i], m);
      const auto [lo_it, hi_it] = std::minmax_element(m.begin(), m.end());
      if (*lo_it + shift < c.mu_lo || *hi_it + shift > c.mu_hi) continue;
      for (auto& x : m) x += shift;
      means[i] = std::move(m);
      placed = true;
    }
    if (!placed) return std::nullopt;
  }
  for (std::size_t i = 0; i < c.n; ++i) {
    for (std::size_t j = 0; j < c.k; ++j) {
      a(j, i) = cols[i][j];
      mu(j, i) = means[i][j];
    }
  }
  return Instance(ContextMatrix(std::move(a)), MeanSpec::non_separator(std::move(mu)));
}

std::optional<Instance> try_separator(const GenConstraints& c, const std::vector<GapBand>& bands,
                                      RngStream& rng, AttemptBudget& budget) {
  const auto mu = uniform_vector(c.k, c.mu_lo, c.mu_hi, rng);
  std::vector<std::vector<double>> cols(c.n);
  cols[0] = floored_dirichlet(c.k, c.floor(), rng, budget);
  const double best_reward = dot(cols[0], mu);
  for (std::size_t i = 1; i < c.n; ++i) {
    const double gap = bands[i].lo + (bands[i].hi - bands[i].lo) * rng.uniform();
    const double target = best_reward - gap;
    std::optional<std::vector<double>> above;
    std::optional<std::vector<double>> below;
    for (std::size_t tries = 0; tries < kColumnTries && !(above && below); ++tries) {
      auto col = floored_dirichlet(c.k, c.floor(), rng, budget);
      const double r = dot(col, mu);
      if (r >= target && !above) {
        above = std::move(col);
      } else if (r < target && !below) {
        below = std::move(col);
      }
    }
    if (!below) return std::nullopt;
    if (!above) above = cols[0];
    // Convex combination of two floor-respecting columns hits the target
    // reward exactly and keeps the floor.
    const double r_hi = dot(*above, mu);
    const double r_lo = dot(*below, mu);
    const double theta = (r_hi - target) / (r_hi - r_lo);
    std::vector<double> col(c.k);
    double total = 0.0;
    for (std::size_t j = 0; j < c.k; ++j) {
      col[j] = (1.0 - theta) * (*above)[j] + theta * (*below)[j];
      total += col[j];
    }
    for (auto& x : col) x /= total;
    cols[i] = std::move(col);
  }
  Matrix a(c.k, c.n);
  for (std::size_t i = 0; i < c.n; ++i) {
    for (std::size_t j = 0; j < c.k; ++j) a(j, i) = cols[i][j];
  }
  return Instance(ContextMatrix(std::move(a)), MeanSpec::separator(mu));
}

bool satisfies(const Instance& inst, const GenConstraints& c, const std::vector<GapBand>& bands) {
  if (inst.a().min_entry() < c.floor()) return false;
  for (double v : inst.mu().matrix().data()) {
    if (v < c.mu_lo || v > c.mu_hi) return false;
  }
  const auto best = best_arm(inst);
  if (!best || *best != 0) return false;
  const auto g = gaps(inst);
  // Band edges are met up to rounding in the construction.
  constexpr double slack = 1e-12;
  for (std::size_t i = 1; i < c.n; ++i) {
    if (g[i] < bands[i].lo - slack || g[i] > bands[i].hi + slack) return false;
  }
  return true;
}

}  // namespace

Instance gen_random_instance(const GenConstraints& c, Setting kind, RngStream& rng) {
  c.validate();
  const auto bands = c.bands();
  AttemptBudget budget(c.max_attempts);
  for (;;) {
    budget.spend();
    auto inst = kind == Setting::separator ? try_separator(c, bands, rng, budget)
                                           : try_non_separator(c, bands, rng, budget);
    if (inst && satisfies(*inst, c, bands)) return std::move(*inst);
  }
}

}  // namespace ctxbai
