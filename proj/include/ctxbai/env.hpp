#pragma once
// Simulation of the environment and random instance generation.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "ctxbai/model.hpp"

namespace ctxbai {

/// Reproducible random stream. The same (seed, stream) pair always yields the
/// same sequence; different stream ids are decorrelated through splitmix64.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  double uniform();  // [0, 1)
  double normal();   // standard Gaussian
  std::size_t uniform_index(std::size_t n);
  /// Index drawn with probability proportional to `weights`; zero and
  /// negative entries are never drawn.
  std::size_t categorical(std::span<const double> weights);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> gauss_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Stream id keyed on a tuple of indices, independent of scheduling order.
std::uint64_t derive_stream(std::uint64_t tag, std::uint64_t a, std::uint64_t b = 0,
                            std::uint64_t c = 0);

struct Observation {
  ContextIndex context;
  double reward;
};

/// Context ~ column A_arm, reward ~ N(mean of (context, arm), 1).
Observation sample_step(const Instance& inst, ArmIndex arm, RngStream& rng);

struct GapBand {
  double lo;
  double hi;
};

struct GenConstraints {
  std::size_t n = 5;
  std::size_t k = 3;
  double mu_lo = 0.0;
  double mu_hi = 10.0;
  /// Defaults to 1/(4k) when unset.
  std::optional<double> a_min_floor;
  /// One band per arm; entry 0 is ignored (arm 1 is the best arm). Defaults to
  /// [1/(2n), (i+1)/(2n)] for the 1-based arm index i.
  std::vector<GapBand> gap_bands;
  std::size_t max_attempts = 100000;

  double floor() const { return a_min_floor.value_or(1.0 / (4.0 * double(k))); }
  std::vector<GapBand> bands() const;
  /// Throws UsageError when the constraints cannot be met.
  void validate() const;
};

/// Thrown when the rejection budget runs out.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Random instance whose first arm is best and whose gaps fall in the bands.
/// Columns of A are Dirichlet(1) draws rejected below the floor. Non-separator
/// columns of mu are translated to hit a target gap; separator columns of A
/// are interpolated between two floor-respecting draws to hit the target.
Instance gen_random_instance(const GenConstraints& c, Setting kind, RngStream& rng);

}  // namespace ctxbai
