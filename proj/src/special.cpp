#include "ctxbai/special.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>

#include "ctxbai/model.hpp"

namespace ctxbai {

namespace {

// B_{2m} / (2m)! for m = 1..8.
constexpr std::array<double, 8> kBernoulliOverFactorial = {
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
};

constexpr double kLambdaLo = 0.5 + 1e-6;
constexpr double kLambdaHi = 1.0 - 1e-9;
constexpr int kScanPoints = 256;
constexpr double kLambdaTol = 1e-10;

double cg_objective(double lambda, double x) { return (g_fn(lambda) + x) / lambda; }

}  // namespace

double riemann_zeta(double s) {
  if (!(s > 1.0)) throw UsageError("riemann_zeta needs s > 1");
  // Euler-Maclaurin: partial sum up to N-1, integral tail, half endpoint term,
  // and Bernoulli corrections. With N = 16 the truncation error is far below
  // double precision on (1, 2].
  constexpr int N = 16;
  double sum = 0.0;
  for (int n = N - 1; n >= 1; --n) sum += std::pow(double(n), -s);
  const double nn = double(N);
  sum += std::pow(nn, 1.0 - s) / (s - 1.0);
  sum += 0.5 * std::pow(nn, -s);
  // Term m: B_2m/(2m)! * s(s+1)...(s+2m-2) * N^(-s-2m+1)
  double rising = s;
  double npow = std::pow(nn, -s - 1.0);
  for (std::size_t m = 0; m < kBernoulliOverFactorial.size(); ++m) {
    sum += kBernoulliOverFactorial[m] * rising * npow;
    const double a = s + 2.0 * double(m) + 1.0;
    rising *= a * (a + 1.0);
    npow /= nn * nn;
  }
  return sum;
}

double g_fn(double lambda) {
  if (!(lambda > 0.5 && lambda < 1.0)) throw UsageError("g_fn needs 1/2 < lambda < 1");
  return 2.0 * lambda - 2.0 * lambda * std::log(4.0 * lambda) +
         std::log(riemann_zeta(2.0 * lambda)) - 0.5 * std::log1p(-lambda);
}

CgMinimum c_g_uncached(double x) {
  if (!(x >= 0.0)) throw UsageError("c_g needs x >= 0");
  // Coarse scan guards against flat regions, golden section refines.
  int best = 0;
  double best_val = 0.0;
  const double step = (kLambdaHi - kLambdaLo) / double(kScanPoints - 1);
  for (int i = 0; i < kScanPoints; ++i) {
    const double v = cg_objective(kLambdaLo + step * i, x);
    if (i == 0 || v < best_val) {
      best_val = v;
      best = i;
    }
  }
  double lo = kLambdaLo + step * std::max(best - 1, 0);
  double hi = kLambdaLo + step * std::min(best + 1, kScanPoints - 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = cg_objective(c, x);
  double fd = cg_objective(d, x);
  while (hi - lo > kLambdaTol) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = cg_objective(c, x);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = cg_objective(d, x);
    }
  }
  CgMinimum out{best_val, kLambdaLo + step * best};
  const double mid = 0.5 * (lo + hi);
  const double fmid = cg_objective(mid, x);
  if (fmid < out.value) out = {fmid, mid};
  return out;
}

double c_g(double x) {
  static std::shared_mutex mu;
  static std::map<double, double> cache;
  {
    std::shared_lock lock(mu);
    if (auto it = cache.find(x); it != cache.end()) return it->second;
  }
  const double v = c_g_uncached(x).value;
  std::unique_lock lock(mu);
  cache.emplace(x, v);
  return v;
}

}  // namespace ctxbai
