#include "ctxbai/simplex_lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctxbai {

namespace {

constexpr double kHarrisTol = 1e-12;
constexpr std::size_t kBlandAfter = 50;

class Tableau {
 public:
  Tableau(const Matrix& a, std::span<const double> b)
      : m_(a.rows()), nv_(a.cols()), width_(nv_ + m_ + 1), cells_((m_ + 1) * width_, 0.0),
        basis_(m_) {
    for (std::size_t r = 0; r < m_; ++r) {
      const double sign = b[r] < 0.0 ? -1.0 : 1.0;
      for (std::size_t c = 0; c < nv_; ++c) at(r + 1, c) = sign * a(r, c);
      at(r + 1, nv_ + r) = 1.0;
      at(r + 1, rhs()) = sign * b[r];
      basis_[r] = nv_ + r;
    }
  }

  double& at(std::size_t r, std::size_t c) { return cells_[r * width_ + c]; }
  double at(std::size_t r, std::size_t c) const { return cells_[r * width_ + c]; }
  std::size_t rhs() const { return width_ - 1; }
  std::size_t rows() const { return m_; }
  std::size_t vars() const { return nv_; }
  bool artificial(std::size_t col) const { return col >= nv_ && col < nv_ + m_; }
  std::vector<std::size_t>& basis() { return basis_; }

  /// Row 0 holds reduced costs c_j - c_B' B^-1 A_j and -z in the rhs slot.
  void set_costs(std::span<const double> cost) {
    for (std::size_t c = 0; c < width_; ++c) at(0, c) = c < cost.size() ? cost[c] : 0.0;
    for (std::size_t r = 0; r < m_; ++r) {
      const double cb = basis_[r] < cost.size() ? cost[basis_[r]] : 0.0;
      if (cb == 0.0) continue;
      for (std::size_t c = 0; c < width_; ++c) at(0, c) -= cb * at(r + 1, c);
    }
  }

  void pivot(std::size_t row, std::size_t col) {
    const double p = at(row + 1, col);
    for (std::size_t c = 0; c < width_; ++c) at(row + 1, c) /= p;
    at(row + 1, col) = 1.0;
    for (std::size_t r = 0; r <= m_; ++r) {
      if (r == row + 1) continue;
      const double f = at(r, col);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < width_; ++c) at(r, c) -= f * at(row + 1, c);
      at(r, col) = 0.0;
    }
    basis_[row] = col;
  }

  /// Pivots to optimality. Returns false on unboundedness.
  bool optimize(bool allow_artificial, const LpOptions& opt) {
    std::size_t degenerate_run = 0;
    for (std::size_t iter = 0;; ++iter) {
      if (iter > opt.max_pivots) throw std::runtime_error("simplex pivot limit exceeded");
      const bool bland = degenerate_run > kBlandAfter;
      std::size_t enter = width_;
      double best_rc = opt.pivot_tol;
      for (std::size_t c = 0; c + 1 < width_; ++c) {
        if (!allow_artificial && artificial(c)) continue;
        if (at(0, c) > best_rc) {
          enter = c;
          if (bland) break;
          best_rc = at(0, c);
        }
      }
      if (enter == width_) return true;

      // Harris pass 1: largest step keeping every basic variable above -tol.
      double theta = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m_; ++r) {
        const double coef = at(r + 1, enter);
        if (coef <= opt.pivot_tol) continue;
        theta = std::min(theta, (std::max(at(r + 1, rhs()), 0.0) + kHarrisTol) / coef);
      }
      if (!std::isfinite(theta)) return false;
      // Pass 2: among rows within that step, the largest pivot element (or the
      // lowest basic index in Bland mode).
      std::size_t leave = m_;
      double best_coef = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        const double coef = at(r + 1, enter);
        if (coef <= opt.pivot_tol) continue;
        if (std::max(at(r + 1, rhs()), 0.0) / coef > theta) continue;
        const bool better = bland ? (leave == m_ || basis_[r] < basis_[leave]) : coef > best_coef;
        if (better) {
          best_coef = coef;
          leave = r;
        }
      }
      const double step = std::max(at(leave + 1, rhs()), 0.0) / at(leave + 1, enter);
      degenerate_run = step * best_rc <= 1e-14 ? degenerate_run + 1 : 0;
      pivot(leave, enter);
    }
  }

 private:
  std::size_t m_;
  std::size_t nv_;
  std::size_t width_;
  std::vector<double> cells_;
  std::vector<std::size_t> basis_;
};

}  // namespace

LpResult solve_lp(const Matrix& a, std::span<const double> b, std::span<const double> c,
                  const LpOptions& opt) {
  if (b.size() != a.rows() || c.size() != a.cols()) {
    throw UsageError("solve_lp: dimension mismatch");
  }
  Tableau tab(a, b);
  const std::size_t nv = a.cols();
  const std::size_t m = a.rows();

  std::vector<double> phase1(nv + m, 0.0);
  for (std::size_t r = 0; r < m; ++r) phase1[nv + r] = -1.0;
  tab.set_costs(phase1);
  tab.optimize(true, opt);

  LpResult res;
  res.infeasibility = std::max(tab.at(0, tab.rhs()), 0.0);
  if (res.infeasibility > opt.feasibility_tol) {
    res.status = LpStatus::infeasible;
    return res;
  }

  // Drive zero-level artificials out of the basis; rows where that is
  // impossible are redundant and stay inert.
  for (std::size_t r = 0; r < m; ++r) {
    if (!tab.artificial(tab.basis()[r])) continue;
    std::size_t best = nv;
    double best_mag = opt.pivot_tol;
    for (std::size_t col = 0; col < nv; ++col) {
      const double mag = std::abs(tab.at(r + 1, col));
      if (mag > best_mag) {
        best_mag = mag;
        best = col;
      }
    }
    if (best < nv) tab.pivot(r, best);
  }

  tab.set_costs(c);
  if (!tab.optimize(false, opt)) {
    res.status = LpStatus::unbounded;
    return res;
  }

  res.x.assign(nv, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t col = tab.basis()[r];
    if (col < nv) res.x[col] = std::max(tab.at(r + 1, tab.rhs()), 0.0);
  }
  res.status = LpStatus::optimal;
  for (std::size_t r = 0; r < m; ++r) {
    double lhs = 0.0, scale = std::abs(b[r]);
    for (std::size_t j = 0; j < nv; ++j) {
      lhs += a(r, j) * res.x[j];
      scale += std::abs(a(r, j) * res.x[j]);
    }
    if (std::abs(lhs - b[r]) > opt.residual_tol * (1.0 + scale)) res.status = LpStatus::numerical;
  }
  double obj = 0.0;
  for (std::size_t j = 0; j < nv; ++j) obj += c[j] * res.x[j];
  res.objective = obj;
  return res;
}

}  // namespace ctxbai
