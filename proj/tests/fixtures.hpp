#pragma once

#include <vector>

#include "ctxbai/model.hpp"

namespace ctxbai::testing {

// Three arms, three contexts. Arms 1 and 2 both land in context 1 with
// probability 0.9 and differ only in how they split the rare contexts.
inline Instance rare_context_instance() {
  return Instance(ContextMatrix(Matrix::from_rows({{0.9, 0.9, 0.1},
                                                   {0.09, 0.01, 0.45},
                                                   {0.01, 0.09, 0.45}})),
                  MeanSpec::separator({1.0, 0.1, 0.3}));
}

inline Matrix identity(std::size_t k) {
  Matrix m(k, k, 0.0);
  for (std::size_t j = 0; j < k; ++j) m(j, j) = 1.0;
  return m;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace ctxbai::testing
