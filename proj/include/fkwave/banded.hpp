#pragma once

#include <vector>

namespace fkwave {

// Tridiagonal system: lower[i] couples row i to i-1, upper[i] to i+1.
struct Tridiag {
  std::vector<double> lower, diag, upper;
  explicit Tridiag(size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
  size_t size() const { return diag.size(); }
};

// Thomas algorithm; throws std::runtime_error on a zero pivot.
std::vector<double> solve_tridiag(const Tridiag& m, std::vector<double> rhs);

}  // namespace fkwave
