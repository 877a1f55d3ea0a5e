#include "fkwave/banded.hpp"

#include <cmath>
#include <stdexcept>

namespace fkwave {

std::vector<double> solve_tridiag(const Tridiag& m, std::vector<double> d) {
  const size_t n = m.size();
  if (d.size() != n) throw std::invalid_argument("tridiagonal rhs has the wrong size");
  if (n == 0) return d;
  std::vector<double> cp(n);
  double piv = m.diag[0];
  if (piv == 0.0) throw std::runtime_error("zero pivot in tridiagonal solve");
  cp[0] = m.upper[0] / piv;
  d[0] /= piv;
  for (size_t i = 1; i < n; ++i) {
    piv = m.diag[i] - m.lower[i] * cp[i - 1];
    if (piv == 0.0 || !std::isfinite(piv)) throw std::runtime_error("zero pivot in tridiagonal solve");
    cp[i] = m.upper[i] / piv;
    d[i] = (d[i] - m.lower[i] * d[i - 1]) / piv;
  }
  for (size_t i = n - 1; i-- > 0;) d[i] -= cp[i] * d[i + 1];
  return d;
}

}  // namespace fkwave
