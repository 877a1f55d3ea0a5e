#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

namespace fkwave {

inline constexpr double kQuadAbsTol = 1e-10;
inline constexpr double kQuadRelTol = 1e-8;

template <class F>
double integrate(F f, double lo, double hi) {
  if (lo == hi) return 0.0;
  double err = 0.0;
  // the adaptive error estimate has a floor near 2^-32 on very short panels; a single
  // 15-point rule is already exact to rounding there
  if (std::isfinite(lo) && std::isfinite(hi) && std::abs(hi - lo) < 1e-4 * std::max(1.0, std::abs(lo)))
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, 0, 1e-11, &err);
  double val = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, 20, 1e-11,
                                                                               &err);
  if (!std::isfinite(val) || err > std::max(kQuadAbsTol, kQuadRelTol * std::abs(val)))
    throw QuadratureError(err, std::max(kQuadAbsTol, kQuadRelTol * std::abs(val)));
  return val;
}

}  // namespace fkwave
