// SPDX-License-Identifier: Apache-2.0
#pragma once

// Quadrature reference for K_nu(z). Test-only: it shares no code with
// log_bessel_k and is far slower.

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "matgal/error.hpp"

namespace matgal::special {

/// K_nu(z) from the integral representation
///   K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt
/// by adaptive Gauss-Kronrod quadrature. Supported for z in [1e-3, 60] and
/// |nu| <= 25.
inline double bessel_k_integral_oracle(double nu, double z) {
  if (!(z >= 1e-3 && z <= 60.0) || !(std::abs(nu) <= 25.0)) {
    throw UnsupportedError("bessel_k_integral_oracle: (nu, z) out of range");
  }
  const double a = std::abs(nu);
  // log integrand g(t) = -z cosh t + log cosh(a t); its maximiser solves
  // z sinh t = a tanh(a t). Bisection on the derivative.
  auto log_integrand = [&](double t) {
    const double at = a * t;
    const double log_cosh = at + std::log1p(std::exp(-2.0 * at)) - std::log(2.0);
    return -z * std::cosh(t) + log_cosh;
  };
  auto slope = [&](double t) { return -z * std::sinh(t) + a * std::tanh(a * t); };
  double lo = 0.0;
  double hi = 1.0;
  while (slope(hi) > 0.0) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? lo : hi) = mid;
  }
  const double peak = 0.5 * (lo + hi);
  const double shift = log_integrand(peak);

  // Past `upper` the scaled integrand is below e^-80.
  double upper = peak + 1.0;
  while (log_integrand(upper) - shift > -80.0) upper += 1.0;

  auto f = [&](double t) { return std::exp(log_integrand(t) - shift); };
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  double value = 0.0;
  // Split at an interior peak so both pieces are unimodal.
  double split = 0.0;
  if (peak > 1e-3) {
    split = peak;
    value += Quad::integrate(f, 0.0, split, 15, 1e-12);
  }
  value += Quad::integrate(f, split, upper, 15, 1e-12);
  return value * std::exp(shift);
}

}  // namespace matgal::special
