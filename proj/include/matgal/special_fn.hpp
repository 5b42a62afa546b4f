// SPDX-License-Identifier: Apache-2.0
#pragma once

// Log-scaled special functions used by the density kernels.
//
// log_bessel_k evaluates ln K_nu(z) for the modified Bessel function of the
// third kind (Macdonald function). Orders reached by the densities grow like
// half the total dimension, so K itself under/overflows long before the
// logarithm does; everything here is carried in log scale.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "matgal/error.hpp"

namespace matgal::special {

/// Largest |nu| accepted by log_bessel_k.
inline constexpr double kMaxBesselOrder = 10'000.0;

/// ln Gamma(x) for x > 0.
inline double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("log_gamma: argument must be positive and finite");
  }
  return boost::math::lgamma(x);
}

namespace detail {

// Taylor coefficients of 1/Gamma(1+x) about 0.
inline constexpr std::array<double, 29> kRecipGammaSeries = {
    1.0,
    0.57721566490153286061,
    -0.65587807152025388108,
    -0.042002635034095235529,
    0.1665386113822914895,
    -0.042197734555544336748,
    -0.0096219715278769735621,
    0.0072189432466630995424,
    -0.0011651675918590651121,
    -0.00021524167411495097282,
    0.00012805028238811618615,
    -0.000020134854780788238656,
    -1.2504934821426706573e-6,
    1.1330272319816958824e-6,
    -2.0563384169776071035e-7,
    6.1160951044814158179e-9,
    5.0020076444692229301e-9,
    -1.1812745704870201446e-9,
    1.0434267116911005105e-10,
    7.782263439905071254e-12,
    -3.6968056186422057082e-12,
    5.100370287454475979e-13,
    -2.0583260535665067832e-14,
    -5.3481225394230179824e-15,
    1.2267786282382607902e-15,
    -1.1812593016974587695e-16,
    1.1866922547516003326e-18,
    1.4123806553180317816e-18,
    -2.2987456844353702066e-19,
};

struct TemmeGammas {
  double gam1;   // (1/G(1-mu) - 1/G(1+mu)) / (2 mu)
  double gam2;   // (1/G(1-mu) + 1/G(1+mu)) / 2
  double gampl;  // 1/G(1+mu)
  double gammi;  // 1/G(1-mu)
};

// Valid for |mu| <= 1/2; the odd/even split avoids the cancellation in gam1.
inline TemmeGammas temme_gammas(double mu) {
  double odd = 0.0;
  double even = 0.0;
  for (std::size_t j = kRecipGammaSeries.size(); j-- > 0;) {
    if (j % 2 == 1) {
      odd = odd * mu * mu + kRecipGammaSeries[j];
    } else {
      even = even * mu * mu + kRecipGammaSeries[j];
    }
  }
  // odd holds sum a_j mu^(j-1) over odd j, even holds sum a_j mu^j over even j.
  TemmeGammas g{};
  g.gam1 = -odd;
  g.gam2 = even;
  g.gampl = even + mu * odd;
  g.gammi = even - mu * odd;
  return g;
}

// Below this argument the Temme series is used, above it Steed's continued
// fraction. Fixed by the quadrature-oracle agreement tests.
inline constexpr double kSeriesCfSwitch = 2.0;
inline constexpr int kMaxIterations = 100'000;

struct StartPair {
  double log_k_mu;  // ln K_mu(x)
  double rho;       // x * K_{mu+1}(x) / K_mu(x)
};

inline StartPair temme_series(double mu, double x) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double x2 = 0.5 * x;
  const double pimu = std::numbers::pi * mu;
  const double fact = std::abs(pimu) < eps ? 1.0 : pimu / std::sin(pimu);
  double d = -std::log(x2);
  double e = mu * d;
  const double fact2 = std::abs(e) < eps ? 1.0 : std::sinh(e) / e;
  const TemmeGammas g = temme_gammas(mu);

  double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
  double sum = ff;
  e = std::exp(e);
  double p = 0.5 * e / g.gampl;
  double q = 0.5 / (e * g.gammi);
  double c = 1.0;
  d = x2 * x2;
  double sum1 = p;
  const double mu2 = mu * mu;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double di = i;
    ff = (di * ff + p + q) / (di * di - mu2);
    c *= d / di;
    p /= di - mu;
    q /= di + mu;
    const double del = c * ff;
    sum += del;
    sum1 += c * (p - di * ff);
    if (std::abs(del) < std::abs(sum) * eps) break;
  }
  return {std::log(sum), 2.0 * sum1 / sum};
}

// Steed's method for the second continued fraction (Temme 1975), x >= 2.
inline StartPair steed_cf2(double mu, double x) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25 - mu * mu;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double di = i;
    a -= 2.0 * di;
    c = -a * c / (di + 1.0);
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < eps) break;
  }
  h *= a1;
  const double log_k_mu =
      0.5 * std::log(std::numbers::pi / (2.0 * x)) - x - std::log(s);
  return {log_k_mu, mu + x + 0.5 - h};
}

}  // namespace detail

/// ln K_nu(z), the log of the modified Bessel function of the third kind.
///
/// Even in nu. The fractional part of |nu| (folded into [-1/2, 1/2]) is
/// evaluated by Temme's series for z < 2 and Steed's continued fraction
/// otherwise; integer steps up to |nu| use forward recurrence on the scaled
/// ratio z*K_{v+1}/K_v, which is the stable direction for K.
///
/// Throws DomainError for z <= 0 or NaN arguments and UnsupportedError for
/// |nu| > kMaxBesselOrder. Accuracy is validated for z >= 1e-300.
inline double log_bessel_k(double nu, double z) {
  if (std::isnan(nu) || std::isnan(z) || !(z > 0.0)) {
    throw DomainError("log_bessel_k: argument must be positive");
  }
  const double order = std::abs(nu);
  if (!(order <= kMaxBesselOrder)) {
    throw UnsupportedError("log_bessel_k: |order| exceeds supported range");
  }
  if (std::isinf(z)) return -std::numeric_limits<double>::infinity();

  const double steps = std::floor(order + 0.5);
  const double mu = order - steps;
  detail::StartPair start = z < detail::kSeriesCfSwitch
                                ? detail::temme_series(mu, z)
                                : detail::steed_cf2(mu, z);
  if (mu == -0.5) start.rho = z;  // K_{-1/2} = K_{1/2}

  double log_k = start.log_k_mu;
  double rho = start.rho;
  const double log_z = std::log(z);
  const auto n = static_cast<long>(steps);
  for (long j = 0; j < n; ++j) {
    log_k += std::log(rho) - log_z;
    rho = z * z / rho + 2.0 * (mu + static_cast<double>(j) + 1.0);
  }
  return log_k;
}

}  // namespace matgal::special
