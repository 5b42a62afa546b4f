// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "matgal/bessel_oracle.hpp"
#include "matgal/special_fn.hpp"

using matgal::special::bessel_k_integral_oracle;
using matgal::special::log_bessel_k;
using matgal::special::log_gamma;

namespace {

struct Reference {
  double nu;
  double z;
  double log_k;
};

// 30-digit values, frozen.
const std::vector<Reference> kReference = {
    {0.5, 1.0, -0.77420864735527256764},
    {0.0, 1.0, -0.8650643989067880968},
    {1.0, 1.0, -0.50765194821075233095},
    {3.0, 0.5, 4.1280679737917629488},
    {10000.0, 1e-300, 6996785.7751369983222},
    {10000.0, 1.0, 89030.496129858770203},
    {0.3, 1e-300, 207.84325333789021772},
    {0.0, 1e-300, 6.5379827338810341886},
    {2.5, 700.0, -703.04546616180641137},
    {7.0, 1e6, -1000006.6819395513496},
    {1.5, 1e-3, 10.587423771451016512},
    {25.0, 60.0, -56.72622016405454461},
    {15.0, 1e-3, 138.51161087745282846},
    {7.0, 30.0, -30.678703394391435517},
};

}  // namespace

TEST(LogGamma, FrozenValues) {
  EXPECT_EQ(log_gamma(1.0), 0.0);
  EXPECT_EQ(log_gamma(2.0), 0.0);
  EXPECT_NEAR(log_gamma(0.5), 0.57236494292470008707, 1e-15);
  EXPECT_NEAR(log_gamma(10.5), 13.940625219403763633, 1e-13);
  EXPECT_NEAR(log_gamma(100.0), 359.13420536957539878, 1e-12);
}

TEST(LogGamma, RejectsNonPositive) {
  EXPECT_THROW(log_gamma(0.0), matgal::DomainError);
  EXPECT_THROW(log_gamma(-1.5), matgal::DomainError);
  EXPECT_THROW(log_gamma(std::numeric_limits<double>::quiet_NaN()), matgal::DomainError);
}

TEST(LogBesselK, FrozenHighPrecisionValues) {
  for (const auto& r : kReference) {
    const double got = log_bessel_k(r.nu, r.z);
    EXPECT_NEAR(got, r.log_k, 1e-13 * std::max(1.0, std::abs(r.log_k))) << "nu=" << r.nu << " z=" << r.z;
  }
}

TEST(LogBesselK, HalfOrderClosedForm) {
  // K_{1/2}(z) = sqrt(pi / (2z)) e^{-z}
  for (double z : {1e-6, 0.01, 0.5, 1.0, 2.0, 7.5, 40.0, 500.0}) {
    const double expected = 0.5 * std::log(M_PI / (2.0 * z)) - z;
    EXPECT_NEAR(log_bessel_k(0.5, z), expected, 1e-13 * std::max(1.0, std::abs(expected))) << z;
  }
  EXPECT_NEAR(std::exp(log_bessel_k(0.5, 2.0)), 0.11993777196806144737, 1e-15);
}

TEST(LogBesselK, EvenInOrder) {
  for (double nu : {0.2, 1.0, 2.5, 9.75}) {
    for (double z : {0.01, 1.0, 12.0}) {
      EXPECT_EQ(log_bessel_k(nu, z), log_bessel_k(-nu, z));
    }
  }
}

TEST(LogBesselK, SmallArgumentAsymptote) {
  // K_nu(z) ~ Gamma(nu) 2^{nu-1} z^{-nu} as z -> 0
  const double z = 1e-8;
  for (double nu : {0.5, 1.0, 3.0, 12.0}) {
    const double asym = std::lgamma(nu) + (nu - 1.0) * std::log(2.0) - nu * std::log(z);
    EXPECT_NEAR(log_bessel_k(nu, z), asym, 1e-6) << nu;
  }
}

TEST(LogBesselK, SpecialArguments) {
  EXPECT_EQ(log_bessel_k(2.0, std::numeric_limits<double>::infinity()),
            -std::numeric_limits<double>::infinity());
  EXPECT_THROW(log_bessel_k(1.0, 0.0), matgal::DomainError);
  EXPECT_THROW(log_bessel_k(1.0, -2.0), matgal::DomainError);
  EXPECT_THROW(log_bessel_k(std::numeric_limits<double>::quiet_NaN(), 1.0), matgal::DomainError);
  EXPECT_THROW(log_bessel_k(1.0, std::numeric_limits<double>::quiet_NaN()), matgal::DomainError);
  EXPECT_THROW(log_bessel_k(10000.5, 1.0), matgal::UnsupportedError);
  EXPECT_NO_THROW(log_bessel_k(-10000.0, 1.0));
}

TEST(LogBesselK, AgreesWithQuadratureOracle) {
  for (double nu : {0.0, 0.3, 1.0, 2.5, 7.0, 15.0}) {
    for (double z : {1e-3, 0.1, 1.0, 5.0, 30.0}) {
      const double ref = bessel_k_integral_oracle(nu, z);
      const double got = std::exp(log_bessel_k(nu, z));
      EXPECT_LE(std::abs(got - ref) / ref, 1e-8) << "nu=" << nu << " z=" << z;
    }
  }
}

TEST(LogBesselK, SeriesAndFractionAgreeAtSwitch) {
  const double sw = matgal::special::detail::kSeriesCfSwitch;
  for (double nu : {0.0, 0.25, 0.5, 1.7, 6.0}) {
    const double below = log_bessel_k(nu, std::nextafter(sw, 0.0));
    const double at = log_bessel_k(nu, sw);
    EXPECT_NEAR(below, at, 1e-14 * std::max(1.0, std::abs(at)) + 1e-15) << nu;
  }
}

TEST(LogBesselK, StrictlyDecreasingInArgument) {
  std::vector<double> zs;
  for (double z = 1e-4; z < 200.0; z *= 1.37) zs.push_back(z);
  for (double nu : {0.0, 0.3, 0.5, 1.0, 2.5, 7.0, 15.0, 120.0}) {
    double prev = log_bessel_k(nu, zs.front());
    for (std::size_t i = 1; i < zs.size(); ++i) {
      const double cur = log_bessel_k(nu, zs[i]);
      EXPECT_LT(cur, prev) << "nu=" << nu << " z=" << zs[i];
      prev = cur;
    }
  }
}

TEST(LogBesselK, IncreasingInOrder) {
  for (double z : {0.01, 1.0, 10.0}) {
    double prev = log_bessel_k(0.0, z);
    for (double nu = 0.25; nu < 30.0; nu += 0.25) {
      const double cur = log_bessel_k(nu, z);
      EXPECT_GT(cur, prev) << "nu=" << nu << " z=" << z;
      prev = cur;
    }
  }
}

TEST(LogBesselK, RecurrenceIdentity) {
  // K_{v+1}(z) = K_{v-1}(z) + (2v/z) K_v(z)
  for (double nu : {0.7, 1.0, 3.3, 11.0}) {
    for (double z : {0.3, 2.0, 9.0}) {
      const double lhs = std::exp(log_bessel_k(nu + 1.0, z));
      const double rhs = std::exp(log_bessel_k(nu - 1.0, z)) + 2.0 * nu / z * std::exp(log_bessel_k(nu, z));
      EXPECT_NEAR(lhs / rhs, 1.0, 1e-13);
    }
  }
}

TEST(BesselOracle, RangeLimits) {
  EXPECT_THROW(bessel_k_integral_oracle(1.0, 1e-4), matgal::UnsupportedError);
  EXPECT_THROW(bessel_k_integral_oracle(1.0, 61.0), matgal::UnsupportedError);
  EXPECT_THROW(bessel_k_integral_oracle(26.0, 1.0), matgal::UnsupportedError);
  EXPECT_NEAR(bessel_k_integral_oracle(0.0, 1.0), 0.42102443824070833334, 1e-14);
  EXPECT_NEAR(bessel_k_integral_oracle(3.0, 0.5), 62.057909529930256386, 1e-12);
}
