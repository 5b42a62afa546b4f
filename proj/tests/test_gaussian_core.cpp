// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace matgal;

TEST(RngStream, ReproducibleAndResettable) {
  RngStream a(7, 3);
  RngStream b(7, 3);
  std::vector<double> first;
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    first.push_back(u);
    EXPECT_EQ(u, b.uniform());
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  a.reset();
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.uniform(), first[static_cast<std::size_t>(i)]);
  EXPECT_EQ(a.seed(), 7u);
  EXPECT_EQ(a.stream_id(), 3u);
}

TEST(RngStream, StreamsAndSeedsDiffer) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t seed : {0ULL, 1ULL, 1ULL << 32}) {
    for (std::uint64_t id : {0ULL, 1ULL, 1ULL << 32}) {
      RngStream r(seed, id);
      firsts.insert(r.bits());
    }
  }
  EXPECT_EQ(firsts.size(), 9u);
}

TEST(MixingLaw, Shapes) {
  EXPECT_EQ(MixingLaw::exponential().shape(), 1.0);
  EXPECT_EQ(MixingLaw::gamma(2.5).shape(), 2.5);
  EXPECT_THROW(MixingLaw::gamma(0.0), DomainError);
  EXPECT_THROW(MixingLaw::gamma(-1.0), DomainError);
}

TEST(SampleGamma, MeanAndVarianceWithinFiveStandardErrors) {
  for (double lambda : {0.3, 0.7, 1.0, 1.5, 4.0, 30.0}) {
    RngStream rng(101, static_cast<std::uint64_t>(lambda * 10));
    const int n = 100'000;
    double s = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = sample_gamma(lambda, rng);
      ASSERT_GT(g, 0.0);
      s += g;
      s2 += g * g;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    // Var(g) = lambda; Var(g^2) from the fourth moment
    const double m4 = lambda * (lambda + 1) * (lambda + 2) * (lambda + 3);
    const double m2 = lambda * (lambda + 1);
    EXPECT_LT(std::abs(mean - lambda) / std::sqrt(lambda / n), 5.0) << lambda;
    EXPECT_LT(std::abs(var - lambda) / std::sqrt((m4 - m2 * m2) / n), 5.0) << lambda;
  }
  RngStream rng(1);
  EXPECT_THROW(sample_gamma(0.0, rng), DomainError);
}

TEST(SampleGamma, ExponentialTailProbability) {
  RngStream rng(5);
  const int n = 100'000;
  int above = 0;
  for (int i = 0; i < n; ++i) above += sample_mixing(MixingLaw::exponential(), rng) > 2.0;
  const double p = std::exp(-2.0);
  EXPECT_LT(std::abs(above / double(n) - p) / std::sqrt(p * (1 - p) / n), 5.0);
}

TEST(MatrixNormal, MomentsMatchKroneckerCovariance) {
  std::mt19937_64 gen(9);
  const Matrix s = oracle::random_spd(2, gen);
  const Matrix p = oracle::random_spd(3, gen);
  const Matrix m = oracle::random_matrix(2, 3, gen);
  const SpdMatrix sigma(s);
  const SpdMatrix psi(p);
  RngStream rng(2024);
  const int n = 100'000;
  Vector sum = Vector::Zero(6);
  Matrix outer = Matrix::Zero(6, 6);
  for (int i = 0; i < n; ++i) {
    const Vector v = vec(sample_matrix_normal(m, sigma, psi, rng));
    sum += v;
    outer += v * v.transpose();
  }
  const Vector mean = sum / n;
  const Matrix cov = outer / n - mean * mean.transpose();
  const Matrix expected = oracle::textbook_kron(p, s);
  for (Eigen::Index i = 0; i < 6; ++i) {
    EXPECT_LT(std::abs(mean[i] - vec(m)[i]) / std::sqrt(expected(i, i) / n), 5.0);
    for (Eigen::Index j = 0; j < 6; ++j) {
      const double se = std::sqrt((expected(i, i) * expected(j, j) + expected(i, j) * expected(i, j)) / n);
      EXPECT_LT(std::abs(cov(i, j) - expected(i, j)) / se, 5.0) << i << "," << j;
    }
  }
  EXPECT_THROW(sample_matrix_normal(Matrix::Zero(3, 3), sigma, psi, rng), ShapeError);
}

TEST(TensorNormal, OrderTwoEqualsMatrixSampler) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index k = 1 + trial % 4;
    const Eigen::Index n = 1 + (trial * 7) % 5;
    const SpdMatrix sigma(oracle::random_spd(k, gen));
    const SpdMatrix psi(oracle::random_spd(n, gen));
    const Matrix m = oracle::random_matrix(k, n, gen);
    RngStream r1(77, static_cast<std::uint64_t>(trial));
    RngStream r2(77, static_cast<std::uint64_t>(trial));
    const Matrix a = sample_matrix_normal(m, sigma, psi, r1);
    const std::vector<SpdMatrix> scales = {sigma, psi};
    const DenseTensor b = sample_tensor_normal(DenseTensor::from_matrix(m), scales, r2);
    EXPECT_LT((a - b.to_matrix()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(TensorNormal, ThirdOrderCovariance) {
  std::mt19937_64 gen(13);
  const DenseTensor::Dims dims = {2, 2, 2};
  std::vector<Matrix> raw;
  std::vector<SpdMatrix> scales;
  for (auto d : dims) {
    raw.push_back(oracle::random_spd(static_cast<Eigen::Index>(d), gen));
    scales.emplace_back(raw.back());
  }
  const Matrix expected = oracle::textbook_kron_chain(raw);
  RngStream rng(4);
  const int n = 100'000;
  Matrix outer = Matrix::Zero(8, 8);
  const DenseTensor zero(dims);
  for (int i = 0; i < n; ++i) {
    const Vector v = sample_tensor_normal(zero, scales, rng).data();
    outer += v * v.transpose();
  }
  const Matrix cov = outer / n;
  for (Eigen::Index i = 0; i < 8; ++i)
    for (Eigen::Index j = 0; j < 8; ++j) {
      const double se = std::sqrt((expected(i, i) * expected(j, j) + expected(i, j) * expected(i, j)) / n);
      EXPECT_LT(std::abs(cov(i, j) - expected(i, j)) / se, 5.0) << i << "," << j;
    }
}
