// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace matgal;
using namespace matgal::validation;

namespace {

SampleBatch batch_from(const Matrix& draws, std::uint64_t seed = 1) {
  SampleBatch b;
  b.dims = {static_cast<std::size_t>(draws.rows())};
  b.draws = draws;
  b.seed = seed;
  return b;
}

Params scalar_law(double mu, double lambda) {
  return MgalParams(Matrix::Constant(1, 1, mu), SpdMatrix::identity(1), SpdMatrix::identity(1), lambda);
}

}  // namespace

TEST(CheckReport, PassedIffWithinTolerance) {
  EXPECT_TRUE(CheckReport::make("a", 0.5, 0.5, 10, 1).passed);
  EXPECT_FALSE(CheckReport::make("a", 0.51, 0.5, 10, 1).passed);
  EXPECT_FALSE(CheckReport::make("a", std::nan(""), 0.5, 10, 1).passed);
  const auto j = CheckReport::make("mean", 1.25, 4.0, 200, 7).to_json();
  EXPECT_EQ(j["name"], "mean");
  EXPECT_EQ(j["statistic"], 1.25);
  EXPECT_EQ(j["passed"], true);
  EXPECT_EQ(j["sample_size"], 200);
  EXPECT_EQ(j["seed"], 7);
  EXPECT_EQ(CheckReport::make("x", 1, 2, 3, 4).to_ndjson().find('\n'), std::string::npos);
}

TEST(EmpiricalMoments, ConstantBatchHasZeroCovariance) {
  const Matrix draws = Matrix::Constant(3, 500, 2.5);
  const EmpiricalMoments em = empirical_moments(batch_from(draws));
  EXPECT_EQ(em.cov, Matrix::Zero(3, 3));
  EXPECT_EQ(em.mean, Vector::Constant(3, 2.5));
  EXPECT_EQ(em.cov_se, Matrix::Zero(3, 3));
}

TEST(EmpiricalMoments, StandardNormalMean) {
  RngStream rng(31);
  const Matrix draws = standard_normal_matrix(1, 100'000, rng);
  const EmpiricalMoments em = empirical_moments(batch_from(draws));
  EXPECT_LT(std::abs(em.mean[0]), 4.0 / std::sqrt(1e5));
  EXPECT_NEAR(em.cov(0, 0), 1.0, 0.02);
  // bootstrap SE close to the textbook 1/sqrt(N)
  EXPECT_NEAR(em.mean_se[0] * std::sqrt(1e5), 1.0, 0.2);
  EXPECT_NEAR(em.cov_se(0, 0) * std::sqrt(1e5), std::sqrt(2.0), 0.3);
}

TEST(EmpiricalMoments, RejectsUndersizedBatch) {
  EXPECT_THROW(empirical_moments(batch_from(Matrix::Zero(2, 99))), DomainError);
  EXPECT_NO_THROW(empirical_moments(batch_from(Matrix::Zero(2, 100)), 5));
}

TEST(EmpiricalMoments, ReproducibleFromSeed) {
  RngStream rng(3);
  const Matrix draws = standard_normal_matrix(2, 1000, rng);
  const auto a = empirical_moments(batch_from(draws, 5));
  const auto b = empirical_moments(batch_from(draws, 5));
  EXPECT_EQ(a.cov_se, b.cov_se);
  EXPECT_NE(a.cov_se, empirical_moments(batch_from(draws, 6)).cov_se);
}

TEST(CfGrid, StructureAndScaling) {
  std::mt19937_64 gen(37);
  const Params p = MgalParams(oracle::random_matrix(2, 3, gen), SpdMatrix(oracle::random_spd(2, gen)),
                              SpdMatrix(oracle::random_spd(3, gen)), 1.5);
  const CfGrid g = make_cf_grid(p, 11);
  ASSERT_EQ(g.points.size(), 20u);
  EXPECT_EQ(g.dim, 6u);
  EXPECT_EQ(g.points[0], Vector::Zero(6));
  for (std::size_t i = 1; i < g.points.size(); ++i) {
    const double half_q = 0.5 * cf_quadratic_form(p, g.points[i]);
    EXPECT_NEAR(half_q, 0.1 + 2.9 * static_cast<double>(i - 1) / 18.0, 1e-12);
  }
  const CfGrid again = make_cf_grid(p, 11);
  const CfGrid other = make_cf_grid(p, 12);
  EXPECT_EQ(g.points[7], again.points[7]);
  EXPECT_NE(g.points[7], other.points[7]);
  std::set<double> firsts;
  for (std::size_t i = 1; i < g.points.size(); ++i) firsts.insert(g.points[i][0] / g.points[i].norm());
  EXPECT_GE(firsts.size(), 19u);
}

TEST(EmpiricalCf, TrivialCases) {
  const Params p = scalar_law(0.0, 1.0);
  const CfGrid g = make_cf_grid(p, 1);
  RngStream rng(9);
  const SampleBatch zeros = batch_from(Matrix::Zero(1, 200));
  for (const auto& v : empirical_cf(zeros, g)) EXPECT_EQ(v, Complex(1.0, 0.0));
  const SampleBatch noise = batch_from(standard_normal_matrix(1, 200, rng));
  EXPECT_EQ(empirical_cf(noise, g)[0], Complex(1.0, 0.0));
  CfGrid empty;
  empty.dim = 1;
  EXPECT_THROW(empirical_cf(noise, empty), DomainError);
  EXPECT_THROW(cf_gof_distance(p, noise, empty), DomainError);
  const SampleBatch wide = batch_from(Matrix::Zero(2, 200));
  EXPECT_THROW(empirical_cf(wide, g), ShapeError);
  EXPECT_THROW(empirical_cf(batch_from(Matrix::Zero(1, 50)), g), DomainError);
}

TEST(CfGof, MatchedPassesAndWrongLambdaFails) {
  const Params p = scalar_law(0.4, 1.0);
  const SampleBatch b = sample_sharded(p, 200'000, 21);
  const CfGrid g = make_cf_grid(p, 21);
  EXPECT_LE(cf_gof_distance(p, b, g), 0.01);
  EXPECT_GT(cf_gof_distance(with_lambda(p, 2.0), b, g), 0.05);
  EXPECT_GT(cf_gof_distance(with_scaled_first_scale(p, 2.0), b, g), 0.05);
}

TEST(Normalization, UnivariateMal) {
  EXPECT_NEAR(quadrature_normalization(scalar_law(0.0, 1.0)), 1.0, 1e-6);
  EXPECT_NEAR(quadrature_normalization(scalar_law(1.3, 1.0)), 1.0, 1e-6);
}

TEST(Normalization, UnivariateMgal) {
  EXPECT_NEAR(quadrature_normalization(scalar_law(0.0, 2.0)), 1.0, 1e-4);
  EXPECT_NEAR(quadrature_normalization(scalar_law(-0.8, 0.7)), 1.0, 1e-4);
}

TEST(Normalization, BivariateMalWithLogSingularity) {
  std::mt19937_64 gen(41);
  const Params p = MgalParams::mal(Matrix::Zero(1, 2), SpdMatrix::identity(1), SpdMatrix(oracle::random_spd(2, gen)));
  EXPECT_NEAR(quadrature_normalization(p), 1.0, 1e-4);
}

TEST(Normalization, RejectsLargerDimensions) {
  const Params p = MgalParams::mal(Matrix::Zero(1, 3), SpdMatrix::identity(1), SpdMatrix::identity(3));
  EXPECT_THROW(quadrature_normalization(p), UnsupportedError);
}

TEST(Perturbations, ChangeOnlyTheIntendedParameter) {
  std::mt19937_64 gen(43);
  const Params p = MgalParams(oracle::random_matrix(2, 2, gen), SpdMatrix(oracle::random_spd(2, gen)),
                              SpdMatrix(oracle::random_spd(2, gen)), 1.5);
  const auto& a = std::get<MgalParams>(p);
  const Params lifted = with_lambda(p, 2.5);
  const auto& b = std::get<MgalParams>(lifted);
  EXPECT_EQ(b.lambda(), 2.5);
  EXPECT_EQ(b.location(), a.location());
  const Params s = with_scaled_first_scale(p, 2.0);
  EXPECT_EQ(std::get<MgalParams>(s).sigma().matrix(), 2.0 * a.sigma().matrix());
  EXPECT_EQ(std::get<MgalParams>(s).psi().matrix(), a.psi().matrix());
}

TEST(VecEquivalence, CheckUsesDenseEvaluation) {
  std::mt19937_64 gen(47);
  std::vector<SpdMatrix> sigmas;
  for (int i = 0; i < 3; ++i) sigmas.emplace_back(oracle::random_spd(2, gen));
  DenseTensor m({2, 2, 2});
  m.data() = oracle::random_matrix(8, 1, gen, 0.3);
  const Params p = TgalParams(m, sigmas, 2.0);
  const SampleBatch b = sample_sharded(p, 500, 3);
  const CheckReport r = check_vec_equivalence(p, b);
  EXPECT_TRUE(r.passed) << r.statistic;
  EXPECT_EQ(r.sample_size, 20u);
}

TEST(Suite, FastSuitePassesAndIsReproducible) {
  std::mt19937_64 gen(53);
  const Params p = MgalParams(oracle::random_matrix(2, 2, gen, 0.5), SpdMatrix(oracle::random_spd(2, gen)),
                              SpdMatrix(oracle::random_spd(2, gen)), 1.5);
  const auto a = run_suite(p, Suite::fast, 7);
  const auto b = run_suite(p, Suite::fast, 7);
  ASSERT_EQ(a.size(), b.size());
  std::set<std::string> names;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(a[i].passed) << a[i].to_ndjson();
    EXPECT_EQ(a[i].to_ndjson(), b[i].to_ndjson());
    names.insert(a[i].name);
  }
  for (const char* n : {"bessel_oracle", "mean", "covariance", "cf_gof", "cf_gof_negative_lambda",
                        "cf_gof_negative_scale", "vec_equivalence"}) {
    EXPECT_TRUE(names.count(n)) << n;
  }
}

TEST(Suite, NegativeControlsRejectPerturbedLaws) {
  // Draws from lambda = 1.5 checked against lambda + 1 and a doubled scale.
  const Params truth = scalar_law(0.5, 1.5);
  const SampleBatch b = sample_sharded(truth, 20'000, 5);
  const EmpiricalMoments em = empirical_moments(b);
  const CfGrid g = make_cf_grid(truth, 5);
  for (const Params& wrong : {with_lambda(truth, 2.5), with_scaled_first_scale(truth, 2.0)}) {
    EXPECT_FALSE(check_cf("cf", wrong, b, g, 0.0316).passed);
    EXPECT_FALSE(check_covariance(wrong, b, em).passed);
  }
  EXPECT_FALSE(check_mean(with_lambda(truth, 2.5), b, em).passed);
  EXPECT_TRUE(check_cf_negative("neg", with_lambda(truth, 2.5), b, g).passed);
  EXPECT_FALSE(check_cf_negative("neg", truth, b, g).passed);
}
