// SPDX-License-Identifier: Apache-2.0
#pragma once

// Monte Carlo and quadrature checks that turn the distributional identities
// (moments, characteristic function, normalization, vec-equivalence) into
// fixed-tolerance, seeded, reproducible reports.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

#include "matgal/bessel_oracle.hpp"
#include "matgal/distributions.hpp"
#include "matgal/error.hpp"
#include "matgal/gaussian_core.hpp"
#include "matgal/kron_linalg.hpp"
#include "matgal/special_fn.hpp"

namespace matgal::validation {

/// Result of one check; passed == (statistic <= tolerance).
struct CheckReport {
  std::string name;
  double statistic = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::size_t sample_size = 0;
  std::uint64_t seed = 0;

  static CheckReport make(std::string name, double statistic, double tolerance,
                          std::size_t sample_size, std::uint64_t seed) {
    return {std::move(name), statistic, tolerance, statistic <= tolerance, sample_size, seed};
  }

  nlohmann::json to_json() const {
    return {{"name", name},           {"statistic", statistic}, {"tolerance", tolerance},
            {"passed", passed},       {"sample_size", sample_size}, {"seed", seed}};
  }

  /// One NDJSON line, without the trailing newline.
  std::string to_ndjson() const { return to_json().dump(); }
};

// ---------------------------------------------------------------------------
// CF grids

/// Frequencies in vec order; points[0] is the origin.
struct CfGrid {
  std::vector<Vector> points;
  std::size_t dim = 0;
};

inline constexpr std::size_t kCfGridPoints = 20;
inline constexpr double kCfGridLow = 0.1;
inline constexpr double kCfGridHigh = 3.0;

/// Deterministic grid for `p`: the origin plus 19 points whose directions
/// come from a seeded Kronecker (R_d) low-discrepancy sequence pushed through
/// the normal quantile, each rescaled so that half the core quadratic form
/// (vec T)^T Cov_core (vec T) / 2 takes evenly spaced values in [0.1, 3].
inline CfGrid make_cf_grid(const Params& p, std::uint64_t seed,
                           std::size_t points = kCfGridPoints) {
  if (points < 2) throw DomainError("make_cf_grid: need at least two points");
  const std::size_t d = total_dim(p);
  // Generalized golden ratio: the unique positive root of x^(d+1) = x + 1.
  double phi = 2.0;
  for (int i = 0; i < 64; ++i) phi = std::pow(1.0 + phi, 1.0 / static_cast<double>(d + 1));
  std::vector<double> alpha(d);
  for (std::size_t j = 0; j < d; ++j) alpha[j] = std::fmod(std::pow(1.0 / phi, static_cast<double>(j + 1)), 1.0);

  RngStream rng(seed, 0x67726964ULL);
  std::vector<double> offset(d);
  for (auto& o : offset) o = rng.uniform();

  const boost::math::normal_distribution<double> std_normal;
  CfGrid grid;
  grid.dim = d;
  grid.points.push_back(Vector::Zero(static_cast<Eigen::Index>(d)));
  for (std::size_t i = 1; i < points; ++i) {
    Vector dir(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) {
      double u = std::fmod(offset[j] + static_cast<double>(i) * alpha[j], 1.0);
      u = std::clamp(u, 1e-6, 1.0 - 1e-6);
      dir[static_cast<Eigen::Index>(j)] = boost::math::quantile(std_normal, u);
    }
    if (dir.norm() == 0.0) dir[0] = 1.0;
    const double target =
        kCfGridLow + (kCfGridHigh - kCfGridLow) * static_cast<double>(i - 1) /
                         static_cast<double>(points - 2);
    const double q = cf_quadratic_form(p, dir);
    grid.points.push_back(dir * std::sqrt(2.0 * target / q));
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Empirical statistics

struct EmpiricalMoments {
  Vector mean;
  Matrix cov;
  Vector mean_se;  // bootstrap standard errors
  Matrix cov_se;
};

inline constexpr std::size_t kMinBatch = 100;
inline constexpr std::size_t kBootstrapResamples = 200;

namespace detail {

inline void check_batch(const SampleBatch& b) {
  if (b.count() < kMinBatch) {
    throw DomainError("batch has " + std::to_string(b.count()) + " draws; at least " +
                      std::to_string(kMinBatch) + " required");
  }
}

// Weighted mean and (N-1)-normalized covariance; weights are multiplicities.
inline void weighted_moments(const Matrix& x, const Vector& w, Vector& mean, Matrix& cov) {
  const double n = w.sum();
  mean = x * w / n;
  const Matrix centered = x.colwise() - mean;
  cov = centered * w.asDiagonal() * centered.transpose() / (n - 1.0);
}

}  // namespace detail

/// Sample mean and covariance of vec draws with bootstrap standard errors
/// (kBootstrapResamples resamples, seeded from the batch seed).
inline EmpiricalMoments empirical_moments(const SampleBatch& batch,
                                          std::size_t resamples = kBootstrapResamples) {
  detail::check_batch(batch);
  const auto n = static_cast<Eigen::Index>(batch.count());
  const auto d = batch.draws.rows();
  EmpiricalMoments out;
  detail::weighted_moments(batch.draws, Vector::Ones(n), out.mean, out.cov);

  Vector sum_mean = Vector::Zero(d);
  Vector sum_mean2 = Vector::Zero(d);
  Matrix sum_cov = Matrix::Zero(d, d);
  Matrix sum_cov2 = Matrix::Zero(d, d);
  RngStream rng(batch.seed, 0xb0075742ULL);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  std::mt19937_64 engine(rng.bits());
  Vector w(n);
  Vector m;
  Matrix c;
  for (std::size_t r = 0; r < resamples; ++r) {
    w.setZero();
    for (Eigen::Index i = 0; i < n; ++i) w[pick(engine)] += 1.0;
    detail::weighted_moments(batch.draws, w, m, c);
    sum_mean += m;
    sum_mean2 += m.cwiseAbs2();
    sum_cov += c;
    sum_cov2 += c.cwiseAbs2();
  }
  const double b = static_cast<double>(resamples);
  auto sd = [b](double s, double s2) { return std::sqrt(std::max(0.0, (s2 - s * s / b) / (b - 1.0))); };
  out.mean_se = sum_mean.binaryExpr(sum_mean2, sd);
  out.cov_se = sum_cov.binaryExpr(sum_cov2, sd);
  return out;
}

/// (1/N) sum_j exp(i <t, x_j>) for every grid point.
inline std::vector<Complex> empirical_cf(const SampleBatch& batch, const CfGrid& grid) {
  detail::check_batch(batch);
  if (grid.points.empty()) throw DomainError("empirical_cf: empty grid");
  if (grid.dim != batch.total_dim()) throw ShapeError("empirical_cf: grid and batch dims differ");
  Matrix t(static_cast<Eigen::Index>(grid.points.size()), static_cast<Eigen::Index>(grid.dim));
  for (std::size_t i = 0; i < grid.points.size(); ++i) t.row(static_cast<Eigen::Index>(i)) = grid.points[i].transpose();
  const Matrix phase = t * batch.draws;
  const double n = static_cast<double>(batch.count());
  std::vector<Complex> out;
  out.reserve(grid.points.size());
  for (Eigen::Index i = 0; i < phase.rows(); ++i) {
    const double re = phase.row(i).array().cos().sum() / n;
    const double im = phase.row(i).array().sin().sum() / n;
    out.emplace_back(re, im);
  }
  return out;
}

/// max over the grid of |empirical CF - analytic CF of p|.
inline double cf_gof_distance(const Params& p, const SampleBatch& batch, const CfGrid& grid) {
  if (grid.points.empty()) throw DomainError("cf_gof_distance: empty grid");
  if (grid.dim != total_dim(p)) throw ShapeError("cf_gof_distance: grid and params dims differ");
  const auto emp = empirical_cf(batch, grid);
  double worst = 0.0;
  for (std::size_t i = 0; i < emp.size(); ++i) {
    worst = std::max(worst, std::abs(emp[i] - cf(p, grid.points[i])));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Dense reference evaluation

/// Log-density of GAL_d(mu, cov, lambda) at x through an explicit d x d
/// covariance. Used with materialize_kron() to check the structured path.
inline double log_pdf_dense(const Vector& mu, const SpdMatrix& cov, double lambda, const Vector& x) {
  const auto d = static_cast<Eigen::Index>(cov.dim());
  if (mu.size() != d || x.size() != d) throw ShapeError("log_pdf_dense: length mismatch");
  const auto l = cov.factor().matrix().triangularView<Eigen::Lower>();
  const Vector xw = l.solve(x);
  const Vector mw = l.solve(mu);
  GalKernelInputs in;
  in.q_x = xw.squaredNorm();
  in.q_m = mw.squaredNorm();
  in.s_xm = xw.dot(mw);
  in.logdet = cov.log_det();
  in.total_dim = static_cast<std::size_t>(d);
  in.lambda = lambda;
  return gal_log_kernel(in);
}

/// The family's vec-level law: (vec M, materialized covariance, lambda).
inline SpdMatrix materialized_core_covariance(const Params& p) {
  return std::visit(
      [](const auto& q) -> SpdMatrix {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, MgalParams>) {
          const SpdMatrix f[] = {q.sigma(), q.psi()};
          return materialize_kron(f);
        } else {
          return materialize_kron(q.sigmas());
        }
      },
      p);
}

inline Vector location_vec(const Params& p) {
  return std::visit([](const auto& q) -> Vector { return vec(q.location()); }, p);
}

// ---------------------------------------------------------------------------
// Normalization

/// Integral of exp(log_pdf) over R^d for d in {1, 2}.
///
/// d = 1 integrates each half-line with exp-sinh quadrature. d = 2 whitens
/// by the Cholesky factor L of the core covariance and integrates in polar
/// coordinates about the location of the symmetric core (the origin),
/// |det L| r dr dtheta: the radial integral over [0, inf) by exp-sinh, the
/// angular one by adaptive Gauss-Kronrod. The singular point sits at r = 0,
/// where the r weight makes the integrand bounded or logarithmically
/// integrable; exp-sinh never evaluates the endpoint itself.
inline double quadrature_normalization(const Params& p, double tolerance = 1e-10) {
  const std::size_t d = total_dim(p);
  if (d > 2) throw UnsupportedError("quadrature_normalization: total dimension exceeds 2");
  auto density = [&](const Vector& x) {
    const double lp = log_pdf(p, x);
    return std::isfinite(lp) ? std::exp(lp) : 0.0;
  };
  boost::math::quadrature::exp_sinh<double> half_line;
  if (d == 1) {
    Vector x(1);
    auto pos = [&](double t) { x[0] = t; return density(x); };
    auto neg = [&](double t) { x[0] = -t; return density(x); };
    return half_line.integrate(pos, 0.0, std::numeric_limits<double>::infinity(), tolerance) +
           half_line.integrate(neg, 0.0, std::numeric_limits<double>::infinity(), tolerance);
  }
  const SpdMatrix cov = materialized_core_covariance(p);
  const Matrix l = cov.factor().matrix();
  const double jac = l(0, 0) * l(1, 1);
  auto radial = [&](double theta) {
    const Vector dir = l * Vector{{std::cos(theta), std::sin(theta)}};
    auto f = [&](double r) { return r == 0.0 ? 0.0 : density(r * dir) * r; };
    return half_line.integrate(f, 0.0, std::numeric_limits<double>::infinity(), tolerance);
  };
  using Gk = boost::math::quadrature::gauss_kronrod<double, 31>;
  return jac * Gk::integrate(radial, 0.0, 2.0 * std::numbers::pi, 10, tolerance);
}

// ---------------------------------------------------------------------------
// Parameter perturbations for negative controls

inline Params with_lambda(const Params& p, double lambda) {
  return std::visit(
      [&](const auto& q) -> Params {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, MgalParams>) {
          return MgalParams(q.location(), q.sigma(), q.psi(), lambda);
        } else {
          return TgalParams(q.location(), q.sigmas(), lambda);
        }
      },
      p);
}

/// Multiplies the first scale matrix (Sigma, or Sigma_1) by `factor`.
inline Params with_scaled_first_scale(const Params& p, double factor) {
  return std::visit(
      [&](const auto& q) -> Params {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, MgalParams>) {
          return MgalParams(q.location(), SpdMatrix(factor * q.sigma().matrix()), q.psi(),
                            q.lambda());
        } else {
          auto sigmas = q.sigmas();
          sigmas[0] = SpdMatrix(factor * sigmas[0].matrix());
          return TgalParams(q.location(), std::move(sigmas), q.lambda());
        }
      },
      p);
}

// ---------------------------------------------------------------------------
// Individual checks

/// max_i |sample mean_i - lambda vec(M)_i| / SE_i.
inline CheckReport check_mean(const Params& p, const SampleBatch& batch, const EmpiricalMoments& em,
                              double tolerance = 4.0) {
  const Vector expected = lambda_of(p) * location_vec(p);
  const double stat = ((em.mean - expected).cwiseAbs().array() / em.mean_se.array()).maxCoeff();
  return CheckReport::make("mean", stat, tolerance, batch.count(), batch.seed);
}

/// max_ij |sample cov_ij - K_ij| / SE_ij with K = lambda (Cov_core + vec M vec M^T).
inline CheckReport check_covariance(const Params& p, const SampleBatch& batch,
                                    const EmpiricalMoments& em, double tolerance = 4.0) {
  const Matrix expected = std::visit(
      [](const auto& q) -> Matrix {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, MgalParams>) {
          return covariance_mgal(q);
        } else {
          return covariance_tgal(q);
        }
      },
      p);
  const double stat = ((em.cov - expected).cwiseAbs().array() / em.cov_se.array()).maxCoeff();
  return CheckReport::make("covariance", stat, tolerance, batch.count(), batch.seed);
}

inline CheckReport check_cf(const std::string& name, const Params& p, const SampleBatch& batch,
                            const CfGrid& grid, double tolerance) {
  return CheckReport::make(name, cf_gof_distance(p, batch, grid), tolerance, batch.count(),
                           batch.seed);
}

/// Passes when the batch is rejected against perturbed parameters: the
/// statistic is threshold / distance and the tolerance 1.
inline CheckReport check_cf_negative(const std::string& name, const Params& perturbed,
                                     const SampleBatch& batch, const CfGrid& grid,
                                     double threshold = 0.05) {
  const double dist = cf_gof_distance(perturbed, batch, grid);
  return CheckReport::make(name, threshold / dist, 1.0, batch.count(), batch.seed);
}

inline CheckReport check_normalization(const Params& p, std::uint64_t seed, double tolerance = 1e-4) {
  return CheckReport::make("normalization", std::abs(quadrature_normalization(p) - 1.0), tolerance,
                           0, seed);
}

/// Structured log-density vs the dense vec-level evaluation at `points`
/// seeded draws; statistic is the largest absolute difference.
inline CheckReport check_vec_equivalence(const Params& p, const SampleBatch& batch,
                                         std::size_t points = 20, double tolerance = 1e-10) {
  if (total_dim(p) > kMaterializeLimit) {
    throw UnsupportedError("check_vec_equivalence: total dimension exceeds materialization limit");
  }
  const SpdMatrix cov = materialized_core_covariance(p);
  const Vector mu = location_vec(p);
  const double lambda = lambda_of(p);
  double worst = 0.0;
  const std::size_t n = std::min(points, batch.count());
  for (std::size_t j = 0; j < n; ++j) {
    const Vector x = batch.draws.col(static_cast<Eigen::Index>(j));
    const double a = log_pdf(p, x);
    const double b = log_pdf_dense(mu, cov, lambda, x);
    worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
  }
  return CheckReport::make("vec_equivalence", worst, tolerance, n, batch.seed);
}

/// Relative error of exp(log_bessel_k) against quadrature at the order used
/// by the density of p, over a fixed z grid.
inline CheckReport check_bessel_order(const Params& p, std::uint64_t seed, double tolerance = 1e-8) {
  const double nu = lambda_of(p) - 0.5 * static_cast<double>(total_dim(p));
  double worst = 0.0;
  if (std::abs(nu) <= 25.0) {
    for (double z : {1e-3, 0.1, 1.0, 5.0, 30.0}) {
      const double ref = special::bessel_k_integral_oracle(nu, z);
      const double got = std::exp(special::log_bessel_k(nu, z));
      worst = std::max(worst, std::abs(got - ref) / ref);
    }
  }
  return CheckReport::make("bessel_oracle", worst, tolerance, 0, seed);
}

// ---------------------------------------------------------------------------
// Suites

enum class Suite { fast, full };

struct SuiteConfig {
  std::size_t sample_size;
  double cf_tolerance;
};

/// fast: 2e4 draws with the CF tolerance widened by sqrt(10) (Monte Carlo
/// error scales as N^-1/2); full: 2e5 draws at 0.01.
inline SuiteConfig suite_config(Suite s) {
  return s == Suite::full ? SuiteConfig{200'000, 0.01} : SuiteConfig{20'000, 0.0316};
}

/// Every check applicable to p. Report names are stable, and each report is
/// reproducible from (name, seed, sample_size).
inline std::vector<CheckReport> run_suite(const Params& p, Suite suite, std::uint64_t seed) {
  const SuiteConfig cfg = suite_config(suite);
  std::vector<CheckReport> out;
  out.push_back(check_bessel_order(p, seed));

  const SampleBatch batch = sample_sharded(p, cfg.sample_size, seed);
  const EmpiricalMoments em = empirical_moments(batch);
  out.push_back(check_mean(p, batch, em));
  out.push_back(check_covariance(p, batch, em));

  const CfGrid grid = make_cf_grid(p, seed);
  out.push_back(check_cf("cf_gof", p, batch, grid, cfg.cf_tolerance));
  out.push_back(check_cf_negative("cf_gof_negative_lambda", with_lambda(p, lambda_of(p) + 1.0),
                                  batch, grid));
  out.push_back(check_cf_negative("cf_gof_negative_scale", with_scaled_first_scale(p, 2.0), batch,
                                  grid));

  if (total_dim(p) <= kMaterializeLimit) out.push_back(check_vec_equivalence(p, batch));
  if (total_dim(p) <= 2) out.push_back(check_normalization(p, seed));
  return out;
}

}  // namespace matgal::validation
