// SPDX-License-Identifier: Apache-2.0
#pragma once

// Matrix variate and tensor variate (generalized) asymmetric Laplace laws.
//
//   MGAL_{k x n}(M, Sigma, Psi, lambda):  vec X ~ GAL_{kn}(vec M, Psi (x) Sigma, lambda)
//   TGAL_{n_1..n_D}(M, Sigma_1..Sigma_D, lambda):
//                                         vec X ~ GAL_{n*}(vec M, Sigma_D (x) .. (x) Sigma_1, lambda)
//
// MAL and TAL are the lambda = 1 members. Both families admit the mixture
// representation X = M W + sqrt(W) Z with W ~ Gamma(lambda, 1) and Z a
// zero-mean matrix/tensor normal with the same scales.
//
// The location/scale pair is identifiable only up to (c Sigma, Psi / c);
// parameters are stored exactly as given.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "matgal/error.hpp"
#include "matgal/gaussian_core.hpp"
#include "matgal/kron_linalg.hpp"
#include "matgal/special_fn.hpp"

namespace matgal {

/// Default cap on the dimension of an explicitly materialized covariance.
inline constexpr std::size_t kCovarianceCap = 4096;

namespace detail {

inline double checked_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("lambda must be positive and finite");
  }
  return lambda;
}

// Dense F_D (x) ... (x) F_1 without the oracle size guard.
inline Matrix kron_dense(std::span<const Matrix> factors) {
  Matrix acc = factors[0];
  for (std::size_t i = 1; i < factors.size(); ++i) {
    const Matrix& f = factors[i];
    Matrix next(f.rows() * acc.rows(), f.cols() * acc.cols());
    for (Eigen::Index r = 0; r < f.rows(); ++r) {
      for (Eigen::Index c = 0; c < f.cols(); ++c) {
        next.block(r * acc.rows(), c * acc.cols(), acc.rows(), acc.cols()) = f(r, c) * acc;
      }
    }
    acc = std::move(next);
  }
  return acc;
}

}  // namespace detail

/// MGAL_{k x n}(M, Sigma, Psi, lambda). Immutable after construction.
class MgalParams {
 public:
  MgalParams(Matrix m, SpdMatrix sigma, SpdMatrix psi, double lambda)
      : m_(std::move(m)),
        sigma_(std::move(sigma)),
        psi_(std::move(psi)),
        lambda_(detail::checked_lambda(lambda)) {
    if (static_cast<std::size_t>(m_.rows()) != sigma_.dim() ||
        static_cast<std::size_t>(m_.cols()) != psi_.dim()) {
      throw ShapeError("MgalParams: location is " + std::to_string(m_.rows()) + "x" +
                       std::to_string(m_.cols()) + " but scales are " +
                       std::to_string(sigma_.dim()) + " and " + std::to_string(psi_.dim()));
    }
    if (!m_.allFinite()) throw DomainError("MgalParams: non-finite location entry");
    const SpdMatrix scales[] = {sigma_, psi_};
    logdet_ = kron_logdet(scales);
    m_reduced_ = reduce(m_);
    q_m_ = m_reduced_.squaredNorm();
  }

  /// The MAL law, i.e. lambda = 1.
  static MgalParams mal(Matrix m, SpdMatrix sigma, SpdMatrix psi) {
    return MgalParams(std::move(m), std::move(sigma), std::move(psi), 1.0);
  }

  const Matrix& location() const { return m_; }
  const SpdMatrix& sigma() const { return sigma_; }
  const SpdMatrix& psi() const { return psi_; }
  double lambda() const { return lambda_; }
  std::size_t rows() const { return sigma_.dim(); }
  std::size_t cols() const { return psi_.dim(); }
  std::size_t total_dim() const { return rows() * cols(); }
  DenseTensor::Dims dims() const { return {rows(), cols()}; }

  /// ln det(Psi (x) Sigma).
  double logdet() const { return logdet_; }
  /// tr(Psi^{-1} M^T Sigma^{-1} M).
  double location_form() const { return q_m_; }

  /// L_Sigma^{-1} X L_Psi^{-T}; Frobenius products of reduced matrices are
  /// the trace forms tr(Psi^{-1} A^T Sigma^{-1} B).
  Matrix reduce(const Matrix& x) const {
    if (x.rows() != m_.rows() || x.cols() != m_.cols()) {
      throw ShapeError("MgalParams: argument is " + std::to_string(x.rows()) + "x" +
                       std::to_string(x.cols()) + ", expected " + std::to_string(m_.rows()) +
                       "x" + std::to_string(m_.cols()));
    }
    Matrix y = sigma_.factor().matrix().triangularView<Eigen::Lower>().solve(x);
    psi_.factor().matrix().transpose().triangularView<Eigen::Upper>().solveInPlace<Eigen::OnTheRight>(y);
    return y;
  }
  const Matrix& reduced_location() const { return m_reduced_; }

 private:
  Matrix m_;
  SpdMatrix sigma_;
  SpdMatrix psi_;
  double lambda_;
  double logdet_ = 0.0;
  double q_m_ = 0.0;
  Matrix m_reduced_;
};

/// TGAL_{n_1..n_D}(M, Sigma_1..Sigma_D, lambda); sigmas[i] scales mode i.
class TgalParams {
 public:
  TgalParams(DenseTensor m, std::vector<SpdMatrix> sigmas, double lambda)
      : m_(std::move(m)), sigmas_(std::move(sigmas)), lambda_(detail::checked_lambda(lambda)) {
    detail::check_scales(m_.dims(), sigmas_);
    if (!m_.data().allFinite()) throw DomainError("TgalParams: non-finite location entry");
    logdet_ = kron_logdet(sigmas_, m_.dims());
    m_white_ = whiten(m_, sigmas_);
    q_m_ = m_white_.data().squaredNorm();
  }

  static TgalParams tal(DenseTensor m, std::vector<SpdMatrix> sigmas) {
    return TgalParams(std::move(m), std::move(sigmas), 1.0);
  }

  /// The order-2 tensor law equal to a matrix law (Sigma_1 = Sigma, Sigma_2 = Psi).
  static TgalParams from_matrix(const MgalParams& p) {
    return TgalParams(DenseTensor::from_matrix(p.location()), {p.sigma(), p.psi()}, p.lambda());
  }

  const DenseTensor& location() const { return m_; }
  const std::vector<SpdMatrix>& sigmas() const { return sigmas_; }
  double lambda() const { return lambda_; }
  std::size_t order() const { return m_.order(); }
  const DenseTensor::Dims& dims() const { return m_.dims(); }
  std::size_t total_dim() const { return m_.size(); }

  double logdet() const { return logdet_; }
  double location_form() const { return q_m_; }
  const DenseTensor& whitened_location() const { return m_white_; }

 private:
  DenseTensor m_;
  std::vector<SpdMatrix> sigmas_;
  double lambda_;
  double logdet_ = 0.0;
  double q_m_ = 0.0;
  DenseTensor m_white_{DenseTensor::Dims{1}};
};

/// Either family; the tensor form covers every order, the matrix form is
/// kept separate because it carries the DXC transform.
using Params = std::variant<MgalParams, TgalParams>;

inline std::size_t total_dim(const Params& p) {
  return std::visit([](const auto& q) { return q.total_dim(); }, p);
}
inline double lambda_of(const Params& p) {
  return std::visit([](const auto& q) { return q.lambda(); }, p);
}
inline DenseTensor::Dims dims_of(const Params& p) {
  return std::visit([](const auto& q) -> DenseTensor::Dims { return q.dims(); }, p);
}

// ---------------------------------------------------------------------------
// Density

/// Scalar statistics that determine the density at one point.
struct GalKernelInputs {
  double q_x = 0.0;         // quadratic form of the evaluation point
  double q_m = 0.0;         // quadratic form of the location
  double s_xm = 0.0;        // cross term between point and location
  double logdet = 0.0;      // ln det of the Kronecker covariance
  std::size_t total_dim = 1;
  double lambda = 1.0;
};

namespace detail {

inline void check_kernel_inputs(const GalKernelInputs& in) {
  if (!(in.q_x >= 0.0) || !(in.q_m >= 0.0) || in.total_dim < 1 || !(in.lambda > 0.0)) {
    throw DomainError("GalKernelInputs: invariant violated");
  }
}

}  // namespace detail

/// ln of the generalized asymmetric Laplace density in terms of its scalar
/// statistics, with d = total_dim and nu = lambda - d/2:
///
///   ln 2 + s_xm - (d/2) ln 2pi - ln G(lambda) - logdet/2
///     + (nu/2) ln(q_x / (2 + q_m)) + ln K_nu(sqrt((2 + q_m) q_x)).
///
/// At q_x = 0 the display is indeterminate and the limit is returned:
/// finite, ln G(nu) + (nu-1) ln 2 - nu ln(2 + q_m) replacing the last two
/// terms, when nu > 0; +infinity when nu <= 0 (K_0 diverges
/// logarithmically, K_nu for nu < 0 like a power).
inline double gal_log_kernel(const GalKernelInputs& in) {
  detail::check_kernel_inputs(in);
  const double d = static_cast<double>(in.total_dim);
  const double nu = in.lambda - 0.5 * d;
  const double a = 2.0 + in.q_m;
  const double base = std::numbers::ln2 + in.s_xm - 0.5 * d * std::log(2.0 * std::numbers::pi) -
                      special::log_gamma(in.lambda) - 0.5 * in.logdet;
  const double z = std::sqrt(a * in.q_x);
  if (z > 0.0) {
    return base + 0.5 * nu * (std::log(in.q_x) - std::log(a)) + special::log_bessel_k(nu, z);
  }
  if (nu > 0.0) {
    return base + special::log_gamma(nu) + (nu - 1.0) * std::numbers::ln2 - nu * std::log(a);
  }
  return std::numeric_limits<double>::infinity();
}

/// The lambda = 1 kernel written out on its own (no Gamma factor, order
/// 1 - d/2). Agrees bit-for-bit with gal_log_kernel at lambda = 1.
inline double al_log_kernel(const GalKernelInputs& in) {
  detail::check_kernel_inputs(in);
  if (in.lambda != 1.0) throw DomainError("al_log_kernel: lambda must be 1");
  const double d = static_cast<double>(in.total_dim);
  const double nu = 1.0 - 0.5 * d;
  const double a = 2.0 + in.q_m;
  const double base = std::numbers::ln2 + in.s_xm - 0.5 * d * std::log(2.0 * std::numbers::pi) -
                      0.5 * in.logdet;
  const double z = std::sqrt(a * in.q_x);
  if (z > 0.0) {
    return base + 0.5 * nu * (std::log(in.q_x) - std::log(a)) + special::log_bessel_k(nu, z);
  }
  // Finite only for d = 1.
  if (nu > 0.0) {
    return base + special::log_gamma(nu) + (nu - 1.0) * std::numbers::ln2 - nu * std::log(a);
  }
  return std::numeric_limits<double>::infinity();
}

inline GalKernelInputs kernel_inputs(const MgalParams& p, const Matrix& x) {
  const Matrix xr = p.reduce(x);
  GalKernelInputs in;
  in.q_x = xr.squaredNorm();
  in.q_m = p.location_form();
  in.s_xm = xr.cwiseProduct(p.reduced_location()).sum();
  in.logdet = p.logdet();
  in.total_dim = p.total_dim();
  in.lambda = p.lambda();
  return in;
}

inline GalKernelInputs kernel_inputs(const TgalParams& p, const DenseTensor& x) {
  if (x.dims() != p.dims()) throw ShapeError("TgalParams: argument dims do not match");
  const DenseTensor xw = whiten(x, p.sigmas());
  GalKernelInputs in;
  in.q_x = xw.data().squaredNorm();
  in.q_m = p.location_form();
  in.s_xm = xw.data().dot(p.whitened_location().data());
  in.logdet = p.logdet();
  in.total_dim = p.total_dim();
  in.lambda = p.lambda();
  return in;
}

/// Log-density of MGAL at x; +infinity at the singular point of the
/// symmetric core when 2 lambda <= kn.
inline double log_pdf_mgal(const MgalParams& p, const Matrix& x) {
  return gal_log_kernel(kernel_inputs(p, x));
}

/// Log-density of MAL; requires lambda = 1.
inline double log_pdf_mal(const MgalParams& p, const Matrix& x) {
  return al_log_kernel(kernel_inputs(p, x));
}

inline double log_pdf_tgal(const TgalParams& p, const DenseTensor& x) {
  return gal_log_kernel(kernel_inputs(p, x));
}

inline double log_pdf_tal(const TgalParams& p, const DenseTensor& x) {
  return al_log_kernel(kernel_inputs(p, x));
}

/// Log-density at a point given in vec order.
inline double log_pdf(const Params& p, const Vector& x) {
  return std::visit(
      [&](const auto& q) -> double {
        if (static_cast<std::size_t>(x.size()) != q.total_dim()) {
          throw ShapeError("log_pdf: point has " + std::to_string(x.size()) +
                           " entries, expected " + std::to_string(q.total_dim()));
        }
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, MgalParams>) {
          const Eigen::Map<const Matrix> xm(x.data(), static_cast<Eigen::Index>(q.rows()),
                                            static_cast<Eigen::Index>(q.cols()));
          return log_pdf_mgal(q, xm);
        } else {
          return log_pdf_tgal(q, DenseTensor(q.dims(), x));
        }
      },
      p);
}

// ---------------------------------------------------------------------------
// Characteristic function

using Complex = std::complex<double>;

namespace detail {

// (1 + q_t/2 - i s)^{-lambda}. The base has real part >= 1, so the principal
// logarithm never meets its branch cut.
inline Complex gal_cf_from_base(Complex base, double lambda) {
  if (lambda == 1.0) return 1.0 / base;
  return std::exp(-lambda * std::log(base));
}

inline Complex mgal_cf_base(const MgalParams& p, const Matrix& t) {
  if (t.rows() != p.location().rows() || t.cols() != p.location().cols()) {
    throw ShapeError("cf: frequency matrix has the wrong shape");
  }
  // tr(Psi T^T Sigma T) = || L_Sigma^T T L_Psi ||_F^2
  const Matrix c = p.sigma().factor().matrix().transpose().triangularView<Eigen::Upper>() * t *
                   p.psi().factor().matrix().triangularView<Eigen::Lower>();
  const double q_t = c.squaredNorm();
  const double s = p.location().cwiseProduct(t).sum();
  return {1.0 + 0.5 * q_t, -s};
}

inline Complex tgal_cf_base(const TgalParams& p, const DenseTensor& t) {
  if (t.dims() != p.dims()) throw ShapeError("cf: frequency tensor dims do not match");
  const double q_t = color_transpose(t, p.sigmas()).data().squaredNorm();
  const double s = p.location().data().dot(t.data());
  return {1.0 + 0.5 * q_t, -s};
}

}  // namespace detail

/// phi(T) = (1 + tr(Psi T^T Sigma T)/2 - i tr(M^T T))^{-lambda}.
inline Complex cf_mgal(const MgalParams& p, const Matrix& t) {
  return detail::gal_cf_from_base(detail::mgal_cf_base(p, t), p.lambda());
}

/// phi(T) = 1 / (1 + tr(Psi T^T Sigma T)/2 - i tr(M^T T)); requires lambda = 1.
inline Complex cf_mal(const MgalParams& p, const Matrix& t) {
  if (p.lambda() != 1.0) throw DomainError("cf_mal: lambda must be 1");
  return 1.0 / detail::mgal_cf_base(p, t);
}

inline Complex cf_tgal(const TgalParams& p, const DenseTensor& t) {
  return detail::gal_cf_from_base(detail::tgal_cf_base(p, t), p.lambda());
}

inline Complex cf_tal(const TgalParams& p, const DenseTensor& t) {
  if (p.lambda() != 1.0) throw DomainError("cf_tal: lambda must be 1");
  return 1.0 / detail::tgal_cf_base(p, t);
}

/// CF at a frequency given in vec order.
inline Complex cf(const Params& p, const Vector& t) {
  return std::visit(
      [&](const auto& q) -> Complex {
        if (static_cast<std::size_t>(t.size()) != q.total_dim()) {
          throw ShapeError("cf: frequency has the wrong length");
        }
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, MgalParams>) {
          const Eigen::Map<const Matrix> tm(t.data(), static_cast<Eigen::Index>(q.rows()),
                                            static_cast<Eigen::Index>(q.cols()));
          return cf_mgal(q, tm);
        } else {
          return cf_tgal(q, DenseTensor(q.dims(), t));
        }
      },
      p);
}

/// (vec T)^T Cov_core (vec T), the Gaussian-core quadratic form entering the CF.
inline double cf_quadratic_form(const Params& p, const Vector& t) {
  const Complex base = std::visit(
      [&](const auto& q) -> Complex {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, MgalParams>) {
          const Eigen::Map<const Matrix> tm(t.data(), static_cast<Eigen::Index>(q.rows()),
                                            static_cast<Eigen::Index>(q.cols()));
          return detail::mgal_cf_base(q, tm);
        } else {
          return detail::tgal_cf_base(q, DenseTensor(q.dims(), t));
        }
      },
      p);
  return 2.0 * (base.real() - 1.0);
}

// ---------------------------------------------------------------------------
// Sampling

/// Seeded draws, one per column in vec order.
struct SampleBatch {
  DenseTensor::Dims dims;
  Matrix draws;  // total_dim x count
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::string param_digest;

  std::size_t count() const { return static_cast<std::size_t>(draws.cols()); }
  std::size_t total_dim() const { return static_cast<std::size_t>(draws.rows()); }
};

namespace detail {

class Fnv1a {
 public:
  void add(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= b[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void add(double v) { add(&v, sizeof v); }
  void add(std::uint64_t v) { add(&v, sizeof v); }
  void add(const Matrix& m) {
    add(static_cast<std::uint64_t>(m.rows()));
    add(static_cast<std::uint64_t>(m.cols()));
    add(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace detail

/// Stable 64-bit FNV-1a digest of the parameter values, as 16 hex digits.
inline std::string param_digest(const Params& p) {
  detail::Fnv1a h;
  std::visit(
      [&](const auto& q) {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, MgalParams>) {
          h.add(std::uint64_t{2});
          h.add(q.location());
          h.add(q.sigma().matrix());
          h.add(q.psi().matrix());
        } else {
          h.add(static_cast<std::uint64_t>(q.order()));
          h.add(vec(q.location()));
          for (const auto& s : q.sigmas()) h.add(s.matrix());
        }
        h.add(q.lambda());
      },
      p);
  return detail::hex64(h.value());
}

/// One draw M w + sqrt(w) Z, Z ~ MN(0, Sigma, Psi), w ~ Gamma(lambda, 1).
inline Matrix draw_mgal(const MgalParams& p, RngStream& rng) {
  const double w = sample_gamma(p.lambda(), rng);
  const Matrix zero = Matrix::Zero(p.location().rows(), p.location().cols());
  const Matrix z = sample_matrix_normal(zero, p.sigma(), p.psi(), rng);
  return p.location() * w + std::sqrt(w) * z;
}

inline DenseTensor draw_tgal(const TgalParams& p, RngStream& rng) {
  const double w = sample_gamma(p.lambda(), rng);
  DenseTensor z = sample_tensor_normal(DenseTensor(p.dims()), p.sigmas(), rng);
  z.data() = p.location().data() * w + std::sqrt(w) * z.data();
  return z;
}

inline SampleBatch sample_mgal(const MgalParams& p, std::size_t count, RngStream& rng) {
  if (count < 1) throw DomainError("sample_mgal: count must be positive");
  SampleBatch b{p.dims(), Matrix(static_cast<Eigen::Index>(p.total_dim()),
                                 static_cast<Eigen::Index>(count)),
                rng.seed(), rng.stream_id(), param_digest(p)};
  for (std::size_t j = 0; j < count; ++j) b.draws.col(static_cast<Eigen::Index>(j)) = vec(draw_mgal(p, rng));
  return b;
}

inline SampleBatch sample_tgal(const TgalParams& p, std::size_t count, RngStream& rng) {
  if (count < 1) throw DomainError("sample_tgal: count must be positive");
  SampleBatch b{p.dims(), Matrix(static_cast<Eigen::Index>(p.total_dim()),
                                 static_cast<Eigen::Index>(count)),
                rng.seed(), rng.stream_id(), param_digest(p)};
  for (std::size_t j = 0; j < count; ++j) b.draws.col(static_cast<Eigen::Index>(j)) = draw_tgal(p, rng).data();
  return b;
}

/// Draws per stream in sample_sharded().
inline constexpr std::size_t kShardSize = 4096;

/// Sharded sampling: draws [j * kShardSize, (j+1) * kShardSize) come from
/// RngStream(seed, j). The result depends only on (p, count, seed), never
/// on `threads`.
inline SampleBatch sample_sharded(const Params& p, std::size_t count, std::uint64_t seed,
                                  unsigned threads = 0) {
  if (count < 1) throw DomainError("sample: count must be positive");
  const std::size_t shards = (count + kShardSize - 1) / kShardSize;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, shards));

  SampleBatch b{dims_of(p),
                Matrix(static_cast<Eigen::Index>(total_dim(p)), static_cast<Eigen::Index>(count)),
                seed, 0, param_digest(p)};
  auto run_shard = [&](std::size_t shard) {
    RngStream rng(seed, shard);
    const std::size_t begin = shard * kShardSize;
    const std::size_t end = std::min(count, begin + kShardSize);
    for (std::size_t j = begin; j < end; ++j) {
      const auto col = static_cast<Eigen::Index>(j);
      std::visit(
          [&](const auto& q) {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, MgalParams>) {
              b.draws.col(col) = vec(draw_mgal(q, rng));
            } else {
              b.draws.col(col) = draw_tgal(q, rng).data();
            }
          },
          p);
    }
  };
  if (threads <= 1) {
    for (std::size_t s = 0; s < shards; ++s) run_shard(s);
    return b;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t s = t; s < shards; s += threads) run_shard(s);
    });
  }
  pool.clear();
  return b;
}

// ---------------------------------------------------------------------------
// Moments

struct Moments {
  Vector mean;  // vec order
  Matrix cov;   // total_dim x total_dim
};

/// E[X] = lambda M.
inline Matrix mean_mgal(const MgalParams& p) { return p.lambda() * p.location(); }

inline DenseTensor mean_tgal(const TgalParams& p) {
  return DenseTensor(p.dims(), Vector(p.lambda() * p.location().data()));
}

/// Cov(vec X) = lambda (Psi (x) Sigma + vec M vec M^T), materialized.
inline Matrix covariance_mgal(const MgalParams& p, std::size_t cap = kCovarianceCap) {
  if (p.total_dim() > cap) {
    throw UnsupportedError("covariance_mgal: dimension exceeds the materialization cap; use "
                           "covariance_action");
  }
  const Matrix factors[] = {p.sigma().matrix(), p.psi().matrix()};
  const Vector m = vec(p.location());
  return p.lambda() * (detail::kron_dense(factors) + m * m.transpose());
}

inline Matrix covariance_tgal(const TgalParams& p, std::size_t cap = kCovarianceCap) {
  if (p.total_dim() > cap) {
    throw UnsupportedError("covariance_tgal: dimension exceeds the materialization cap; use "
                           "covariance_action");
  }
  std::vector<Matrix> factors;
  for (const auto& s : p.sigmas()) factors.push_back(s.matrix());
  const Vector& m = p.location().data();
  return p.lambda() * (detail::kron_dense(factors) + m * m.transpose());
}

inline Moments moments_mgal(const MgalParams& p, std::size_t cap = kCovarianceCap) {
  return {vec(mean_mgal(p)), covariance_mgal(p, cap)};
}

inline Moments moments_tgal(const TgalParams& p, std::size_t cap = kCovarianceCap) {
  return {mean_tgal(p).data(), covariance_tgal(p, cap)};
}

/// v -> Cov(vec X) v without materializing the covariance.
inline Vector covariance_action(const MgalParams& p, const Vector& v) {
  if (static_cast<std::size_t>(v.size()) != p.total_dim()) {
    throw ShapeError("covariance_action: vector length mismatch");
  }
  const Eigen::Map<const Matrix> vm(v.data(), p.location().rows(), p.location().cols());
  const Matrix core = p.sigma().matrix() * vm * p.psi().matrix();  // (Psi (x) Sigma) vec V
  const Vector m = vec(p.location());
  return p.lambda() * (vec(core) + m * m.dot(v));
}

inline Vector covariance_action(const TgalParams& p, const Vector& v) {
  if (static_cast<std::size_t>(v.size()) != p.total_dim()) {
    throw ShapeError("covariance_action: vector length mismatch");
  }
  DenseTensor t(p.dims(), v);
  for (std::size_t i = 0; i < p.order(); ++i) t = mode_multiply(t, p.sigmas()[i].matrix(), i);
  const Vector& m = p.location().data();
  return p.lambda() * (t.data() + m * m.dot(v));
}

// ---------------------------------------------------------------------------
// Affine transforms

/// Law of D X C for X ~ MGAL(M, Sigma, Psi, lambda), D m x k, C n x q:
/// MGAL(D M C, D Sigma D^T, C^T Psi C, lambda). Requires m <= k, q <= n and
/// full rank; otherwise the transformed scales are singular and
/// NotPositiveDefiniteError is thrown.
inline MgalParams transform_mgal(const MgalParams& p, const Matrix& d, const Matrix& c) {
  const auto k = static_cast<Eigen::Index>(p.rows());
  const auto n = static_cast<Eigen::Index>(p.cols());
  if (d.cols() != k || c.rows() != n) {
    throw ShapeError("transform_mgal: D must have " + std::to_string(k) +
                     " columns and C must have " + std::to_string(n) + " rows");
  }
  if (d.rows() < 1 || c.cols() < 1) throw ShapeError("transform_mgal: empty transform");
  if (d.rows() > k) throw NotPositiveDefiniteError("transform_mgal: D has more rows than columns");
  if (c.cols() > n) throw NotPositiveDefiniteError("transform_mgal: C has more columns than rows");
  Matrix sigma = d * p.sigma().matrix() * d.transpose();
  Matrix psi = c.transpose() * p.psi().matrix() * c;
  // Exact symmetry; the products differ from their transposes only by rounding.
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  psi = 0.5 * (psi + psi.transpose()).eval();
  return MgalParams(d * p.location() * c, SpdMatrix(sigma), SpdMatrix(psi), p.lambda());
}

/// D X with C = I.
inline MgalParams transform_mgal_left(const MgalParams& p, const Matrix& d) {
  const auto n = static_cast<Eigen::Index>(p.cols());
  return transform_mgal(p, d, Matrix::Identity(n, n));
}

/// X C with D = I.
inline MgalParams transform_mgal_right(const MgalParams& p, const Matrix& c) {
  const auto k = static_cast<Eigen::Index>(p.rows());
  return transform_mgal(p, Matrix::Identity(k, k), c);
}

}  // namespace matgal
