// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include "matgal/error.hpp"
#include "matgal/kron_linalg.hpp"

namespace matgal {

/// Reproducible random stream keyed by (seed, stream_id).
///
/// The pair is expanded through std::seed_seq into the state of a 64-bit
/// Mersenne Twister, so distinct stream ids give unrelated sequences and a
/// batch can be sharded across threads by giving each shard its own id.
/// A stream is not thread-safe; share it only under external locking.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) : seed_(seed), stream_id_(stream_id) {
    reset();
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Rewinds to the start of the sequence.
  void reset() {
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(stream_id_),
                      static_cast<std::uint32_t>(stream_id_ >> 32)};
    engine_.seed(seq);
    normal_.reset();
  }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() { return normal_(engine_); }

  std::uint64_t bits() { return engine_(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Scalar mixing law of the mixture representation: Gamma(lambda, 1), of
/// which the unit exponential is the lambda = 1 case.
struct MixingLaw {
  enum class Kind { exponential_unit, gamma };

  Kind kind = Kind::exponential_unit;
  double lambda = 1.0;

  static MixingLaw exponential() { return {Kind::exponential_unit, 1.0}; }
  static MixingLaw gamma(double shape) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
      throw DomainError("MixingLaw: shape must be positive and finite");
    }
    return {Kind::gamma, shape};
  }

  double shape() const { return kind == Kind::exponential_unit ? 1.0 : lambda; }
};

/// One draw from Gamma(shape = lambda, scale = 1).
///
/// Marsaglia-Tsang squeeze/rejection for lambda >= 1; smaller shapes use
/// Gamma(lambda + 1) * U^(1/lambda).
inline double sample_gamma(double lambda, RngStream& rng) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("sample_gamma: shape must be positive and finite");
  }
  if (lambda < 1.0) {
    const double g = sample_gamma(lambda + 1.0, rng);
    return g * std::exp(std::log(rng.uniform()) / lambda);
  }
  const double d = lambda - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

inline double sample_mixing(const MixingLaw& law, RngStream& rng) {
  return sample_gamma(law.shape(), rng);
}

/// i.i.d. standard normal matrix, filled in column-major order.
inline Matrix standard_normal_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  Matrix z(rows, cols);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
  return z;
}

/// M + L_Sigma Z L_Psi^T with Z standard normal; vec of the result is
/// N(vec M, Psi (x) Sigma).
inline Matrix sample_matrix_normal(const Matrix& m, const SpdMatrix& sigma, const SpdMatrix& psi,
                                   RngStream& rng) {
  const auto k = static_cast<Eigen::Index>(sigma.dim());
  const auto n = static_cast<Eigen::Index>(psi.dim());
  if (m.rows() != k || m.cols() != n) {
    throw ShapeError("sample_matrix_normal: location is not " + std::to_string(k) + "x" +
                     std::to_string(n));
  }
  const Matrix z = standard_normal_matrix(k, n, rng);
  return m + sigma.factor().matrix().triangularView<Eigen::Lower>() * z *
                 psi.factor().matrix().transpose().triangularView<Eigen::Upper>();
}

/// m + Z x_1 L_1 ... x_D L_D with Z a standard normal tensor (filled in
/// layout order); vec of the result is N(vec m, Sigma_D (x) ... (x) Sigma_1).
inline DenseTensor sample_tensor_normal(const DenseTensor& m, std::span<const SpdMatrix> sigmas,
                                        RngStream& rng) {
  detail::check_scales(m.dims(), sigmas);
  DenseTensor z(m.dims());
  for (Eigen::Index i = 0; i < z.data().size(); ++i) z.data()[i] = rng.normal();
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    z = mode_multiply(z, sigmas[i].factor().matrix(), i);
  }
  z.data() += m.data();
  return z;
}

}  // namespace matgal
