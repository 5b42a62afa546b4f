// SPDX-License-Identifier: Apache-2.0
#pragma once

// Kronecker-structured linear algebra.
//
// Layout convention used throughout the library: a tensor with dims
// (n_1, ..., n_D) is linearized with the mode-1 index fastest, so for D = 2
// vec() is ordinary column stacking. Under this layout the covariance of a
// tensor whose mode-i scale is Sigma_i is
//
//     Sigma_D (x) ... (x) Sigma_2 (x) Sigma_1,
//
// which for matrices (Sigma_1 = Sigma, Sigma_2 = Psi) is the familiar
// Psi (x) Sigma. Every routine here works mode by mode and never forms the
// n* x n* product; materialize_kron() exists only for small test oracles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "matgal/error.hpp"

namespace matgal {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Largest n* that materialize_kron() will expand.
inline constexpr std::size_t kMaterializeLimit = 64;

/// Lower-triangular factor with a strictly positive diagonal.
class LowerTriangular {
 public:
  explicit LowerTriangular(Matrix l) : l_(std::move(l)) {
    if (l_.rows() != l_.cols() || l_.rows() == 0) {
      throw ShapeError("LowerTriangular: factor must be square and non-empty");
    }
    for (Eigen::Index j = 0; j < l_.cols(); ++j) {
      if (!(l_(j, j) > 0.0)) {
        throw NotPositiveDefiniteError("LowerTriangular: non-positive diagonal");
      }
      for (Eigen::Index i = 0; i < j; ++i) {
        if (l_(i, j) != 0.0) {
          throw DomainError("LowerTriangular: entries above the diagonal");
        }
      }
    }
  }

  std::size_t dim() const { return static_cast<std::size_t>(l_.rows()); }
  const Matrix& matrix() const { return l_; }

  /// ln det(L L^T).
  double log_det_product() const {
    return 2.0 * l_.diagonal().array().log().sum();
  }

 private:
  Matrix l_;
};

/// Cholesky factorization of a symmetric matrix (only the lower triangle is
/// read). A pivot is rejected when it does not exceed
/// 16 * dim * eps * max(diag), which also catches numerically singular
/// inputs such as D Sigma D^T with rank-deficient D.
inline LowerTriangular cholesky_factor(const Matrix& s) {
  if (s.rows() != s.cols() || s.rows() == 0) {
    throw ShapeError("cholesky_factor: matrix must be square and non-empty");
  }
  const Eigen::Index n = s.rows();
  const double max_diag = s.diagonal().maxCoeff();
  if (!(max_diag > 0.0) || !std::isfinite(max_diag)) {
    throw NotPositiveDefiniteError("cholesky_factor: non-positive diagonal");
  }
  const double floor = 16.0 * static_cast<double>(n) *
                       std::numeric_limits<double>::epsilon() * max_diag;
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = s(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > floor)) {
      throw NotPositiveDefiniteError("cholesky_factor: non-positive pivot at index " +
                                     std::to_string(j));
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }
  return LowerTriangular(std::move(l));
}

/// Symmetric positive-definite matrix with its Cholesky factor computed at
/// construction. Immutable afterwards.
class SpdMatrix {
 public:
  /// Relative asymmetry tolerated before the input is rejected; accepted
  /// inputs are replaced by (S + S^T) / 2.
  static constexpr double kSymmetryTolerance = 1e-12;

  explicit SpdMatrix(const Matrix& s) : s_(symmetrized(s)), chol_(cholesky_factor(s_)) {}

  static SpdMatrix identity(std::size_t n) {
    const auto m = static_cast<Eigen::Index>(n);
    return SpdMatrix(Matrix::Identity(m, m));
  }

  std::size_t dim() const { return static_cast<std::size_t>(s_.rows()); }
  const Matrix& matrix() const { return s_; }
  const LowerTriangular& factor() const { return chol_; }
  double log_det() const { return chol_.log_det_product(); }

 private:
  static Matrix symmetrized(const Matrix& s) {
    if (s.rows() != s.cols() || s.rows() == 0) {
      throw ShapeError("SpdMatrix: matrix must be square and non-empty");
    }
    if (!s.allFinite()) throw DomainError("SpdMatrix: non-finite entry");
    const double scale = s.cwiseAbs().maxCoeff();
    const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTolerance * scale) {
      throw NotPositiveDefiniteError("SpdMatrix: matrix is not symmetric");
    }
    return 0.5 * (s + s.transpose());
  }

  Matrix s_;
  LowerTriangular chol_;
};

/// Order-D real array, mode-1 index fastest.
class DenseTensor {
 public:
  using Dims = std::vector<std::size_t>;

  explicit DenseTensor(Dims dims) : dims_(std::move(dims)) {
    data_ = Vector::Zero(static_cast<Eigen::Index>(checked_size(dims_)));
  }

  DenseTensor(Dims dims, Vector data) : dims_(std::move(dims)), data_(std::move(data)) {
    if (static_cast<std::size_t>(data_.size()) != checked_size(dims_)) {
      throw ShapeError("DenseTensor: data length does not match dims");
    }
  }

  DenseTensor(Dims dims, const std::vector<double>& data)
      : DenseTensor(std::move(dims),
                    Vector(Eigen::Map<const Vector>(data.data(),
                                                    static_cast<Eigen::Index>(data.size())))) {}

  /// Order-2 tensor holding a matrix; its vec is the column stacking.
  static DenseTensor from_matrix(const Matrix& m) {
    Vector flat = Eigen::Map<const Vector>(m.data(), m.size());
    return DenseTensor({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())},
                       std::move(flat));
  }

  Matrix to_matrix() const {
    if (dims_.size() != 2) throw ShapeError("DenseTensor::to_matrix: order is not 2");
    return Eigen::Map<const Matrix>(data_.data(), static_cast<Eigen::Index>(dims_[0]),
                                    static_cast<Eigen::Index>(dims_[1]));
  }

  std::size_t order() const { return dims_.size(); }
  const Dims& dims() const { return dims_; }
  std::size_t size() const { return static_cast<std::size_t>(data_.size()); }
  const Vector& data() const { return data_; }
  Vector& data() { return data_; }

  /// Linear offset of a multi-index (0-based).
  std::size_t offset(std::span<const std::size_t> index) const {
    if (index.size() != dims_.size()) throw ShapeError("DenseTensor: index order mismatch");
    std::size_t off = 0;
    std::size_t stride = 1;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      if (index[i] >= dims_[i]) throw ShapeError("DenseTensor: index out of range");
      off += index[i] * stride;
      stride *= dims_[i];
    }
    return off;
  }

  double operator()(std::initializer_list<std::size_t> index) const {
    return data_[static_cast<Eigen::Index>(offset({index.begin(), index.size()}))];
  }
  double& operator()(std::initializer_list<std::size_t> index) {
    return data_[static_cast<Eigen::Index>(offset({index.begin(), index.size()}))];
  }

 private:
  static std::size_t checked_size(const Dims& dims) {
    if (dims.empty()) throw ShapeError("DenseTensor: order must be at least 1");
    std::size_t n = 1;
    for (std::size_t d : dims) {
      if (d == 0) throw ShapeError("DenseTensor: zero-length dimension");
      n *= d;
    }
    return n;
  }

  Dims dims_;
  Vector data_;
};

/// Product of the dimension list.
inline std::size_t total_size(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

inline Vector vec(const DenseTensor& x) { return x.data(); }

inline Vector vec(const Matrix& x) { return Eigen::Map<const Vector>(x.data(), x.size()); }

namespace detail {

// Applies `op` to every mode-`mode` unfolding slice. The data is viewed as a
// column-major [left, n_mode, right] block; slice r is a left x n_mode matrix
// whose columns are indexed by the mode.
struct ModeSplit {
  Eigen::Index left = 1;
  Eigen::Index len = 1;
  Eigen::Index right = 1;
};

inline ModeSplit split_at(const DenseTensor::Dims& dims, std::size_t mode) {
  if (mode >= dims.size()) throw ShapeError("mode index out of range");
  ModeSplit s;
  for (std::size_t i = 0; i < mode; ++i) s.left *= static_cast<Eigen::Index>(dims[i]);
  s.len = static_cast<Eigen::Index>(dims[mode]);
  for (std::size_t i = mode + 1; i < dims.size(); ++i) s.right *= static_cast<Eigen::Index>(dims[i]);
  return s;
}

// x <- x x_mode L^{-1}
inline void mode_solve_lower_inplace(DenseTensor& x, const LowerTriangular& l, std::size_t mode) {
  const ModeSplit s = split_at(x.dims(), mode);
  if (static_cast<Eigen::Index>(l.dim()) != s.len) throw ShapeError("mode_solve: factor size mismatch");
  const auto upper = l.matrix().transpose().triangularView<Eigen::Upper>();
  for (Eigen::Index r = 0; r < s.right; ++r) {
    Eigen::Map<Matrix> slice(x.data().data() + r * s.left * s.len, s.left, s.len);
    // slice * L^T = old slice
    upper.solveInPlace<Eigen::OnTheRight>(slice);
  }
}

// x <- x x_mode L^T
inline void mode_multiply_lower_transpose_inplace(DenseTensor& x, const LowerTriangular& l,
                                                  std::size_t mode) {
  const ModeSplit s = split_at(x.dims(), mode);
  if (static_cast<Eigen::Index>(l.dim()) != s.len) throw ShapeError("mode_multiply: factor size mismatch");
  for (Eigen::Index r = 0; r < s.right; ++r) {
    Eigen::Map<Matrix> slice(x.data().data() + r * s.left * s.len, s.left, s.len);
    slice = (slice * l.matrix().triangularView<Eigen::Lower>()).eval();
  }
}

inline void check_scales(const DenseTensor::Dims& dims, std::span<const SpdMatrix> sigmas) {
  if (sigmas.size() != dims.size()) throw ShapeError("scale list length does not match tensor order");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (sigmas[i].dim() != dims[i]) {
      throw ShapeError("scale " + std::to_string(i) + " does not match dimension " +
                       std::to_string(dims[i]));
    }
  }
}

}  // namespace detail

/// Mode-`mode` product (0-based mode): every mode fiber f is replaced by m f.
/// Applying A_i on each mode realizes (A_D (x) ... (x) A_1) vec x.
inline DenseTensor mode_multiply(const DenseTensor& x, const Matrix& m, std::size_t mode) {
  const detail::ModeSplit s = detail::split_at(x.dims(), mode);
  if (m.cols() != s.len) throw ShapeError("mode_multiply: matrix columns do not match mode length");
  if (m.rows() == 0) throw ShapeError("mode_multiply: matrix has no rows");
  DenseTensor::Dims out_dims = x.dims();
  out_dims[mode] = static_cast<std::size_t>(m.rows());
  DenseTensor out(out_dims);
  const Eigen::Index p = m.rows();
  for (Eigen::Index r = 0; r < s.right; ++r) {
    Eigen::Map<const Matrix> in(x.data().data() + r * s.left * s.len, s.left, s.len);
    Eigen::Map<Matrix> res(out.data().data() + r * s.left * p, s.left, p);
    res.noalias() = in * m.transpose();
  }
  return out;
}

/// x x_1 L_1^{-1} ... x_D L_D^{-1}; its squared norm is the quadratic form
/// of x under (Sigma_D (x) ... (x) Sigma_1)^{-1}.
inline DenseTensor whiten(DenseTensor x, std::span<const SpdMatrix> sigmas) {
  detail::check_scales(x.dims(), sigmas);
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    detail::mode_solve_lower_inplace(x, sigmas[i].factor(), i);
  }
  return x;
}

/// x x_1 L_1^T ... x_D L_D^T; its squared norm is the quadratic form of x
/// under Sigma_D (x) ... (x) Sigma_1 itself.
inline DenseTensor color_transpose(DenseTensor x, std::span<const SpdMatrix> sigmas) {
  detail::check_scales(x.dims(), sigmas);
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    detail::mode_multiply_lower_transpose_inplace(x, sigmas[i].factor(), i);
  }
  return x;
}

/// tr(Psi^{-1} A^T Sigma^{-1} B) = vec(A)^T (Psi (x) Sigma)^{-1} vec(B).
inline double trace_quadratic_form(const SpdMatrix& psi, const SpdMatrix& sigma, const Matrix& a,
                                   const Matrix& b) {
  const auto k = static_cast<Eigen::Index>(sigma.dim());
  const auto n = static_cast<Eigen::Index>(psi.dim());
  if (a.rows() != k || a.cols() != n || b.rows() != k || b.cols() != n) {
    throw ShapeError("trace_quadratic_form: operands must be " + std::to_string(k) + "x" +
                     std::to_string(n));
  }
  const auto ls = sigma.factor().matrix().triangularView<Eigen::Lower>();
  const auto lp_t = psi.factor().matrix().transpose().triangularView<Eigen::Upper>();
  auto reduce = [&](const Matrix& x) {
    Matrix y = ls.solve(x);            // L_S^{-1} X
    lp_t.solveInPlace<Eigen::OnTheRight>(y);  // ... L_P^{-T}
    return y;
  };
  if (&a == &b) {
    return reduce(a).squaredNorm();
  }
  return reduce(a).cwiseProduct(reduce(b)).sum();
}

/// (vec x)^T (Sigma_D (x) ... (x) Sigma_1)^{-1} (vec y) by mode-wise
/// triangular solves. sigmas[i] is the scale of mode i.
inline double tensor_quadratic_form(const DenseTensor& x, const DenseTensor& y,
                                    std::span<const SpdMatrix> sigmas) {
  if (x.dims() != y.dims()) throw ShapeError("tensor_quadratic_form: operand dims differ");
  const DenseTensor wx = whiten(x, sigmas);
  if (&x == &y) return wx.data().squaredNorm();
  return wx.data().dot(whiten(y, sigmas).data());
}

/// ln det(Sigma_D (x) ... (x) Sigma_1) = sum_i (n*/n_i) ln det Sigma_i.
inline double kron_logdet(std::span<const SpdMatrix> sigmas, std::span<const std::size_t> dims) {
  if (sigmas.size() != dims.size()) throw ShapeError("kron_logdet: list lengths differ");
  const std::size_t n_total = total_size(dims);
  double acc = 0.0;
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (sigmas[i].dim() != dims[i]) throw ShapeError("kron_logdet: scale/dimension mismatch");
    acc += static_cast<double>(n_total / dims[i]) * sigmas[i].log_det();
  }
  return acc;
}

inline double kron_logdet(std::span<const SpdMatrix> sigmas) {
  std::vector<std::size_t> dims;
  for (const auto& s : sigmas) dims.push_back(s.dim());
  return kron_logdet(sigmas, dims);
}

/// Explicit F_D (x) ... (x) F_1 for factors listed in mode order. Both the
/// row and column products are limited to kMaterializeLimit.
inline Matrix kron_product(std::span<const Matrix> factors) {
  if (factors.empty()) throw ShapeError("kron_product: empty factor list");
  std::size_t rows = 1;
  std::size_t cols = 1;
  for (const auto& f : factors) {
    rows *= static_cast<std::size_t>(f.rows());
    cols *= static_cast<std::size_t>(f.cols());
  }
  if (rows > kMaterializeLimit || cols > kMaterializeLimit) {
    throw UnsupportedError("kron_product: product exceeds materialization limit");
  }
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

/// Explicit Sigma_D (x) ... (x) Sigma_1. Small-instance oracle only.
inline SpdMatrix materialize_kron(std::span<const SpdMatrix> sigmas) {
  std::vector<Matrix> factors;
  factors.reserve(sigmas.size());
  for (const auto& s : sigmas) factors.push_back(s.matrix());
  return SpdMatrix(kron_product(factors));
}

}  // namespace matgal
