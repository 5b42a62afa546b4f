// SPDX-License-Identifier: Apache-2.0
// A 2x3 MGAL law: density, characteristic function, sampling and the
// moments of a row-selected submatrix.

#include <cstdio>

#include "matgal/matgal.hpp"

int main() {
  using namespace matgal;

  Matrix m(2, 3);
  m << 0.5, -0.2, 0.0,
       0.1, 0.3, -0.4;
  Matrix sigma(2, 2);
  sigma << 1.0, 0.3,
           0.3, 2.0;
  Matrix psi(3, 3);
  psi << 1.5, -0.4, 0.0,
         -0.4, 0.8, 0.1,
         0.0, 0.1, 1.0;
  const MgalParams p(m, SpdMatrix(sigma), SpdMatrix(psi), 1.5);

  const Matrix x = Matrix::Constant(2, 3, 0.25);
  std::printf("log f(X)          = %.10f\n", log_pdf_mgal(p, x));
  const Complex phi = cf_mgal(p, x);
  std::printf("phi(T = X)        = %.10f %+.10fi\n", phi.real(), phi.imag());

  RngStream rng(2024);
  const SampleBatch b = sample_mgal(p, 50'000, rng);
  const Vector mean = b.draws.rowwise().mean();
  std::printf("E[X11] analytic   = %.4f, sample = %.4f\n", mean_mgal(p)(0, 0), mean[0]);

  // First row of X is again MGAL, over 1x3.
  Matrix d(1, 2);
  d << 1.0, 0.0;
  const MgalParams row = transform_mgal_left(p, d);
  const Matrix cov = covariance_mgal(row);
  std::printf("Var[X11] analytic = %.4f (row law), %.4f (full law)\n", cov(0, 0), covariance_mgal(p)(0, 0));
  return 0;
}
