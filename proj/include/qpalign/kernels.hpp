#pragma once

// Dense n x n kernels behind the solver and the projections.
//
// Every kernel exists twice: `serial` is the plain reference loop nest and
// `parallel` distributes the same loop nest over OpenMP threads. Each output
// entry (and each row partial of a reduction) is accumulated by exactly one
// thread in the same order as the serial loop, so the two variants agree
// bit-for-bit and results do not depend on the thread count.

#include <span>

#include "qpalign/matrix.hpp"

namespace qpalign::kernels {

#define QPALIGN_KERNEL_DECLS                                                          \
  /* e = a1 * p - p * a2 */                                                           \
  void commutator(const Matrix& a1, const Matrix& p, const Matrix& a2, Matrix& e);    \
  /* out = scale * (a1^T * e - e * a2^T) */                                           \
  void commutator_adjoint(const Matrix& a1, const Matrix& e, const Matrix& a2,        \
                          double scale, Matrix& out);                                 \
  /* out = x * y^T */                                                                 \
  void multiply_transposed(const Matrix& x, const Matrix& y, Matrix& out);            \
  /* out(k, j) = ||x_k - y_j||^2 */                                                   \
  void feature_distance(const Matrix& x, const Matrix& y, Matrix& out);               \
  /* g += feat_scale * (d o p) + mu * (J - 2p) */                                     \
  void add_local_terms(const Matrix& d, const Matrix& p, double feat_scale, double mu, \
                       Matrix& g);                                                    \
  /* y += a * x */                                                                    \
  void axpy(double a, const Matrix& x, Matrix& y);                                    \
  void truncate_nonneg(Matrix& m);                                                    \
  void add_constant(Matrix& m, double c);                                             \
  void row_sums(const Matrix& m, std::span<double> out);                              \
  void col_sums(const Matrix& m, std::span<double> out);                              \
  /* m(i, j) *= s[i] */                                                               \
  void scale_rows(Matrix& m, std::span<const double> s);                              \
  /* m(i, j) *= s[j] */                                                               \
  void scale_cols(Matrix& m, std::span<const double> s);                              \
  double frobenius_sq(const Matrix& m);                                               \
  /* sum_kj d(k, j) * p(k, j)^2 */                                                    \
  double weighted_sq_sum(const Matrix& d, const Matrix& p);                           \
  /* sum_kj p(k, j) * (1 - p(k, j)) */                                                \
  double binary_penalty(const Matrix& p);

namespace serial {
QPALIGN_KERNEL_DECLS
}  // namespace serial

namespace parallel {
QPALIGN_KERNEL_DECLS
}  // namespace parallel

#undef QPALIGN_KERNEL_DECLS

// The library routes through the parallel variants.
using namespace parallel;

}  // namespace qpalign::kernels
