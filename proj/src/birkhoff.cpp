#include "qpalign/birkhoff.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "qpalign/kernels.hpp"
#include "qpalign/summation.hpp"

namespace qpalign::birkhoff {

Matrix truncate_nonneg(Matrix m) {
  kernels::truncate_nonneg(m);
  return m;
}

DoublyStochastic sinkhorn(Matrix m, const SinkhornConfig& cfg) {
  require_square(m, "sinkhorn: matrix must be square");
  if (cfg.iters == 0) throw UsageError("sinkhorn: iters must be >= 1");
  if (!(cfg.floor > 0.0)) throw UsageError("sinkhorn: floor must be positive");
  for (double v : m.flat())
    if (!std::isfinite(v) || v < 0.0) throw UsageError("sinkhorn: input must be finite and nonnegative");

  const std::size_t n = m.rows();
  std::vector<double> sums(n);
  kernels::add_constant(m, cfg.floor);
  for (std::size_t k = 0; k < cfg.iters; ++k) {
    kernels::row_sums(m, sums);
    for (double& s : sums) s = 1.0 / s;
    kernels::scale_rows(m, sums);
    kernels::col_sums(m, sums);
    for (double& s : sums) s = 1.0 / s;
    kernels::scale_cols(m, sums);
  }
  return measure_marginals(std::move(m));
}

Matrix project_affine(const Matrix& m) {
  require_square(m, "project_affine: matrix must be square");
  const std::size_t n = m.rows();
  std::vector<double> rs(n), cs(n);
  kernels::row_sums(m, rs);
  kernels::col_sums(m, cs);
  const double total = compensated_sum(rs);
  const double inv_n = 1.0 / static_cast<double>(n);
  const double shift = (total - static_cast<double>(n)) * inv_n * inv_n;
  Matrix w = m;
  for (std::size_t i = 0; i < n; ++i) {
    const double ri = (1.0 - rs[i]) * inv_n + shift;
    double* row = w.row(i).data();
    for (std::size_t j = 0; j < n; ++j) row[j] += ri + (1.0 - cs[j]) * inv_n;
  }
  return w;
}

DoublyStochastic project_euclidean(const Matrix& m, const ProjectionConfig& cfg) {
  require_square(m, "project_euclidean: matrix must be square");
  if (!m.all_finite()) throw UsageError("project_euclidean: non-finite input");
  const std::size_t n = m.rows();
  if (n == 0) return {};

  // Dykstra: x <- P_affine(z + p), p <- z + p - x; z <- P_+(x + q), q <- x + q - z.
  Matrix z = m;
  Matrix p(n, n), q(n, n);
  Matrix x(n, n), prev_z(n, n);
  double move = 0.0;
  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    prev_z = z;
    Matrix xin = z;
    kernels::axpy(1.0, p, xin);
    x = project_affine(xin);
    p = xin;
    kernels::axpy(-1.0, x, p);

    Matrix zin = x;
    kernels::axpy(1.0, q, zin);
    z = zin;
    kernels::truncate_nonneg(z);
    q = zin;
    kernels::axpy(-1.0, z, q);

    move = max_abs_difference(z, prev_z);
    if (move < cfg.tol) {
      DoublyStochastic out = measure_marginals(z);
      if (out.residual() < cfg.tol) return out;
    }
  }
  DoublyStochastic last = measure_marginals(z);
  throw ProjectionError("project_euclidean: no convergence within max_iter", std::move(last.mat),
                        std::max(last.residual(), move));
}

}  // namespace qpalign::birkhoff
