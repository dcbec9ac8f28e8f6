#pragma once

// Projections onto (and near) the Birkhoff polytope of n x n doubly stochastic matrices.

#include <cstddef>
#include <stdexcept>

#include "qpalign/core.hpp"

namespace qpalign::birkhoff {

struct SinkhornConfig {
  std::size_t iters = 80;  // full row+column sweeps
  double floor = 1e-12;    // added to every entry before scaling
};

/// Elementwise max(M, 0).
Matrix truncate_nonneg(Matrix m);

/// Sinkhorn scaling of a nonnegative matrix: adds `floor` to every entry, then
/// `iters` sweeps of row normalization followed by column normalization. The
/// result ends on a column pass, so column sums are exact up to rounding and
/// row_residual carries the remaining slack. UsageError on negative or
/// non-finite input.
DoublyStochastic sinkhorn(Matrix m, const SinkhornConfig& cfg);

struct ProjectionConfig {
  double tol = 1e-9;
  std::size_t max_iter = 10000;
};

/// Raised when Dykstra's iteration does not settle within max_iter.
class ProjectionError : public std::runtime_error {
 public:
  ProjectionError(const std::string& what, Matrix last, double residual)
      : std::runtime_error(what), last_(std::move(last)), residual_(residual) {}
  const Matrix& last_iterate() const noexcept { return last_; }
  double residual() const noexcept { return residual_; }

 private:
  Matrix last_;
  double residual_;
};

/// Projection onto the affine set {W : W 1 = 1, W^T 1 = 1}:
///   W_ij = M_ij + (1 - r_i)/n + (1 - c_j)/n + (s - n)/n^2,
/// with r, c the row/column sums of M and s its total.
Matrix project_affine(const Matrix& m);

/// Frobenius-nearest doubly stochastic matrix, by Dykstra's alternating
/// projections between the affine marginal set and the nonnegative orthant.
/// Stops once successive iterates move less than tol (max-norm) and the
/// marginal residual is below tol; the returned matrix is the orthant iterate
/// (entries exactly >= 0).
DoublyStochastic project_euclidean(const Matrix& m, const ProjectionConfig& cfg = {});

}  // namespace qpalign::birkhoff
