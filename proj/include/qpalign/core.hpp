#pragma once

// Domain types, alignment metrics, the maximum-likelihood similarity score and
// the objective functions shared by the oracle and the solver.
//
// Edge convention: adjacency matrices store every weight twice (A(i,j) == A(j,i))
// with a zero diagonal. Pairwise sums (similarity_score, squared_loss) visit each
// unordered pair i < j once, while Frobenius-form objectives (qap_objective) see
// each pair twice. On permutation matrices
//   qap_objective(P_pi, lambda) = 2*lambda*edge_loss(pi) + (1-lambda)*feature_loss(pi),
// so argmin over permutations of qap_objective(., frobenius_weight(lambda)) coincides
// with argmin of squared_loss(., lambda).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qpalign/matrix.hpp"

namespace qpalign {

/// Bijection on {0, ..., n-1}; map()[i] is the image of i.
class Permutation {
 public:
  Permutation() = default;
  /// Throws UsageError unless `map` is a bijection.
  explicit Permutation(std::vector<std::size_t> map);

  static Permutation identity(std::size_t n);

  std::size_t size() const noexcept { return map_.size(); }
  std::size_t operator()(std::size_t i) const noexcept { return map_[i]; }
  std::size_t operator[](std::size_t i) const noexcept { return map_[i]; }
  std::span<const std::size_t> map() const noexcept { return map_; }

  Permutation inverse() const;
  /// (this o inner)(i) = this(inner(i)).
  Permutation compose(const Permutation& inner) const;
  /// P(i, map(i)) = 1.
  Matrix to_matrix() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation& a, const Permutation& b) { return a.map_ <=> b.map_; }

 private:
  std::vector<std::size_t> map_;
};

enum class ModelKind : std::uint32_t { GaussianWigner = 0, ErdosRenyi = 1, StudentT = 2 };

struct ModelParams {
  ModelKind kind = ModelKind::GaussianWigner;
  std::size_t n = 0;
  std::size_t d = 0;
  double rho = 0.0;
  double r = 0.0;
  double p = 0.5;   // ErdosRenyi connection probability
  double nu = 5.0;  // StudentT degrees of freedom

  /// Throws DomainError on rho, r outside [0, 1), p outside (0, 1), nu <= 2.
  void validate() const;
};

/// Two attributed graphs on n vertices, optionally with the planted matching.
struct AlignmentInstance {
  std::size_t n = 0;
  std::size_t d = 0;
  Matrix a1, a2;  // n x n symmetric, zero diagonal
  Matrix x, y;    // n x d
  std::optional<Permutation> truth;

  /// Throws DimensionError / UsageError when shapes, symmetry, diagonal or finiteness fail.
  void validate() const;

  friend bool operator==(const AlignmentInstance&, const AlignmentInstance&) = default;
};

/// Relaxation iterate with its achieved feasibility slack.
struct DoublyStochastic {
  Matrix mat;
  double row_residual = 0.0;  // max_i |row_sum_i - 1|
  double col_residual = 0.0;  // max_j |col_sum_j - 1|

  double residual() const noexcept { return row_residual > col_residual ? row_residual : col_residual; }
  /// Entries in [-tol, 1 + tol] and residual() <= tol.
  bool feasible(double tol) const;
};

/// Row/column residuals of an arbitrary square matrix against the all-ones marginals.
DoublyStochastic measure_marginals(Matrix m);

/// x / (1 - x^2); DomainError unless |x| < 1.
double phi(double x);

/// phi(rho) / (phi(rho) + phi(r)); DomainError unless 0 < rho, r < 1.
double lambda_from(double rho, double r);

/// Weight for the Frobenius-form objective that matches squared_loss at `lambda`: lambda / (2 - lambda).
double frobenius_weight(double lambda);

double overlap(const Permutation& p1, const Permutation& p2);
std::size_t hamming(const Permutation& p1, const Permutation& p2);

/// phi(rho) * sum_{i<j} A1(i,j) A2(pi(i),pi(j)) + phi(r) * sum_v <x_v, y_pi(v)>.
double similarity_score(const AlignmentInstance& inst, const Permutation& pi, double rho, double r);

/// sum_{i<j} (A1(i,j) - A2(pi(i),pi(j)))^2
double edge_loss(const AlignmentInstance& inst, const Permutation& pi);
/// sum_i ||x_i - y_pi(i)||^2
double feature_loss(const AlignmentInstance& inst, const Permutation& pi);
/// lambda * edge_loss + (1 - lambda) * feature_loss.
double squared_loss(const AlignmentInstance& inst, const Permutation& pi, double lambda);

/// lambda ||A1 P - P A2||_F^2 + (1 - lambda) sum_kj D_kj P_kj^2, D_kj = ||x_k - y_j||^2.
double qap_objective(const AlignmentInstance& inst, const Matrix& pi, double lambda);
/// Same, with a precomputed feature-distance matrix.
double qap_objective(const AlignmentInstance& inst, const Matrix& dist, const Matrix& pi,
                     double lambda);
/// qap_objective + mu * sum_kj P_kj (1 - P_kj).
double regularized_objective(const AlignmentInstance& inst, const Matrix& pi, double lambda,
                             double mu);
double regularized_objective(const AlignmentInstance& inst, const Matrix& dist, const Matrix& pi,
                             double lambda, double mu);

}  // namespace qpalign
