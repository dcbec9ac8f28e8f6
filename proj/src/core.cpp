#include "qpalign/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qpalign/kernels.hpp"
#include "qpalign/summation.hpp"

namespace qpalign {

// ---- Matrix -----------------------------------------------------------------

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "matrix sum: shape mismatch");
  Matrix out = a;
  kernels::axpy(1.0, b, out);
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "matrix difference: shape mismatch");
  Matrix out = a;
  kernels::axpy(-1.0, b, out);
  return out;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix out = a;
  for (double& v : out.flat()) v *= s;
  return out;
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
  return std::sqrt(kernels::frobenius_sq(a - b));
}

double max_abs_difference(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_difference: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.flat()[i] - b.flat()[i]));
  return m;
}

double frobenius_dot(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "frobenius_dot: shape mismatch");
  CompensatedSum acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add(a.flat()[i] * b.flat()[i]);
  return acc.value();
}

// ---- Permutation ------------------------------------------------------------

Permutation::Permutation(std::vector<std::size_t> map) : map_(std::move(map)) {
  std::vector<char> seen(map_.size(), 0);
  for (std::size_t v : map_) {
    if (v >= map_.size() || seen[v]) throw UsageError("permutation: map is not a bijection");
    seen[v] = 1;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  return Permutation(std::move(m));
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(map_.size());
  for (std::size_t i = 0; i < map_.size(); ++i) inv[map_[i]] = i;
  return Permutation(std::move(inv));
}

Permutation Permutation::compose(const Permutation& inner) const {
  if (inner.size() != size()) throw DimensionError("permutation compose: size mismatch");
  std::vector<std::size_t> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = map_[inner.map_[i]];
  return Permutation(std::move(out));
}

Matrix Permutation::to_matrix() const {
  Matrix m(size(), size());
  for (std::size_t i = 0; i < size(); ++i) m(i, map_[i]) = 1.0;
  return m;
}

// ---- Parameters and instances -------------------------------------------------

void ModelParams::validate() const {
  if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("rho must lie in [0, 1)");
  if (!(r >= 0.0 && r < 1.0)) throw DomainError("r must lie in [0, 1)");
  if (kind == ModelKind::ErdosRenyi && !(p > 0.0 && p < 1.0))
    throw DomainError("p must lie in (0, 1)");
  if (kind == ModelKind::StudentT && !(nu > 2.0))
    throw DomainError("nu must exceed 2 (finite variance)");
}

void AlignmentInstance::validate() const {
  auto shape = [](const Matrix& m, std::size_t r, std::size_t c, const char* name) {
    if (m.rows() != r || m.cols() != c)
      throw DimensionError(std::string("instance: ") + name + " has the wrong shape");
  };
  shape(a1, n, n, "A1");
  shape(a2, n, n, "A2");
  shape(x, n, d, "X");
  shape(y, n, d, "Y");
  for (const Matrix* a : {&a1, &a2}) {
    if (!a->all_finite()) throw UsageError("instance: adjacency has non-finite entries");
    for (std::size_t i = 0; i < n; ++i) {
      if ((*a)(i, i) != 0.0) throw UsageError("instance: adjacency diagonal must be zero");
      for (std::size_t j = i + 1; j < n; ++j)
        if ((*a)(i, j) != (*a)(j, i)) throw UsageError("instance: adjacency must be symmetric");
    }
  }
  if (!x.all_finite() || !y.all_finite()) throw UsageError("instance: non-finite features");
  if (truth && truth->size() != n) throw DimensionError("instance: truth has the wrong length");
}

bool DoublyStochastic::feasible(double tol) const {
  for (double v : mat.flat())
    if (!(v >= -tol && v <= 1.0 + tol)) return false;
  return residual() <= tol;
}

DoublyStochastic measure_marginals(Matrix m) {
  std::vector<double> rs(m.rows()), cs(m.cols());
  kernels::row_sums(m, rs);
  kernels::col_sums(m, cs);
  DoublyStochastic out;
  for (double s : rs) out.row_residual = std::max(out.row_residual, std::fabs(s - 1.0));
  for (double s : cs) out.col_residual = std::max(out.col_residual, std::fabs(s - 1.0));
  out.mat = std::move(m);
  return out;
}

// ---- Scalars ------------------------------------------------------------------

double phi(double x) {
  if (!(std::fabs(x) < 1.0)) throw DomainError("phi: correlation must satisfy |x| < 1");
  return x / (1.0 - x * x);
}

double lambda_from(double rho, double r) {
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("lambda_from: rho must lie in (0, 1)");
  if (!(r > 0.0 && r < 1.0)) throw DomainError("lambda_from: r must lie in (0, 1)");
  const double pr = phi(rho);
  return pr / (pr + phi(r));
}

double frobenius_weight(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in [0, 1]");
  return lambda / (2.0 - lambda);
}

// ---- Metrics ------------------------------------------------------------------

double overlap(const Permutation& p1, const Permutation& p2) {
  if (p1.size() != p2.size()) throw DimensionError("overlap: permutations differ in length");
  if (p1.size() == 0) return 1.0;
  std::size_t same = 0;
  for (std::size_t v = 0; v < p1.size(); ++v) same += p1(v) == p2(v);
  return static_cast<double>(same) / static_cast<double>(p1.size());
}

std::size_t hamming(const Permutation& p1, const Permutation& p2) {
  if (p1.size() != p2.size()) throw DimensionError("hamming: permutations differ in length");
  std::size_t diff = 0;
  for (std::size_t v = 0; v < p1.size(); ++v) diff += p1(v) != p2(v);
  return diff;
}

// ---- Objectives ---------------------------------------------------------------

namespace {

void check_perm(const AlignmentInstance& inst, const Permutation& pi) {
  if (pi.size() != inst.n) throw DimensionError("permutation length differs from instance size");
}

double matched_edge_product(const AlignmentInstance& inst, const Permutation& pi) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < inst.n; ++i)
    for (std::size_t j = i + 1; j < inst.n; ++j) acc.add(inst.a1(i, j) * inst.a2(pi(i), pi(j)));
  return acc.value();
}

double matched_feature_product(const AlignmentInstance& inst, const Permutation& pi) {
  CompensatedSum acc;
  for (std::size_t v = 0; v < inst.n; ++v) {
    const auto xv = inst.x.row(v);
    const auto yv = inst.y.row(pi(v));
    for (std::size_t c = 0; c < inst.d; ++c) acc.add(xv[c] * yv[c]);
  }
  return acc.value();
}

}  // namespace

double similarity_score(const AlignmentInstance& inst, const Permutation& pi, double rho,
                        double r) {
  check_perm(inst, pi);
  if (!(rho > 0.0 && rho < 1.0) || !(r > 0.0 && r < 1.0))
    throw DomainError("similarity_score: rho and r must lie in (0, 1)");
  return phi(rho) * matched_edge_product(inst, pi) + phi(r) * matched_feature_product(inst, pi);
}

double edge_loss(const AlignmentInstance& inst, const Permutation& pi) {
  check_perm(inst, pi);
  CompensatedSum acc;
  for (std::size_t i = 0; i < inst.n; ++i)
    for (std::size_t j = i + 1; j < inst.n; ++j) {
      const double diff = inst.a1(i, j) - inst.a2(pi(i), pi(j));
      acc.add(diff * diff);
    }
  return acc.value();
}

double feature_loss(const AlignmentInstance& inst, const Permutation& pi) {
  check_perm(inst, pi);
  CompensatedSum acc;
  for (std::size_t v = 0; v < inst.n; ++v) {
    const auto xv = inst.x.row(v);
    const auto yv = inst.y.row(pi(v));
    for (std::size_t c = 0; c < inst.d; ++c) {
      const double diff = xv[c] - yv[c];
      acc.add(diff * diff);
    }
  }
  return acc.value();
}

double squared_loss(const AlignmentInstance& inst, const Permutation& pi, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("squared_loss: lambda must lie in [0, 1]");
  return lambda * edge_loss(inst, pi) + (1.0 - lambda) * feature_loss(inst, pi);
}

double qap_objective(const AlignmentInstance& inst, const Matrix& dist, const Matrix& pi,
                     double lambda) {
  if (pi.rows() != inst.n || pi.cols() != inst.n) throw DimensionError("qap_objective: Pi must be n x n");
  require_same_shape(dist, pi, "qap_objective: distance matrix must be n x n");
  double edge = 0.0;
  if (lambda != 0.0) {
    Matrix e;
    kernels::commutator(inst.a1, pi, inst.a2, e);
    edge = lambda * kernels::frobenius_sq(e);
  }
  const double feat = lambda != 1.0 ? (1.0 - lambda) * kernels::weighted_sq_sum(dist, pi) : 0.0;
  return edge + feat;
}

double qap_objective(const AlignmentInstance& inst, const Matrix& pi, double lambda) {
  Matrix dist;
  kernels::feature_distance(inst.x, inst.y, dist);
  return qap_objective(inst, dist, pi, lambda);
}

double regularized_objective(const AlignmentInstance& inst, const Matrix& dist, const Matrix& pi,
                             double lambda, double mu) {
  if (!(mu >= 0.0)) throw DomainError("regularized_objective: mu must be nonnegative");
  const double base = qap_objective(inst, dist, pi, lambda);
  return mu != 0.0 ? base + mu * kernels::binary_penalty(pi) : base;
}

double regularized_objective(const AlignmentInstance& inst, const Matrix& pi, double lambda,
                             double mu) {
  Matrix dist;
  kernels::feature_distance(inst.x, inst.y, dist);
  return regularized_objective(inst, dist, pi, lambda, mu);
}

}  // namespace qpalign
