#pragma once

// Projected gradient descent on the regularized quadratic relaxation
//   f(P) = lambda ||A1 P - P A2||_F^2 + (1 - lambda) sum_kj D_kj P_kj^2 + mu sum_kj P_kj (1 - P_kj)
// over doubly stochastic P, followed by Hungarian rounding.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qpalign/birkhoff.hpp"
#include "qpalign/core.hpp"

namespace qpalign::solver {

struct FixedStep {
  double eta = 1e-4;
};
/// BB1 step <dP, dP> / <dP, dG>, starting (and falling back) at eta0.
struct BarzilaiBorwein {
  double eta0 = 1e-4;
};
using StepRule = std::variant<FixedStep, BarzilaiBorwein>;

/// Sinkhorn(max(X Y^T, 0) + nu * (1 + |d1 1^T - 1 d2^T|)^-1, K) with d = A 1.
struct MixedSimilarityInit {
  double nu = 0.1;
};
/// Sinkhorn of a matrix with i.i.d. Uniform(0, 1) entries.
struct RandomInit {
  std::uint64_t seed = 0;
};
/// J / n.
struct UniformInit {};
/// Caller-supplied starting matrix, projected like every other start.
struct GivenInit {
  Matrix start;
};
using InitRule = std::variant<MixedSimilarityInit, RandomInit, UniformInit, GivenInit>;

enum class Projection { Sinkhorn, ExactEuclidean };

struct SolverConfig {
  double lambda = 0.1;
  double mu = 0.1;
  StepRule step = FixedStep{1e-4};
  std::size_t max_iters = 400;       // T
  std::size_t sinkhorn_iters = 80;   // K
  double tol = 1e-6;                 // on |f(t) - f(t-1)|
  InitRule init = MixedSimilarityInit{0.1};
  Projection projection = Projection::Sinkhorn;
  birkhoff::ProjectionConfig exact{};

  /// Throws DomainError / UsageError on out-of-range settings.
  void validate() const;
};

/// Named hyperparameter profiles: "synthetic" (eta 1e-4, T 400, K 80, mu 0.1),
/// "acm-dblp" (eta 1e-5, T 1000, K 200, mu 0.01), "douban" (eta 5e-3, T 1000,
/// K 200, mu 0), "spatial" (eta 1e-5, T 400, K 80, mu 0.1). Lambda stays 0.1.
SolverConfig preset(const std::string& name);
std::vector<std::string> preset_names();

enum class StopReason { Tolerance, MaxIters };

struct SolveResult {
  Permutation estimate;
  DoublyStochastic final_relaxed;
  std::vector<double> objective_trace;  // f at each visited iterate
  std::size_t iterations_used = 0;
  StopReason stopped_by = StopReason::MaxIters;
  std::optional<double> overlap_vs_truth;
};

/// Non-finite objective or iterate; usually a step size that is too large.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::vector<double> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

/// Theory mode observed an objective increase beyond the permitted slack.
class MonotonicityError : public std::runtime_error {
 public:
  MonotonicityError(const std::string& what, std::size_t at, std::vector<double> trace)
      : std::runtime_error(what), at_(at), trace_(std::move(trace)) {}
  std::size_t iteration() const noexcept { return at_; }
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::size_t at_;
  std::vector<double> trace_;
};

Matrix feature_distance_matrix(const AlignmentInstance& inst);

/// 2 lambda (A1^T E - E A2^T) + 2 (1 - lambda) (D o P) + mu (J - 2P), E = A1 P - P A2.
Matrix gradient(const AlignmentInstance& inst, const Matrix& dist, const Matrix& pi, double lambda,
                double mu);
Matrix gradient(const AlignmentInstance& inst, const Matrix& pi, double lambda, double mu);

DoublyStochastic init_mixed_similarity(const AlignmentInstance& inst, double nu,
                                       std::size_t sinkhorn_iters);

/// <dP, dP> / <dP, dG> clamped to [1e-12, 1e3]; eta0 when the denominator is <= 0.
double bb_step(const Matrix& delta_pi, const Matrix& delta_grad, double eta0);

inline constexpr double kMinBbStep = 1e-12;
inline constexpr double kMaxBbStep = 1e3;

/// The relaxation loop: build D, initialize, then per iteration evaluate f,
/// take a gradient step, truncate and Sinkhorn-normalize (or project exactly),
/// and stop once |f(t) - f(t-1)| < tol. Rounds the final iterate with the
/// Hungarian method.
SolveResult run(const AlignmentInstance& inst, const SolverConfig& cfg);

/// Exact-projection, unregularized, fixed-step variant for which descent is
/// guaranteed when eta <= 1 / estimate_lipschitz. Throws MonotonicityError when
/// the trace increases by more than 1e-9 (1 + |f0|).
SolveResult run_theory_mode(const AlignmentInstance& inst, double lambda, double eta,
                            std::size_t iters, InitRule init = UniformInit{},
                            birkhoff::ProjectionConfig exact = {});

/// Spectral norm of a symmetric matrix by power iteration (dominant |eigenvalue|);
/// falls back to the Frobenius norm when 1000 steps do not settle.
double symmetric_operator_norm(const Matrix& a);

/// 2 [lambda (||A1||_2 + ||A2||_2)^2 + (1 - lambda) sum_i (max_k |X_ki| + max_k |Y_ki|)^2],
/// a Lipschitz constant for the gradient of the unregularized objective.
double estimate_lipschitz(const AlignmentInstance& inst, double lambda);

}  // namespace qpalign::solver
