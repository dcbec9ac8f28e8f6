#include "qpalign/solver.hpp"

#include <algorithm>
#include <cmath>

#include "qpalign/assign.hpp"
#include "qpalign/kernels.hpp"
#include "qpalign/rng.hpp"

namespace qpalign::solver {

void SolverConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in [0, 1]");
  if (!(mu >= 0.0)) throw DomainError("mu must be nonnegative");
  if (max_iters < 1) throw UsageError("max_iters must be >= 1");
  if (sinkhorn_iters < 1) throw UsageError("sinkhorn_iters must be >= 1");
  if (!(tol >= 0.0)) throw DomainError("tol must be nonnegative");
  if (const auto* f = std::get_if<FixedStep>(&step); f && !(f->eta >= 0.0 && std::isfinite(f->eta)))
    throw DomainError("step size must be finite and nonnegative");
  if (const auto* b = std::get_if<BarzilaiBorwein>(&step); b && !(b->eta0 > 0.0 && std::isfinite(b->eta0)))
    throw DomainError("initial BB step must be positive");
  if (const auto* m = std::get_if<MixedSimilarityInit>(&init); m && !(m->nu >= 0.0))
    throw DomainError("nu must be nonnegative");
}

SolverConfig preset(const std::string& name) {
  SolverConfig cfg;
  if (name == "synthetic") return cfg;
  if (name == "acm-dblp") {
    cfg.step = FixedStep{1e-5};
    cfg.max_iters = 1000;
    cfg.sinkhorn_iters = 200;
    cfg.mu = 0.01;
    return cfg;
  }
  if (name == "douban") {
    cfg.step = FixedStep{5e-3};
    cfg.max_iters = 1000;
    cfg.sinkhorn_iters = 200;
    cfg.mu = 0.0;
    return cfg;
  }
  if (name == "spatial") {
    cfg.step = FixedStep{1e-5};
    return cfg;
  }
  throw UsageError("unknown solver preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"synthetic", "acm-dblp", "douban", "spatial"}; }

Matrix feature_distance_matrix(const AlignmentInstance& inst) {
  if (inst.x.rows() != inst.y.rows() || inst.x.cols() != inst.y.cols())
    throw DimensionError("feature_distance_matrix: X and Y differ in shape");
  Matrix d;
  kernels::feature_distance(inst.x, inst.y, d);
  return d;
}

namespace {

void require_pi_shape(const AlignmentInstance& inst, const Matrix& pi) {
  if (pi.rows() != inst.n || pi.cols() != inst.n) throw DimensionError("Pi must be n x n");
  if (inst.a1.rows() != inst.n || inst.a2.rows() != inst.n) throw DimensionError("adjacency must be n x n");
}

// Objective and gradient at pi, reusing the caller's E and G buffers.
double evaluate(const AlignmentInstance& inst, const Matrix& dist, const Matrix& pi, double lambda,
                double mu, Matrix& e, Matrix& g) {
  double f = 0.0;
  if (lambda != 0.0) {
    kernels::commutator(inst.a1, pi, inst.a2, e);
    f += lambda * kernels::frobenius_sq(e);
    kernels::commutator_adjoint(inst.a1, e, inst.a2, 2.0 * lambda, g);
  } else {
    g.reset(inst.n, inst.n);
  }
  if (lambda != 1.0) f += (1.0 - lambda) * kernels::weighted_sq_sum(dist, pi);
  if (mu != 0.0) f += mu * kernels::binary_penalty(pi);
  kernels::add_local_terms(dist, pi, lambda != 1.0 ? 2.0 * (1.0 - lambda) : 0.0, mu, g);
  return f;
}

DoublyStochastic project(Matrix m, const SolverConfig& cfg) {
  if (cfg.projection == Projection::ExactEuclidean) return birkhoff::project_euclidean(m, cfg.exact);
  kernels::truncate_nonneg(m);
  return birkhoff::sinkhorn(std::move(m), {cfg.sinkhorn_iters});
}

DoublyStochastic initialize(const AlignmentInstance& inst, const SolverConfig& cfg) {
  const std::size_t n = inst.n;
  return std::visit(
      [&](const auto& rule) -> DoublyStochastic {
        using Rule = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<Rule, MixedSimilarityInit>) {
          return init_mixed_similarity(inst, rule.nu, cfg.sinkhorn_iters);
        } else if constexpr (std::is_same_v<Rule, RandomInit>) {
          Rng rng(rule.seed);
          Matrix m(n, n);
          for (double& v : m.flat()) v = rng.uniform01();
          return birkhoff::sinkhorn(std::move(m), {cfg.sinkhorn_iters});
        } else if constexpr (std::is_same_v<Rule, UniformInit>) {
          return measure_marginals(Matrix(n, n, n ? 1.0 / static_cast<double>(n) : 0.0));
        } else {
          if (rule.start.rows() != n || rule.start.cols() != n)
            throw DimensionError("given initial matrix must be n x n");
          return project(rule.start, cfg);
        }
      },
      cfg.init);
}

SolveResult solve_loop(const AlignmentInstance& inst, const SolverConfig& cfg) {
  cfg.validate();
  inst.validate();
  const std::size_t n = inst.n;
  const Matrix dist = feature_distance_matrix(inst);

  DoublyStochastic current = initialize(inst, cfg);
  Matrix e, g, prev_pi, prev_g;
  SolveResult result;
  result.objective_trace.reserve(cfg.max_iters);

  for (std::size_t t = 0; t < cfg.max_iters; ++t) {
    Matrix& pi = current.mat;
    const double f = evaluate(inst, dist, pi, cfg.lambda, cfg.mu, e, g);
    if (!std::isfinite(f)) throw DivergenceError("objective became non-finite; reduce the step size",
                                                 result.objective_trace);
    result.objective_trace.push_back(f);

    double eta = 0.0;
    if (const auto* fixed = std::get_if<FixedStep>(&cfg.step)) {
      eta = fixed->eta;
    } else {
      const double eta0 = std::get<BarzilaiBorwein>(cfg.step).eta0;
      eta = t == 0 ? eta0 : bb_step(pi - prev_pi, g - prev_g, eta0);
      prev_pi = pi;
      prev_g = g;
    }

    Matrix next = pi;
    kernels::axpy(-eta, g, next);
    if (!next.all_finite())
      throw DivergenceError("iterate became non-finite; reduce the step size", result.objective_trace);
    current = project(std::move(next), cfg);

    result.iterations_used = t + 1;
    if (t > 0 && std::fabs(f - result.objective_trace[t - 1]) < cfg.tol) {
      result.stopped_by = StopReason::Tolerance;
      break;
    }
  }

  result.estimate = n ? assign::solve_lap_max(current.mat) : Permutation::identity(0);
  result.final_relaxed = std::move(current);
  if (inst.truth) result.overlap_vs_truth = overlap(result.estimate, *inst.truth);
  return result;
}

}  // namespace

Matrix gradient(const AlignmentInstance& inst, const Matrix& dist, const Matrix& pi, double lambda,
                double mu) {
  require_pi_shape(inst, pi);
  require_same_shape(dist, pi, "gradient: distance matrix must be n x n");
  Matrix e, g;
  evaluate(inst, dist, pi, lambda, mu, e, g);
  return g;
}

Matrix gradient(const AlignmentInstance& inst, const Matrix& pi, double lambda, double mu) {
  return gradient(inst, feature_distance_matrix(inst), pi, lambda, mu);
}

DoublyStochastic init_mixed_similarity(const AlignmentInstance& inst, double nu,
                                       std::size_t sinkhorn_iters) {
  if (!(nu >= 0.0)) throw DomainError("init_mixed_similarity: nu must be nonnegative");
  const std::size_t n = inst.n;
  Matrix s;
  kernels::multiply_transposed(inst.x, inst.y, s);
  kernels::truncate_nonneg(s);
  if (nu != 0.0) {
    std::vector<double> d1(n), d2(n);
    kernels::row_sums(inst.a1, d1);
    kernels::row_sums(inst.a2, d2);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s(i, j) += nu / (1.0 + std::fabs(d1[i] - d2[j]));
  }
  return birkhoff::sinkhorn(std::move(s), {sinkhorn_iters});
}

double bb_step(const Matrix& delta_pi, const Matrix& delta_grad, double eta0) {
  const double num = frobenius_dot(delta_pi, delta_pi);
  const double den = frobenius_dot(delta_pi, delta_grad);
  if (!(den > 0.0) || !std::isfinite(num / den)) return eta0;
  return std::clamp(num / den, kMinBbStep, kMaxBbStep);
}

SolveResult run(const AlignmentInstance& inst, const SolverConfig& cfg) { return solve_loop(inst, cfg); }

SolveResult run_theory_mode(const AlignmentInstance& inst, double lambda, double eta,
                            std::size_t iters, InitRule init, birkhoff::ProjectionConfig exact) {
  SolverConfig cfg;
  cfg.lambda = lambda;
  cfg.mu = 0.0;
  cfg.step = FixedStep{eta};
  cfg.max_iters = iters;
  cfg.tol = 0.0;
  cfg.init = std::move(init);
  cfg.projection = Projection::ExactEuclidean;
  cfg.exact = exact;
  SolveResult result = solve_loop(inst, cfg);

  const auto& trace = result.objective_trace;
  const double slack = 1e-9 * (1.0 + std::fabs(trace.front()));
  for (std::size_t t = 1; t < trace.size(); ++t)
    if (trace[t] > trace[t - 1] + slack)
      throw MonotonicityError("objective increased under exact projection", t, trace);
  return result;
}

double symmetric_operator_norm(const Matrix& a) {
  require_square(a, "symmetric_operator_norm: matrix must be square");
  const std::size_t n = a.rows();
  if (n == 0) return 0.0;
  std::vector<double> v(n), w(n);
  // Deterministic start with no special alignment to structured eigenvectors.
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + static_cast<double>((i * 7919) % 97) / 97.0;
  auto normalize = [](std::vector<double>& x) {
    double s = 0.0;
    for (double c : x) s += c * c;
    const double norm = std::sqrt(s);
    if (norm > 0.0)
      for (double& c : x) c /= norm;
    return norm;
  };
  normalize(v);
  double estimate = 0.0;
  for (int it = 0; it < 1000; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      const auto row = a.row(i);
      for (std::size_t j = 0; j < n; ++j) s += row[j] * v[j];
      w[i] = s;
    }
    const double next = normalize(w);
    if (next == 0.0) return 0.0;
    std::swap(v, w);
    if (it > 0 && std::fabs(next - estimate) <= 1e-12 * next) return next;
    estimate = next;
  }
  return std::sqrt(kernels::frobenius_sq(a));
}

double estimate_lipschitz(const AlignmentInstance& inst, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in [0, 1]");
  const double edge = symmetric_operator_norm(inst.a1) + symmetric_operator_norm(inst.a2);
  double feat = 0.0;
  for (std::size_t c = 0; c < inst.d; ++c) {
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < inst.n; ++k) {
      mx = std::max(mx, std::fabs(inst.x(k, c)));
      my = std::max(my, std::fabs(inst.y(k, c)));
    }
    feat += (mx + my) * (mx + my);
  }
  return 2.0 * (lambda * edge * edge + (1.0 - lambda) * feat);
}

}  // namespace qpalign::solver
