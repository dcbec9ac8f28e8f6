#include "qpalign/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <ostream>

#include "qpalign/assign.hpp"
#include "qpalign/kernels.hpp"
#include "qpalign/oracle.hpp"
#include "qpalign/rng.hpp"
#include "qpalign/theory.hpp"

namespace qpalign::experiment {

void ExperimentGrid::validate() const {
  if (rhos.empty() || rs.empty() || lambdas.empty()) throw UsageError("grid: rho, r and lambda lists must be nonempty");
  if (trials < 1) throw UsageError("grid: trials must be >= 1");
  if (model.n < 1) throw UsageError("grid: n must be >= 1");
  for (double v : rhos)
    if (!(v >= 0.0 && v < 1.0)) throw DomainError("grid: rho values must lie in [0, 1)");
  for (double v : rs)
    if (!(v >= 0.0 && v < 1.0)) throw DomainError("grid: r values must lie in [0, 1)");
  for (double v : lambdas)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("grid: lambda values must lie in [0, 1]");
  ModelParams probe = model;
  probe.rho = probe.r = 0.0;
  probe.validate();
  solver.validate();
}

std::uint64_t trial_seed(std::uint64_t base, std::size_t rho_index, std::size_t r_index,
                         std::size_t trial) {
  return derive_seed(base, {rho_index, r_index, trial});
}

namespace {

struct TrialOutcome {
  bool ok = false;
  double overlap = 0.0;
  double iters = 0.0;
  double runtime_ms = 0.0;
};

TrialOutcome run_trial(const ExperimentGrid& grid, std::size_t ir, std::size_t jr, std::size_t kl,
                       std::size_t trial) {
  TrialOutcome out;
  try {
    synth::GenSpec spec;
    spec.params = grid.model;
    spec.params.rho = grid.rhos[ir];
    spec.params.r = grid.rs[jr];
    spec.seed = trial_seed(grid.seed, ir, jr, trial);
    const AlignmentInstance inst = synth::generate(spec);

    solver::SolverConfig cfg = grid.solver;
    cfg.lambda = grid.lambdas[kl];
    if (auto* rnd = std::get_if<solver::RandomInit>(&cfg.init)) rnd->seed = derive_seed(spec.seed, {2});

    const auto start = std::chrono::steady_clock::now();
    const solver::SolveResult res = solver::run(inst, cfg);
    const auto stop = std::chrono::steady_clock::now();
    out.ok = true;
    out.overlap = res.overlap_vs_truth.value_or(0.0);
    out.iters = static_cast<double>(res.iterations_used);
    out.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  } catch (const std::exception&) {
    out.ok = false;
  }
  return out;
}

PhaseCell aggregate(const ExperimentGrid& grid, std::size_t ir, std::size_t jr, std::size_t kl,
                    const TrialOutcome* outcomes) {
  PhaseCell cell;
  cell.rho_index = ir;
  cell.r_index = jr;
  cell.lambda_index = kl;
  cell.rho = grid.rhos[ir];
  cell.r = grid.rs[jr];
  cell.lambda = grid.lambdas[kl];
  cell.trials = grid.trials;
  std::vector<double> overlaps;
  double iters = 0.0, runtime = 0.0;
  for (std::size_t t = 0; t < grid.trials; ++t) {
    if (!outcomes[t].ok) {
      ++cell.errors;
      continue;
    }
    overlaps.push_back(outcomes[t].overlap);
    iters += outcomes[t].iters;
    runtime += outcomes[t].runtime_ms;
  }
  if (!overlaps.empty()) {
    const double k = static_cast<double>(overlaps.size());
    double mean = 0.0;
    for (double v : overlaps) mean += v;
    mean /= k;
    double ss = 0.0;
    for (double v : overlaps) ss += (v - mean) * (v - mean);
    cell.mean_overlap = mean;
    cell.std_overlap = overlaps.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
    cell.mean_iters = iters / k;
    cell.mean_runtime_ms = grid.record_runtime ? runtime / k : 0.0;
  }
  return cell;
}

}  // namespace

std::vector<PhaseCell> run_phase_diagram(const ExperimentGrid& grid,
                                         const std::function<void(const PhaseCell&)>& on_cell) {
  grid.validate();
  const std::size_t nr = grid.rs.size(), nl = grid.lambdas.size();
  const std::size_t cells = grid.cell_count();
  const int threads = grid.threads ? static_cast<int>(grid.threads) : omp_get_num_procs();
  // Enough cells per batch to keep every worker busy; rows are emitted per batch.
  const std::size_t batch = std::max<std::size_t>(1, static_cast<std::size_t>(threads));

  std::vector<PhaseCell> out;
  out.reserve(cells);
  std::vector<TrialOutcome> outcomes;
  for (std::size_t lo = 0; lo < cells; lo += batch) {
    const std::size_t hi = std::min(cells, lo + batch);
    const std::size_t tasks = (hi - lo) * grid.trials;
    outcomes.assign(tasks, {});
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::size_t task = 0; task < tasks; ++task) {
      const std::size_t c = lo + task / grid.trials;
      const std::size_t trial = task % grid.trials;
      outcomes[task] = run_trial(grid, c / (nr * nl), (c / nl) % nr, c % nl, trial);
    }
    for (std::size_t c = lo; c < hi; ++c) {
      out.push_back(aggregate(grid, c / (nr * nl), (c / nl) % nr, c % nl,
                              outcomes.data() + (c - lo) * grid.trials));
      if (on_cell) on_cell(out.back());
    }
  }
  return out;
}

std::string format_number(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 10);
  return std::string(buf, res.ptr);
}

std::string phase_row(const PhaseCell& c) {
  std::string s;
  s += format_number(c.rho) + ',' + format_number(c.r) + ',' + format_number(c.lambda) + ',';
  s += std::to_string(c.trials) + ',';
  if (c.mean_overlap) {
    s += format_number(*c.mean_overlap) + ',' + format_number(c.std_overlap) + ',' +
         format_number(c.mean_iters) + ',' + format_number(c.mean_runtime_ms) + ',';
  } else {
    s += ",,,,";
  }
  s += std::to_string(c.errors);
  return s;
}

Rgb palette(double value) {
  static constexpr Rgb stops[] = {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  const double v = std::clamp(value, 0.0, 1.0) * 4.0;
  const std::size_t i = std::min<std::size_t>(3, static_cast<std::size_t>(v));
  const double t = v - static_cast<double>(i);
  auto lerp = [t](std::uint8_t a, std::uint8_t b) {
    return static_cast<std::uint8_t>(std::lround(a + t * (double(b) - double(a))));
  };
  return {lerp(stops[i].r, stops[i + 1].r), lerp(stops[i].g, stops[i + 1].g), lerp(stops[i].b, stops[i + 1].b)};
}

void write_heatmap(std::ostream& out, const ExperimentGrid& grid, const std::vector<PhaseCell>& cells) {
  const std::size_t nrho = grid.rhos.size(), nr = grid.rs.size(), nl = grid.lambdas.size();
  const std::size_t width = nrho * nl, height = nr;
  std::vector<Rgb> pixels(width * height, Rgb{128, 128, 128});
  for (const PhaseCell& c : cells) {
    if (!c.mean_overlap) continue;
    const std::size_t x = c.lambda_index * nrho + c.rho_index;
    const std::size_t y = nr - 1 - c.r_index;
    pixels[y * width + x] = palette(*c.mean_overlap);
  }
  out << "P6\n" << width << ' ' << height << "\n255\n";
  for (const Rgb& p : pixels) out.put(static_cast<char>(p.r)).put(static_cast<char>(p.g)).put(static_cast<char>(p.b));
}

std::vector<ThresholdRow> threshold_curve(const ExperimentGrid& grid, const std::vector<PhaseCell>& cells,
                                          double success) {
  if (grid.lambdas.size() != 1) throw UsageError("threshold curve: the grid must hold exactly one lambda");
  std::vector<ThresholdRow> rows;
  const std::size_t n = grid.model.n, d = grid.model.d;
  for (std::size_t ir = 0; ir < grid.rhos.size(); ++ir) {
    ThresholdRow row;
    row.rho = grid.rhos[ir];
    for (const PhaseCell& c : cells) {
      if (c.rho_index != ir || !c.mean_overlap || *c.mean_overlap < success) continue;
      if (!row.r_empirical || c.r < *row.r_empirical) row.r_empirical = c.r;
    }
    row.r_exact_theory = theory::boundary_r(n, d, row.rho, theory::Regime::Exact).value_or(0.0);
    row.r_partial_theory = theory::boundary_r(n, d, row.rho, theory::Regime::Partial).value_or(0.0);
    row.converse_valid = row.r_exact_theory * row.r_exact_theory >= 40.0 / static_cast<double>(d);
    rows.push_back(row);
  }
  return rows;
}

std::string threshold_row(const ThresholdRow& row) {
  std::string s = format_number(row.rho) + ',';
  if (row.r_empirical) s += format_number(*row.r_empirical);
  s += ',' + format_number(row.r_exact_theory) + ',' + format_number(row.r_partial_theory) + ',';
  s += row.converse_valid ? "1" : "0";
  return s;
}

Matrix finite_difference_gradient(const AlignmentInstance& inst, const Matrix& pi, double lambda,
                                  double mu, double h) {
  const Matrix dist = solver::feature_distance_matrix(inst);
  Matrix g(pi.rows(), pi.cols());
  Matrix probe = pi;
  for (std::size_t i = 0; i < pi.rows(); ++i)
    for (std::size_t j = 0; j < pi.cols(); ++j) {
      const double base = probe(i, j);
      probe(i, j) = base + h;
      const double up = regularized_objective(inst, dist, probe, lambda, mu);
      probe(i, j) = base - h;
      const double down = regularized_objective(inst, dist, probe, lambda, mu);
      probe(i, j) = base;
      g(i, j) = (up - down) / (2.0 * h);
    }
  return g;
}

double relative_error(const Matrix& a, const Matrix& b) {
  return std::sqrt(kernels::frobenius_sq(a - b)) / std::max(std::sqrt(kernels::frobenius_sq(b)), 1e-12);
}

OracleCheckReport oracle_check(const OracleCheckConfig& cfg) {
  if (cfg.n < 1 || cfg.n > kMaxOracleCheckN) throw UsageError("oracle check: n must lie in [1, 7]");
  if (cfg.d < 1) throw UsageError("oracle check: d must be >= 1");
  if (!(cfg.rho_lo > 0.0 && cfg.rho_lo <= cfg.rho_hi && cfg.rho_hi < 1.0) ||
      !(cfg.r_lo > 0.0 && cfg.r_lo <= cfg.r_hi && cfg.r_hi < 1.0))
    throw DomainError("oracle check: correlation ranges must lie inside (0, 1)");

  OracleCheckReport rep;
  auto fail = [&](std::size_t& counter, std::uint64_t seed) {
    ++counter;
    if (!rep.first_failing_seed) rep.first_failing_seed = seed;
  };
  static constexpr double kLambdas[] = {0.0, 0.1, 0.5, 1.0};
  static constexpr double kMus[] = {0.0, 0.1};

  for (std::size_t k = 0; k < cfg.count; ++k) {
    const std::uint64_t seed = derive_seed(cfg.seed, {k});
    Rng rng(seed);
    synth::GenSpec spec;
    spec.params.n = cfg.n;
    spec.params.d = cfg.d;
    spec.params.rho = cfg.rho_lo + (cfg.rho_hi - cfg.rho_lo) * rng.uniform01();
    spec.params.r = cfg.r_lo + (cfg.r_hi - cfg.r_lo) * rng.uniform01();
    spec.seed = rng.next_u64();
    const AlignmentInstance inst = synth::generate(spec);
    ++rep.cases;

    const double lambda = lambda_from(spec.params.rho, spec.params.r);
    const auto mle = oracle::mle_exact(inst, spec.params.rho, spec.params.r);
    const auto qap = oracle::qap_min_exact(inst, lambda);
    if (mle.permutation != qap.permutation) fail(rep.mle_failures, seed);

    Matrix m(cfg.n, cfg.n);
    for (double& v : m.flat()) v = rng.uniform01();
    const double fast = assign::assignment_value(m, assign::solve_lap_max(m));
    const double exact = assign::assignment_value(m, assign::brute_force_lap_max(m));
    if (fast != exact) fail(rep.lap_failures, seed);

    // Strictly positive probe point; feasibility is irrelevant for the derivative.
    Matrix pi(cfg.n, cfg.n);
    for (double& v : pi.flat()) v = 0.2 + rng.uniform01();
    const double lam = kLambdas[k % 4];
    const double mu = kMus[(k / 4) % 2];
    Matrix g = solver::gradient(inst, pi, lam, mu);
    if (cfg.flip_gradient_sign) g = -1.0 * g;
    const double err = relative_error(g, finite_difference_gradient(inst, pi, lam, mu));
    rep.worst_gradient_error = std::max(rep.worst_gradient_error, err);
    if (!(err < 1e-5)) fail(rep.gradient_failures, seed);
  }
  return rep;
}

}  // namespace qpalign::experiment
