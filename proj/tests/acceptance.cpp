// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the number of failures.
//
//   acceptance            run everything
//   acceptance 4 7        run selected criteria

#include <CLI11.hpp>

#include <algorithm>
#include <cfloat>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "qpalign/assign.hpp"
#include "qpalign/birkhoff.hpp"
#include "qpalign/experiment.hpp"
#include "qpalign/instance_io.hpp"
#include "qpalign/oracle.hpp"
#include "qpalign/solver.hpp"
#include "qpalign/synth.hpp"
#include "qpalign/theory.hpp"

namespace {

using namespace qpalign;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

AlignmentInstance gaussian(std::size_t n, std::size_t d, double rho, double r, std::uint64_t seed) {
  synth::GenSpec spec;
  spec.params.n = n;
  spec.params.d = d;
  spec.params.rho = rho;
  spec.params.r = r;
  spec.seed = seed;
  return synth::generate(spec);
}

Matrix uniform_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo, double hi) {
  Matrix m(rows, cols);
  for (double& v : m.flat()) v = lo + (hi - lo) * rng.uniform01();
  return m;
}

std::vector<Matrix> permutation_matrices(std::size_t n) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  std::vector<Matrix> out;
  do out.push_back(Permutation(m).to_matrix());
  while (std::next_permutation(m.begin(), m.end()));
  return out;
}

// ---------------------------------------------------------------------------

Outcome mle_qap_equivalence() {
  const double levels[] = {0.2, 0.5, 0.8};
  std::size_t agree = 0, total = 0;
  for (std::size_t k = 0; k < 200; ++k) {
    const std::size_t n = 4 + k % 4;
    const std::size_t d = (k / 4) % 2 ? 4 : 2;
    const double rho = levels[(k / 8) % 3], r = levels[(k / 24) % 3];
    const AlignmentInstance inst = gaussian(n, d, rho, r, derive_seed(2024, {k}));
    const auto mle = oracle::mle_exact(inst, rho, r);
    const auto qap = oracle::qap_min_exact(inst, lambda_from(rho, r));
    ++total;
    if (mle.permutation == qap.permutation) ++agree;
  }
  return {agree == total, fmt("%zu/%zu instances agree", agree, total)};
}

Outcome gradient_check() {
  const std::size_t n = 8;
  const AlignmentInstance inst = gaussian(n, 3, 0.6, 0.5, 77);
  Rng rng(78);
  double worst = 0.0;
  std::size_t points = 0;
  for (double lambda : {0.0, 0.1, 0.5, 1.0})
    for (double mu : {0.0, 0.1})
      for (int rep = 0; rep < 20; ++rep) {
        const Matrix pi = birkhoff::sinkhorn(uniform_matrix(n, n, rng, 0.05, 1.0), {30}).mat;
        const Matrix g = solver::gradient(inst, pi, lambda, mu);
        Matrix fd(n, n);
        Matrix probe = pi;
        const double h = 1e-6;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            const double saved = probe(i, j);
            probe(i, j) = saved + h;
            const double up = regularized_objective(inst, probe, lambda, mu);
            probe(i, j) = saved - h;
            const double down = regularized_objective(inst, probe, lambda, mu);
            probe(i, j) = saved;
            fd(i, j) = (up - down) / (2.0 * h);
          }
        worst = std::max(worst, frobenius_distance(g, fd) / std::sqrt(frobenius_dot(fd, fd)));
        ++points;
      }
  return {worst < 1e-5, fmt("%zu points, worst relative error %.3g (limit 1e-5)", points, worst)};
}

Outcome hungarian_optimality() {
  Rng rng(3);
  std::size_t exact = 0, total = 0;
  for (std::size_t n : {7u, 8u})
    for (int rep = 0; rep < 100; ++rep) {
      const Matrix m = uniform_matrix(n, n, rng, -1.0, 1.0);
      const double fast = assign::assignment_value(m, assign::solve_lap_max(m));
      const double slow = assign::assignment_value(m, assign::brute_force_lap_max(m));
      ++total;
      if (fast == slow) ++exact;
    }
  return {exact == total, fmt("%zu/%zu optima equal brute force exactly", exact, total)};
}

Outcome sinkhorn_feasibility() {
  Rng rng(4);
  double worst = 0.0;
  std::size_t monotone_breaks = 0;
  // Beyond machine precision the deviation only carries rounding noise.
  const double slack = 15 * DBL_EPSILON;
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix m = uniform_matrix(50, 50, rng, 0.0, 1.0);
    worst = std::max(worst, birkhoff::sinkhorn(m, {300}).residual());
    double prev = INFINITY;
    for (std::size_t k = 1; k <= 256; k *= 2) {
      const double dev = birkhoff::sinkhorn(m, {k}).residual();
      if (dev > prev + slack) ++monotone_breaks;
      prev = dev;
    }
  }
  return {worst < 1e-8 && monotone_breaks == 0,
          fmt("worst deviation at K=300 %.3g (limit 1e-8), %zu monotonicity breaks", worst, monotone_breaks)};
}

Outcome exact_projection() {
  Rng rng(5);
  const auto vertices = permutation_matrices(6);
  double worst_residual = 0.0;
  std::size_t closer = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix m = uniform_matrix(6, 6, rng, -1.0, 1.5);
    const auto w = birkhoff::project_euclidean(m);
    worst_residual = std::max(worst_residual, w.residual());
    const double best = frobenius_distance(w.mat, m);
    for (int s = 0; s < 100000; ++s) {
      // Convex combination of up to four random permutation matrices.
      const std::size_t k = 1 + rng.index(4);
      double wts[4], total = 0.0;
      for (std::size_t t = 0; t < k; ++t) total += (wts[t] = rng.uniform_open());
      Matrix q(6, 6);
      for (std::size_t t = 0; t < k; ++t) {
        const Matrix& v = vertices[rng.index(vertices.size())];
        for (std::size_t e = 0; e < 36; ++e) q.flat()[e] += wts[t] / total * v.flat()[e];
      }
      if (frobenius_distance(q, m) < best - 1e-12) ++closer;
    }
  }
  return {worst_residual < 1e-8 && closer == 0,
          fmt("worst residual %.3g (limit 1e-8), %zu of 5e6 samples strictly closer", worst_residual, closer)};
}

Outcome theory_descent() {
  const std::size_t n = 20, t_short = 50, t_long = 500;
  const double lambda = 0.5;
  std::size_t monotone_fail = 0, bound_fail = 0;
  double worst_ratio = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const AlignmentInstance inst = gaussian(n, 4, 0.6, 0.6, derive_seed(600, {k}));
    const double eta = 1.0 / (2.0 * solver::estimate_lipschitz(inst, lambda));
    solver::SolveResult res;
    try {
      res = solver::run_theory_mode(inst, lambda, eta, t_long + 1);
    } catch (const solver::MonotonicityError&) {
      ++monotone_fail;
      continue;
    }
    const auto& trace = res.objective_trace;
    const double gap = trace[t_short] - trace[t_long];
    const double bound = static_cast<double>(n) / (eta * t_short) * 1.05;
    worst_ratio = std::max(worst_ratio, gap / bound);
    if (gap > bound) ++bound_fail;
  }
  return {monotone_fail == 0 && bound_fail == 0,
          fmt("20 instances: %zu non-monotone traces, %zu bound violations, worst gap/bound %.3g", monotone_fail,
              bound_fail, worst_ratio)};
}

Outcome strong_signal() {
  double strong = 0.0, none = 0.0;
  const solver::SolverConfig cfg;  // eta 1e-4, T 400, K 80, lambda 0.1, mu 0.1, mixed init
  for (std::uint64_t s = 0; s < 5; ++s) {
    strong += *solver::run(gaussian(100, 16, 0.95, 0.95, 7000 + s), cfg).overlap_vs_truth / 5.0;
    none += *solver::run(gaussian(100, 16, 0.0, 0.0, 8000 + s), cfg).overlap_vs_truth / 5.0;
  }
  return {strong >= 0.90 && none <= 0.10,
          fmt("mean overlap %.3f at rho=r=0.95 (>= 0.90), %.3f at rho=r=0 (<= 0.10)", strong, none)};
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
    i = j + 1;
  }
  return ranks;
}

double spearman(const std::vector<double>& y) {
  std::vector<double> x(y.size());
  std::iota(x.begin(), x.end(), 1.0);
  const auto ry = average_ranks(y);
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    sxy += (x[k] - mx) * (ry[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (ry[k] - my) * (ry[k] - my);
  }
  return syy == 0.0 ? 0.0 : sxy / std::sqrt(sxx * syy);
}

Outcome phase_structure() {
  experiment::ExperimentGrid g;
  g.model.n = 100;
  g.model.d = 16;
  g.rhos = g.rs = {0.0, 0.2, 0.4, 0.6, 0.8, 0.95};
  g.lambdas = {0.1};
  g.trials = 3;
  g.seed = 1;
  g.record_runtime = false;
  const auto cells = experiment::run_phase_diagram(g);
  const std::size_t m = g.rhos.size();
  std::vector<std::vector<double>> grid(m, std::vector<double>(m));  // [rho][r]
  for (const auto& c : cells) grid[c.rho_index][c.r_index] = c.mean_overlap.value_or(-1.0);

  // A line that is flat within 0.05 (all ~0 or all ~1) has no rank information and counts as saturated.
  std::size_t bad = 0, saturated = 0;
  double worst = 1.0;
  auto judge = [&](const std::vector<double>& line) {
    const auto [lo, hi] = std::minmax_element(line.begin(), line.end());
    if (*hi - *lo <= 0.05) {
      ++saturated;
      return;
    }
    const double s = spearman(line);
    worst = std::min(worst, s);
    if (s < 0.8) ++bad;
  };
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> along_rho(m), along_r(m);
    for (std::size_t j = 0; j < m; ++j) along_rho[j] = grid[j][i], along_r[j] = grid[i][j];
    judge(along_rho);
    judge(along_r);
  }
  const double corner_low = grid[0][0], corner_high = grid[m - 1][m - 1];
  const bool corners = corner_low < 0.1 && corner_high > 0.9;
  return {bad == 0 && corners,
          fmt("%zu/12 lines below Spearman 0.8 (worst %.3f, %zu saturated); corners %.3f / %.3f", bad, worst,
              saturated, corner_low, corner_high)};
}

Outcome threshold_calculators() {
  std::size_t failures = 0;
  double worst_margin = 0.0;
  for (std::size_t n : {100u, 1000u, 3000u})
    for (std::size_t d : {8u, 64u, 512u}) {
      const double rhs = 4.0 * std::log(static_cast<double>(n));
      for (double x : {0.05, 0.1, 0.3, 0.7}) {
        const auto edge_only = theory::threshold_report(n, d, x, 0.0);
        const auto feat_only = theory::threshold_report(n, d, 0.0, x);
        const double e = n * std::log(1.0 / (1.0 - x * x));
        const double v = d * std::log(1.0 / (1.0 - x * x));
        if (std::fabs(edge_only.exact_lhs - e) > 1e-9 * e) ++failures;
        if (std::fabs(feat_only.exact_lhs - v) > 1e-9 * v) ++failures;
        if ((edge_only.exact == theory::Side::Above) != (e >= rhs)) ++failures;
        if ((feat_only.exact == theory::Side::Above) != (v >= rhs)) ++failures;
      }
      for (double rho : {0.0, 0.01, 0.03, 0.06})
        for (auto regime : {theory::Regime::Exact, theory::Regime::Partial}) {
          const auto r = theory::boundary_r(n, d, rho, regime);
          if (!r) continue;
          const auto rep = theory::threshold_report(n, d, rho, *r);
          const double margin = regime == theory::Regime::Exact ? rep.exact_margin : rep.partial_margin;
          worst_margin = std::max(worst_margin, std::fabs(margin));
        }
    }
  return {failures == 0 && worst_margin < 1e-9,
          fmt("%zu reduction mismatches, worst boundary round-trip margin %.3g (limit 1e-9)", failures, worst_margin)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism_and_formats() {
  const fs::path dir = fs::temp_directory_path() / "qpalign_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  experiment::ExperimentGrid g;
  g.model.n = 30;
  g.model.d = 8;
  g.rhos = {0.0, 0.5, 0.9};
  g.rs = {0.0, 0.5, 0.9};
  g.lambdas = {0.1, 0.5};
  g.trials = 2;
  g.seed = 9;
  g.solver.max_iters = 100;
  g.record_runtime = false;
  auto emit = [&](const std::string& tag) {
    std::ofstream csv(dir / (tag + ".csv"), std::ios::binary);
    csv << experiment::kPhaseHeader << '\n';
    const auto cells = experiment::run_phase_diagram(g, [&](const auto& c) { csv << experiment::phase_row(c) << '\n'; });
    std::ofstream ppm(dir / (tag + ".ppm"), std::ios::binary);
    experiment::write_heatmap(ppm, g, cells);
  };
  emit("a");
  g.threads = 2;
  emit("b");
  const bool csv_same = slurp(dir / "a.csv") == slurp(dir / "b.csv");
  const bool ppm_same = slurp(dir / "a.ppm") == slurp(dir / "b.ppm");

  std::size_t round_trips = 0;
  for (ModelKind kind : {ModelKind::GaussianWigner, ModelKind::ErdosRenyi, ModelKind::StudentT}) {
    synth::GenSpec spec;
    spec.params.kind = kind;
    spec.params.n = 50;
    spec.params.d = 7;
    spec.params.rho = 0.6;
    spec.params.r = 0.4;
    spec.seed = 31;
    const io::StoredInstance s{synth::generate(spec), {spec.params, spec.seed}};
    io::write_binary(dir / "inst.bin", s);
    io::write_csv(dir / "inst", s);
    if (io::read_binary(dir / "inst.bin") == s) ++round_trips;
    if (io::read_csv(dir / "inst") == s) ++round_trips;
  }
  fs::remove_all(dir);
  return {csv_same && ppm_same && round_trips == 6,
          fmt("CSV %s, PPM %s across reruns; %zu/6 lossless round trips", csv_same ? "identical" : "DIFFERENT",
              ppm_same ? "identical" : "DIFFERENT", round_trips)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::vector<int> only;
  app.add_option("criteria", only, "Criterion numbers to run (default: all)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "MLE/QAP equivalence", 60, mle_qap_equivalence},
      {2, "gradient check", 10, gradient_check},
      {3, "Hungarian optimality", 30, hungarian_optimality},
      {4, "Sinkhorn feasibility", 10, sinkhorn_feasibility},
      {5, "exact projection", 60, exact_projection},
      {6, "theory-mode monotone descent", 120, theory_descent},
      {7, "strong-signal recovery", 300, strong_signal},
      {8, "monotone phase structure", 900, phase_structure},
      {9, "threshold calculators", 1, threshold_calculators},
      {10, "determinism and formats", 60, determinism_and_formats},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("[%s] %2d %-30s %s; %.2f s (budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", EXCEEDED");
    std::fflush(stdout);
  }
  return failures;
}
