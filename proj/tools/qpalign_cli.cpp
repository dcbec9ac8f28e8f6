// qpalign: command-line front end for graph alignment experiments.
//
//   qpalign generate        write a synthetic correlated instance
//   qpalign align           run the relaxation solver on an instance
//   qpalign phase-diagram   overlap over a (rho, r, lambda) grid, CSV + optional PPM
//   qpalign threshold-curve empirical vs information-theoretic boundaries
//   qpalign oracle-check    exhaustive cross-checks on small instances
//
// Exit codes: 0 ok, 2 usage, 3 I/O, 4 solver divergence, 5 oracle-check failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qpalign/birkhoff.hpp"
#include "qpalign/experiment.hpp"
#include "qpalign/instance_io.hpp"
#include "qpalign/solver.hpp"
#include "qpalign/synth.hpp"

namespace {

using namespace qpalign;

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitDivergence = 4;
constexpr int kExitOracle = 5;

struct SolverFlags {
  std::string preset = "synthetic";
  std::optional<double> lambda, mu, eta, tol, nu_init;
  std::optional<std::size_t> iters, sinkhorn_iters;
  std::optional<std::uint64_t> init_seed;
  bool bb = false;
  std::string init = "mixed";
  std::string projection = "sinkhorn";

  void attach(CLI::App* app, bool with_lambda) {
    app->add_option("--preset", preset, "Hyperparameter profile: synthetic, acm-dblp, douban, spatial");
    if (with_lambda) app->add_option("--lambda", lambda, "Edge/feature weight in [0,1]");
    app->add_option("--mu", mu, "Binary regularizer weight");
    app->add_option("--eta", eta, "Step size (initial step with --bb)");
    app->add_flag("--bb", bb, "Barzilai-Borwein step sizes");
    app->add_option("--T", iters, "Maximum iterations");
    app->add_option("--K", sinkhorn_iters, "Sinkhorn sweeps per projection");
    app->add_option("--tol", tol, "Stop when successive objectives differ by less than this");
    app->add_option("--init", init, "Initialization: mixed, random, uniform");
    app->add_option("--nu-init", nu_init, "Degree weight of the mixed-similarity initialization");
    app->add_option("--init-seed", init_seed, "Seed for --init random");
    app->add_option("--projection", projection, "sinkhorn or exact");
  }

  solver::SolverConfig build() const {
    solver::SolverConfig cfg = solver::preset(preset);
    if (lambda) cfg.lambda = *lambda;
    if (mu) cfg.mu = *mu;
    const double base_eta = std::visit([](auto s) {
      if constexpr (std::is_same_v<decltype(s), solver::FixedStep>) return s.eta;
      else return s.eta0;
    }, cfg.step);
    const double step = eta.value_or(base_eta);
    if (bb) cfg.step = solver::BarzilaiBorwein{step};
    else cfg.step = solver::FixedStep{step};
    if (iters) cfg.max_iters = *iters;
    if (sinkhorn_iters) cfg.sinkhorn_iters = *sinkhorn_iters;
    if (tol) cfg.tol = *tol;
    if (init == "mixed") cfg.init = solver::MixedSimilarityInit{nu_init.value_or(0.1)};
    else if (init == "random") cfg.init = solver::RandomInit{init_seed.value_or(0)};
    else if (init == "uniform") cfg.init = solver::UniformInit{};
    else throw UsageError("unknown --init '" + init + "'");
    if (projection == "sinkhorn") cfg.projection = solver::Projection::Sinkhorn;
    else if (projection == "exact") cfg.projection = solver::Projection::ExactEuclidean;
    else throw UsageError("unknown --projection '" + projection + "'");
    cfg.validate();
    return cfg;
  }
};

struct GridFlags {
  std::string config;
  std::string model = "gw";
  std::size_t n = 100, d = 16;
  double p = 0.5, nu = 5.0;
  std::vector<double> rhos{0.0, 0.2, 0.4, 0.6, 0.8, 0.95};
  std::vector<double> rs{0.0, 0.2, 0.4, 0.6, 0.8, 0.95};
  std::vector<double> lambdas{0.1};
  std::size_t trials = 3;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::size_t max_n = 4000;
  bool no_runtime = false;
  SolverFlags solver;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "Flat key=value file; keys mirror these flags");
    app->add_option("--model", model, "gw, er or t");
    app->add_option("--n", n, "Vertices");
    app->add_option("--d", d, "Feature dimension");
    app->add_option("--p", p, "Erdos-Renyi edge probability");
    app->add_option("--nu", nu, "Student-t degrees of freedom");
    app->add_option("--rho", rhos, "Edge correlations (comma separated)")->delimiter(',');
    app->add_option("--r", rs, "Feature correlations (comma separated)")->delimiter(',');
    app->add_option("--lambda", lambdas, "Lambda values (comma separated)")->delimiter(',');
    app->add_option("--trials", trials, "Trials per cell");
    app->add_option("--seed", seed, "Base seed");
    app->add_option("--threads", threads, "Worker threads (0 = logical CPUs)");
    app->add_option("--max-n", max_n, "Refuse grids with more vertices than this");
    app->add_flag("--no-runtime", no_runtime, "Write 0 for runtime so reruns are byte-identical");
    solver.attach(app, false);
  }

  experiment::ExperimentGrid build() const {
    if (n > max_n) throw UsageError("n exceeds --max-n");
    experiment::ExperimentGrid g;
    g.model.kind = io::parse_model(model);
    g.model.n = n;
    g.model.d = d;
    g.model.p = p;
    g.model.nu = nu;
    g.rhos = rhos;
    g.rs = rs;
    g.lambdas = lambdas;
    g.trials = trials;
    g.seed = seed;
    g.threads = threads;
    g.record_runtime = !no_runtime;
    g.solver = solver.build();
    g.validate();
    return g;
  }
};

// Applies key=value lines from a config file to options not given on the command line.
void apply_config(CLI::App* app, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "config") throw UsageError("config files cannot nest");
    CLI::Option* opt = app->get_option_no_throw("--" + key);
    if (!opt) throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

std::string join_perm(const Permutation& p) {
  std::ostringstream s;
  for (std::size_t i = 0; i < p.size(); ++i) s << (i ? " " : "") << p(i);
  return s.str();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

int cmd_generate(const std::string& model, std::size_t n, std::size_t d, double rho, double r, double p,
                 double nu, std::uint64_t seed, const std::string& truth, bool raw, const std::string& out,
                 const std::string& format) {
  synth::GenSpec spec;
  spec.params.kind = io::parse_model(model);
  spec.params.n = n;
  spec.params.d = d;
  spec.params.rho = rho;
  spec.params.r = r;
  spec.params.p = p;
  spec.params.nu = nu;
  spec.seed = seed;
  spec.raw_bernoulli = raw;
  if (truth == "identity") spec.truth = synth::TruthMode::Identity;
  else if (truth == "random") spec.truth = synth::TruthMode::UniformRandom;
  else throw UsageError("--truth must be identity or random");
  spec.params.validate();

  io::StoredInstance stored{synth::generate(spec), {spec.params, seed}};
  if (format == "bin") io::write_binary(out, stored);
  else if (format == "csv") io::write_csv(out, stored);
  else throw UsageError("--format must be bin or csv");
  std::cout << "n=" << n << " d=" << d << " model=" << io::model_name(spec.params.kind) << " seed=" << seed
            << " -> " << out << '\n';
  return 0;
}

int cmd_align(const std::string& path, const SolverFlags& flags, const std::string& perm_out,
              const std::string& trace_out, std::size_t max_n) {
  const auto stored = io::read_any(path);
  const auto& inst = stored.instance;
  if (inst.n > max_n) throw UsageError("instance exceeds --max-n");
  const solver::SolverConfig cfg = flags.build();
  const solver::SolveResult res = solver::run(inst, cfg);

  std::cout << "estimate: " << join_perm(res.estimate) << '\n';
  std::cout << "iterations: " << res.iterations_used << " ("
            << (res.stopped_by == solver::StopReason::Tolerance ? "tolerance" : "max-iters") << ")\n";
  std::cout << "final objective: " << experiment::format_number(res.objective_trace.back()) << '\n';
  std::cout << "feasibility residual: " << experiment::format_number(res.final_relaxed.residual()) << '\n';
  if (res.overlap_vs_truth) std::cout << "overlap: " << experiment::format_number(*res.overlap_vs_truth) << '\n';

  if (!perm_out.empty()) {
    auto out = open_output(perm_out);
    out << "i,pi\n";
    for (std::size_t i = 0; i < res.estimate.size(); ++i) out << i << ',' << res.estimate(i) << '\n';
  }
  if (!trace_out.empty()) {
    auto out = open_output(trace_out);
    out << experiment::kTraceHeader << '\n';
    for (std::size_t t = 0; t < res.objective_trace.size(); ++t)
      out << t << ',' << experiment::format_number(res.objective_trace[t]) << '\n';
  }
  return 0;
}

int cmd_phase(const experiment::ExperimentGrid& grid, const std::string& out_path, const std::string& ppm_path) {
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file = open_output(out_path);
    out = &file;
  }
  *out << experiment::kPhaseHeader << '\n' << std::flush;
  const auto cells = experiment::run_phase_diagram(grid, [&](const experiment::PhaseCell& c) {
    *out << experiment::phase_row(c) << '\n' << std::flush;
  });
  if (!ppm_path.empty()) {
    auto ppm = open_output(ppm_path);
    experiment::write_heatmap(ppm, grid, cells);
  }
  return 0;
}

int cmd_threshold(const experiment::ExperimentGrid& grid, double success, const std::string& out_path,
                  const std::string& phase_out) {
  if (grid.lambdas.size() != 1) throw UsageError("threshold-curve needs exactly one --lambda");
  std::ofstream phase;
  if (!phase_out.empty()) {
    phase = open_output(phase_out);
    phase << experiment::kPhaseHeader << '\n' << std::flush;
  }
  const auto cells = experiment::run_phase_diagram(grid, [&](const experiment::PhaseCell& c) {
    if (phase.is_open()) phase << experiment::phase_row(c) << '\n' << std::flush;
  });
  const auto rows = experiment::threshold_curve(grid, cells, success);
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file = open_output(out_path);
    out = &file;
  }
  *out << experiment::kThresholdHeader << '\n';
  for (const auto& row : rows) *out << experiment::threshold_row(row) << '\n';
  return 0;
}

int cmd_oracle(const experiment::OracleCheckConfig& cfg) {
  const auto rep = experiment::oracle_check(cfg);
  std::cout << "cases: " << rep.cases << '\n'
            << "mle/squared-loss equivalence failures: " << rep.mle_failures << '\n'
            << "hungarian vs brute force failures: " << rep.lap_failures << '\n'
            << "gradient finite-difference failures: " << rep.gradient_failures
            << " (worst relative error " << experiment::format_number(rep.worst_gradient_error) << ")\n";
  if (!rep.passed()) {
    std::cout << "FAIL; reproduce with seed " << *rep.first_failing_seed << '\n';
    return kExitOracle;
  }
  std::cout << "PASS\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadratic-programming alignment of attributed graphs"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic correlated instance");
  std::string g_model = "gw", g_truth = "random", g_out, g_format = "bin";
  std::size_t g_n = 100, g_d = 16;
  double g_rho = 0.8, g_r = 0.5, g_p = 0.5, g_nu = 5.0;
  std::uint64_t g_seed = 0;
  bool g_raw = false;
  gen->add_option("--model", g_model, "gw, er or t");
  gen->add_option("--n", g_n, "Vertices");
  gen->add_option("--d", g_d, "Feature dimension");
  gen->add_option("--rho", g_rho, "Edge correlation in [0,1)");
  gen->add_option("--r", g_r, "Feature correlation in [0,1)");
  gen->add_option("--p", g_p, "Erdos-Renyi edge probability");
  gen->add_option("--nu", g_nu, "Student-t degrees of freedom (> 2)");
  gen->add_option("--seed", g_seed, "Random seed");
  gen->add_option("--truth", g_truth, "identity or random");
  gen->add_flag("--raw-bernoulli", g_raw, "Erdos-Renyi: keep 0/1 weights instead of standardizing");
  gen->add_option("-o,--out", g_out, "Output file (bin) or prefix (csv)")->required();
  gen->add_option("--format", g_format, "bin or csv");

  // align
  auto* align = app.add_subcommand("align", "Align the two graphs of an instance");
  std::string a_path, a_perm, a_trace;
  std::size_t a_max_n = 4000;
  SolverFlags a_flags;
  align->add_option("instance", a_path, "Instance file or CSV prefix")->required();
  a_flags.attach(align, true);
  align->add_option("--perm-out", a_perm, "Write the estimate as CSV (i,pi)");
  align->add_option("--trace", a_trace, "Write the objective trace as CSV (iter,f)");
  align->add_option("--max-n", a_max_n, "Refuse instances with more vertices than this");

  // phase-diagram
  auto* phase = app.add_subcommand("phase-diagram", "Mean overlap over a correlation grid");
  GridFlags p_grid;
  std::string p_out, p_ppm;
  p_grid.attach(phase);
  phase->add_option("-o,--out", p_out, "CSV output (stdout when omitted)");
  phase->add_option("--ppm", p_ppm, "Binary PPM heatmap output");

  // threshold-curve
  auto* thresh = app.add_subcommand("threshold-curve", "Empirical recovery boundary vs theory");
  GridFlags t_grid;
  std::string t_out, t_phase;
  double t_success = 0.9;
  t_grid.attach(thresh);
  thresh->add_option("--success", t_success, "Mean-overlap level counted as recovery");
  thresh->add_option("-o,--out", t_out, "CSV output (stdout when omitted)");
  thresh->add_option("--phase-out", t_phase, "Also write the underlying phase CSV");

  // oracle-check
  auto* orc = app.add_subcommand("oracle-check", "Exhaustive cross-checks on small instances");
  experiment::OracleCheckConfig o_cfg;
  orc->add_option("--count", o_cfg.count, "Number of seeded cases");
  orc->add_option("--n", o_cfg.n, "Vertices (<= 7)");
  orc->add_option("--d", o_cfg.d, "Feature dimension");
  orc->add_option("--seed", o_cfg.seed, "Base seed");
  orc->add_option("--rho-min", o_cfg.rho_lo);
  orc->add_option("--rho-max", o_cfg.rho_hi);
  orc->add_option("--r-min", o_cfg.r_lo);
  orc->add_option("--r-max", o_cfg.r_hi);
  orc->add_flag("--flip-gradient-sign", o_cfg.flip_gradient_sign, "Debug hook: corrupt the gradient");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_generate(g_model, g_n, g_d, g_rho, g_r, g_p, g_nu, g_seed, g_truth, g_raw, g_out, g_format);
    if (*align) return cmd_align(a_path, a_flags, a_perm, a_trace, a_max_n);
    if (*phase) {
      if (!p_grid.config.empty()) apply_config(phase, p_grid.config);
      return cmd_phase(p_grid.build(), p_out, p_ppm);
    }
    if (*thresh) {
      if (!t_grid.config.empty()) apply_config(thresh, t_grid.config);
      return cmd_threshold(t_grid.build(), t_success, t_out, t_phase);
    }
    if (*orc) return cmd_oracle(o_cfg);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const solver::DivergenceError& e) {
    std::cerr << "error: " << e.what() << " (after " << e.trace().size() << " iterations)\n";
    return kExitDivergence;
  } catch (const birkhoff::ProjectionError& e) {
    std::cerr << "error: " << e.what() << " (residual " << e.residual() << ")\n";
    return kExitDivergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
