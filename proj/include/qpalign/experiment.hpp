#pragma once

// Experiment drivers behind the command-line front end: phase-diagram sweeps,
// empirical-vs-theoretical boundary curves and the oracle cross-check suite.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qpalign/core.hpp"
#include "qpalign/solver.hpp"
#include "qpalign/synth.hpp"

namespace qpalign::experiment {

struct ExperimentGrid {
  ModelParams model;  // n, d, kind, p, nu; rho and r are overwritten per cell
  std::vector<double> rhos;
  std::vector<double> rs;
  std::vector<double> lambdas;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  solver::SolverConfig solver;  // lambda is overwritten per cell
  std::size_t threads = 0;      // 0: one per logical CPU
  bool record_runtime = true;   // false writes 0 so reruns are byte-identical

  void validate() const;
  std::size_t cell_count() const { return rhos.size() * rs.size() * lambdas.size(); }
};

/// Seed of the instance behind (rho index, r index, trial). Lambda is not part of
/// the key, so every lambda in a sweep sees the same instances.
std::uint64_t trial_seed(std::uint64_t base, std::size_t rho_index, std::size_t r_index,
                         std::size_t trial);

struct PhaseCell {
  std::size_t rho_index = 0, r_index = 0, lambda_index = 0;
  double rho = 0.0, r = 0.0, lambda = 0.0;
  std::size_t trials = 0;
  std::size_t errors = 0;             // trials that threw (divergence, bad params)
  std::optional<double> mean_overlap;  // over successful trials
  double std_overlap = 0.0;            // sample standard deviation
  double mean_iters = 0.0;
  double mean_runtime_ms = 0.0;
};

/// Runs every (rho, r, lambda) cell, rho outermost and lambda innermost. Cells are
/// handed to `on_cell` in that order as soon as they and all earlier cells finish.
std::vector<PhaseCell> run_phase_diagram(const ExperimentGrid& grid,
                                         const std::function<void(const PhaseCell&)>& on_cell = {});

inline constexpr const char* kPhaseHeader =
    "rho,r,lambda,trials,mean_overlap,std_overlap,mean_iters,mean_runtime_ms,errors";
inline constexpr const char* kTraceHeader = "iter,f";
inline constexpr const char* kThresholdHeader =
    "rho,r_empirical,r_exact_theory,r_partial_theory,converse_valid";

std::string format_number(double v);
std::string phase_row(const PhaseCell& cell);

/// Binary PPM (P6), one pixel per cell: rho along x, r along y (largest r on top),
/// one panel per lambda laid out left to right. Cells without a value are grey.
void write_heatmap(std::ostream& out, const ExperimentGrid& grid, const std::vector<PhaseCell>& cells);

struct Rgb {
  std::uint8_t r, g, b;
};
/// Fixed five-stop viridis-like ramp over [0, 1].
Rgb palette(double value);

struct ThresholdRow {
  double rho = 0.0;
  std::optional<double> r_empirical;
  double r_exact_theory = 0.0;    // 0 when the edge term alone clears the threshold
  double r_partial_theory = 0.0;
  bool converse_valid = false;
};

/// Requires exactly one lambda. For each rho, the smallest grid r whose mean
/// overlap reaches `success`, next to the theoretical boundaries.
std::vector<ThresholdRow> threshold_curve(const ExperimentGrid& grid, const std::vector<PhaseCell>& cells,
                                          double success);
std::string threshold_row(const ThresholdRow& row);

struct OracleCheckConfig {
  std::size_t count = 50;
  std::size_t n = 6;
  std::size_t d = 3;
  std::uint64_t seed = 1;
  double rho_lo = 0.1, rho_hi = 0.9;
  double r_lo = 0.1, r_hi = 0.9;
  bool flip_gradient_sign = false;  // mutation hook: the gradient check must catch it
};

struct OracleCheckReport {
  std::size_t cases = 0;
  std::size_t mle_failures = 0;
  std::size_t lap_failures = 0;
  std::size_t gradient_failures = 0;
  std::optional<std::uint64_t> first_failing_seed;
  double worst_gradient_error = 0.0;

  bool passed() const { return mle_failures + lap_failures + gradient_failures == 0; }
};

/// MLE/squared-loss equivalence, Hungarian vs brute force, and gradient vs central
/// differences on `count` seeded cases. UsageError for n > 7.
OracleCheckReport oracle_check(const OracleCheckConfig& cfg);

inline constexpr std::size_t kMaxOracleCheckN = 7;

/// Central-difference gradient of regularized_objective with step h.
Matrix finite_difference_gradient(const AlignmentInstance& inst, const Matrix& pi, double lambda,
                                  double mu, double h = 1e-6);

/// ||a - b||_F / max(||b||_F, 1e-12).
double relative_error(const Matrix& a, const Matrix& b);

}  // namespace qpalign::experiment
