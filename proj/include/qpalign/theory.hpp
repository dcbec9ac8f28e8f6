#pragma once

// Information-theoretic recovery thresholds for the featured correlated
// Gaussian Wigner model. With
//   edge   = n log(1 / (1 - rho^2))
//   vertex = d log(1 / (1 - r^2))
// partial recovery needs edge + 2 vertex >= (4 + eps) log n and exact recovery
// needs edge + vertex >= (4 + eps) log n. The exact-recovery converse applies
// when edge + vertex + 4 log d <= (4 - eps) log n and r^2 >= 40 / d.

#include <cstddef>
#include <optional>

namespace qpalign::theory {

enum class Regime { Partial, Exact };
enum class Side { Above, Below };

struct ThresholdReport {
  double edge_information = 0.0;    // n log(1/(1-rho^2))
  double vertex_information = 0.0;  // d log(1/(1-r^2))
  double partial_lhs = 0.0;
  double exact_lhs = 0.0;
  double rhs = 0.0;  // 4 log n
  double partial_margin = 0.0;
  double exact_margin = 0.0;
  Side partial = Side::Below;
  Side exact = Side::Below;
  /// exact_lhs + 4 log d - rhs; impossibility of exact recovery is proven only where this is < 0.
  double converse_margin = 0.0;
  /// r^2 >= 40 / d, the condition under which the exact converse holds.
  bool converse_valid = false;
};

/// n log(1/(1-x^2)); +inf at x = 1.
double information(double count, double x);

/// DomainError unless n >= 2, d >= 1 and rho, r in [0, 1].
ThresholdReport threshold_report(std::size_t n, std::size_t d, double rho, double r);

/// The r at which the regime's lhs equals 4 log n for the given rho, i.e.
/// sqrt(1 - exp(-(4 log n - edge) / (c d))) with c = 2 (Partial) or 1 (Exact).
/// Returns nullopt when the edge term alone already exceeds 4 log n.
std::optional<double> boundary_r(std::size_t n, std::size_t d, double rho, Regime regime);

}  // namespace qpalign::theory
