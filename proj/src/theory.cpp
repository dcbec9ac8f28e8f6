#include "qpalign/theory.hpp"

#include <cmath>
#include <limits>

#include "qpalign/errors.hpp"

namespace qpalign::theory {

double information(double count, double x) {
  if (x >= 1.0) return std::numeric_limits<double>::infinity();
  return -count * std::log1p(-x * x);
}

ThresholdReport threshold_report(std::size_t n, std::size_t d, double rho, double r) {
  if (n < 2) throw DomainError("threshold_report: n must be >= 2");
  if (d < 1) throw DomainError("threshold_report: d must be >= 1");
  if (!(rho >= 0.0 && rho <= 1.0) || !(r >= 0.0 && r <= 1.0))
    throw DomainError("threshold_report: rho and r must lie in [0, 1]");
  ThresholdReport rep;
  const double nn = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  rep.edge_information = information(nn, rho);
  rep.vertex_information = information(dd, r);
  rep.partial_lhs = rep.edge_information + 2.0 * rep.vertex_information;
  rep.exact_lhs = rep.edge_information + rep.vertex_information;
  rep.rhs = 4.0 * std::log(nn);
  rep.partial_margin = rep.partial_lhs - rep.rhs;
  rep.exact_margin = rep.exact_lhs - rep.rhs;
  rep.partial = rep.partial_margin >= 0.0 ? Side::Above : Side::Below;
  rep.exact = rep.exact_margin >= 0.0 ? Side::Above : Side::Below;
  rep.converse_margin = rep.exact_lhs + 4.0 * std::log(dd) - rep.rhs;
  rep.converse_valid = r * r >= 40.0 / dd;
  return rep;
}

std::optional<double> boundary_r(std::size_t n, std::size_t d, double rho, Regime regime) {
  if (n < 2 || d < 1) throw DomainError("boundary_r: need n >= 2 and d >= 1");
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("boundary_r: rho must lie in [0, 1]");
  const double rhs = 4.0 * std::log(static_cast<double>(n));
  const double edge = information(static_cast<double>(n), rho);
  if (edge > rhs) return std::nullopt;
  const double c = regime == Regime::Partial ? 2.0 : 1.0;
  const double needed = (rhs - edge) / (c * static_cast<double>(d));
  return std::sqrt(-std::expm1(-needed));
}

}  // namespace qpalign::theory
