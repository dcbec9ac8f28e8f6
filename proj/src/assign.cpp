#include "qpalign/assign.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace qpalign::assign {
namespace {

void check_input(const Matrix& m, const char* who) {
  require_square(m, who);
  if (!m.all_finite()) throw UsageError(std::string(who) + ": non-finite entries");
}

}  // namespace

double assignment_value(const Matrix& m, const Permutation& pi) {
  if (pi.size() != m.rows()) throw DimensionError("assignment_value: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) s += m(i, pi(i));
  return s;
}

Permutation solve_lap_max(const Matrix& m) {
  check_input(m, "solve_lap_max");
  const std::size_t n = m.rows();
  if (n == 0) return Permutation::identity(0);
  const double top = *std::max_element(m.flat().begin(), m.flat().end());
  auto cost = [&](std::size_t i, std::size_t j) { return top - m(i - 1, j - 1); };

  // 1-based; row_of[j] is the row assigned to column j, index 0 is the virtual source.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> row_of(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    row_of[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = row_of[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> map(n);
  for (std::size_t j = 1; j <= n; ++j) map[row_of[j] - 1] = j - 1;
  return Permutation(std::move(map));
}

Permutation brute_force_lap_max(const Matrix& m) {
  check_input(m, "brute_force_lap_max");
  const std::size_t n = m.rows();
  if (n > kMaxBruteForceN) throw UsageError("brute_force_lap_max: n > 10 refused");
  std::vector<std::size_t> perm(n), best(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  best = perm;
  double best_value = -std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += m(i, perm[i]);
    if (s > best_value) {
      best_value = s;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return Permutation(std::move(best));
}

}  // namespace qpalign::assign
