#include "qpalign/oracle.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace qpalign::oracle {
namespace {

// Exhaustive search with lexicographic tie-break. The search is split by the
// image of vertex 0; each branch enumerates its block in lexicographic order and
// the branches are merged in index order, so the winner is schedule independent.
template <typename Score>
OracleResult best_permutation(std::size_t n, Score score, bool maximize) {
  if (n > kMaxOracleN) throw UsageError("oracle: n > 10 refused (factorial enumeration)");
  if (n == 0) return {Permutation::identity(0), 0.0};

  struct Branch {
    std::vector<std::size_t> perm;
    double value;
  };
  std::vector<Branch> branches(n);
  const double worst = maximize ? -std::numeric_limits<double>::infinity()
                                : std::numeric_limits<double>::infinity();

#pragma omp parallel for schedule(dynamic)
  for (std::size_t first = 0; first < n; ++first) {
    std::vector<std::size_t> perm(n);
    perm[0] = first;
    std::size_t k = 1;
    for (std::size_t v = 0; v < n; ++v)
      if (v != first) perm[k++] = v;
    Branch best{perm, worst};
    do {
      const double s = score(perm);
      if (maximize ? s > best.value : s < best.value) best = {perm, s};
    } while (std::next_permutation(perm.begin() + 1, perm.end()));
    branches[first] = std::move(best);
  }

  std::size_t win = 0;
  for (std::size_t b = 1; b < n; ++b) {
    const double v = branches[b].value;
    if (maximize ? v > branches[win].value : v < branches[win].value) win = b;
  }
  return {Permutation(branches[win].perm), branches[win].value};
}

}  // namespace

OracleResult mle_exact(const AlignmentInstance& inst, double rho, double r) {
  if (inst.n > kMaxOracleN) throw UsageError("mle_exact: n > 10 refused");
  phi(rho), phi(r);  // domain checks before the enumeration
  if (!(rho > 0.0) || !(r > 0.0)) throw DomainError("mle_exact: rho and r must lie in (0, 1)");
  return best_permutation(
      inst.n,
      [&](const std::vector<std::size_t>& p) {
        return similarity_score(inst, Permutation(p), rho, r);
      },
      true);
}

OracleResult qap_min_exact(const AlignmentInstance& inst, double lambda) {
  if (inst.n > kMaxOracleN) throw UsageError("qap_min_exact: n > 10 refused");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("qap_min_exact: lambda must lie in [0, 1]");
  return best_permutation(
      inst.n,
      [&](const std::vector<std::size_t>& p) { return squared_loss(inst, Permutation(p), lambda); },
      false);
}

}  // namespace qpalign::oracle
