#pragma once

#include "qpalign/core.hpp"

namespace qpalign::assign {

/// Permutation maximizing sum_i M(i, pi(i)), by the O(n^3) Hungarian method
/// (shortest augmenting paths with row/column potentials) on cost = max(M) - M.
/// Ties resolve deterministically for a fixed input but not necessarily to the
/// lexicographically smallest optimum. UsageError on non-finite entries.
Permutation solve_lap_max(const Matrix& m);

/// Exhaustive maximizer over all n! permutations in lexicographic order; the
/// first optimum found wins, i.e. ties go to the lexicographically smallest.
/// UsageError for n > 10.
Permutation brute_force_lap_max(const Matrix& m);

/// sum_i M(i, pi(i)).
double assignment_value(const Matrix& m, const Permutation& pi);

inline constexpr std::size_t kMaxBruteForceN = 10;

}  // namespace qpalign::assign
