#pragma once

#include "qpalign/core.hpp"

namespace qpalign::oracle {

inline constexpr std::size_t kMaxOracleN = 10;

struct OracleResult {
  Permutation permutation;
  double value = 0.0;
};

/// Exhaustive maximum-likelihood matching: argmax of similarity_score over all
/// n! permutations. Ties go to the lexicographically smallest permutation.
/// UsageError for n > 10.
OracleResult mle_exact(const AlignmentInstance& inst, double rho, double r);

/// Exhaustive argmin of squared_loss(., lambda), same tie-break and cap.
OracleResult qap_min_exact(const AlignmentInstance& inst, double lambda);

}  // namespace qpalign::oracle
