#pragma once

// Seeded generators for correlated attributed graph pairs.
//
// Every generator first draws the pair under the identity matching and then,
// for TruthMode::UniformRandom, relabels G2 by a uniformly random permutation
// drawn from an independent child stream. Draw order (pinned for reproducibility):
//   edges:    for i < j in row-major order, the G1 variate then the partner noise
//   features: for each vertex u, for each coordinate c, the X variate then the noise
//   truth:    Fisher-Yates on Rng(derive_seed(seed, {1}))

#include <cstdint>

#include "qpalign/core.hpp"
#include "qpalign/rng.hpp"

namespace qpalign::synth {

enum class TruthMode : std::uint32_t { Identity = 0, UniformRandom = 1 };

struct GenSpec {
  ModelParams params;
  std::uint64_t seed = 0;
  TruthMode truth = TruthMode::UniformRandom;
  /// ErdosRenyi only: emit 0/1 indicators instead of standardized (E - p) / sqrt(p (1 - p)).
  bool raw_bernoulli = false;
};

AlignmentInstance gen_gaussian_wigner(const GenSpec& spec);
AlignmentInstance gen_erdos_renyi(const GenSpec& spec);
AlignmentInstance gen_student_t(const GenSpec& spec);
/// Dispatch on spec.params.kind.
AlignmentInstance generate(const GenSpec& spec);

/// Relabel G2 by pi: A2'(pi(i), pi(j)) = A2(i, j), Y' row pi(i) = Y row i, truth' = pi o truth.
AlignmentInstance relabel(const AlignmentInstance& inst, const Permutation& pi);

Permutation random_permutation(std::size_t n, Rng& rng);

/// Joint law of a matched Bernoulli edge pair: {P(1,1), P(1,0), P(0,1), P(0,0)}.
struct BernoulliPairLaw {
  double p11, p10, p01, p00;
};
BernoulliPairLaw bernoulli_pair_law(double p, double rho);

}  // namespace qpalign::synth
