#include "qpalign/synth.hpp"

#include <cmath>
#include <numeric>

namespace qpalign::synth {
namespace {

AlignmentInstance empty_instance(const ModelParams& p) {
  AlignmentInstance inst;
  inst.n = p.n;
  inst.d = p.d;
  inst.a1 = Matrix(p.n, p.n);
  inst.a2 = Matrix(p.n, p.n);
  inst.x = Matrix(p.n, p.d);
  inst.y = Matrix(p.n, p.d);
  return inst;
}

void set_edge(AlignmentInstance& inst, std::size_t i, std::size_t j, double w1, double w2) {
  inst.a1(i, j) = inst.a1(j, i) = w1;
  inst.a2(i, j) = inst.a2(j, i) = w2;
}

// Correlated standard normal pair (g, rho g + sqrt(1 - rho^2) xi).
struct GaussianPair {
  double first, second;
};

GaussianPair gaussian_pair(Rng& rng, double corr) {
  const double g = rng.normal();
  const double xi = rng.normal();
  return {g, corr * g + std::sqrt(1.0 - corr * corr) * xi};
}

void fill_gaussian_features(AlignmentInstance& inst, Rng& rng, double r) {
  for (std::size_t u = 0; u < inst.n; ++u)
    for (std::size_t c = 0; c < inst.d; ++c) {
      const auto [xv, yv] = gaussian_pair(rng, r);
      inst.x(u, c) = xv;
      inst.y(u, c) = yv;
    }
}

AlignmentInstance finish(AlignmentInstance inst, const GenSpec& spec) {
  inst.truth = Permutation::identity(inst.n);
  if (spec.truth == TruthMode::UniformRandom) {
    Rng truth_rng(derive_seed(spec.seed, {1}));
    return relabel(inst, random_permutation(inst.n, truth_rng));
  }
  return inst;
}

void require_kind(const GenSpec& spec, ModelKind kind, const char* who) {
  if (spec.params.kind != kind) throw UsageError(std::string(who) + ": wrong model kind");
  spec.params.validate();
}

}  // namespace

AlignmentInstance gen_gaussian_wigner(const GenSpec& spec) {
  require_kind(spec, ModelKind::GaussianWigner, "gen_gaussian_wigner");
  const auto& p = spec.params;
  AlignmentInstance inst = empty_instance(p);
  Rng rng(spec.seed);
  for (std::size_t i = 0; i < p.n; ++i)
    for (std::size_t j = i + 1; j < p.n; ++j) {
      const auto [w1, w2] = gaussian_pair(rng, p.rho);
      set_edge(inst, i, j, w1, w2);
    }
  fill_gaussian_features(inst, rng, p.r);
  return finish(std::move(inst), spec);
}

BernoulliPairLaw bernoulli_pair_law(double p, double rho) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("bernoulli_pair_law: p must lie in (0, 1)");
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("bernoulli_pair_law: rho must lie in [0, 1]");
  const double cov = rho * p * (1.0 - p);
  return {p * p + cov, p * (1.0 - p) - cov, p * (1.0 - p) - cov, (1.0 - p) * (1.0 - p) + cov};
}

AlignmentInstance gen_erdos_renyi(const GenSpec& spec) {
  require_kind(spec, ModelKind::ErdosRenyi, "gen_erdos_renyi");
  const auto& p = spec.params;
  const BernoulliPairLaw law = bernoulli_pair_law(p.p, p.rho);
  const double sd = std::sqrt(p.p * (1.0 - p.p));
  auto encode = [&](int e) { return spec.raw_bernoulli ? double(e) : (e - p.p) / sd; };

  AlignmentInstance inst = empty_instance(p);
  Rng rng(spec.seed);
  for (std::size_t i = 0; i < p.n; ++i)
    for (std::size_t j = i + 1; j < p.n; ++j) {
      const double u = rng.uniform01();
      int e1, e2;
      if (u < law.p11) {
        e1 = 1, e2 = 1;
      } else if (u < law.p11 + law.p10) {
        e1 = 1, e2 = 0;
      } else if (u < law.p11 + law.p10 + law.p01) {
        e1 = 0, e2 = 1;
      } else {
        e1 = 0, e2 = 0;
      }
      set_edge(inst, i, j, encode(e1), encode(e2));
    }
  fill_gaussian_features(inst, rng, p.r);
  return finish(std::move(inst), spec);
}

AlignmentInstance gen_student_t(const GenSpec& spec) {
  require_kind(spec, ModelKind::StudentT, "gen_student_t");
  const auto& p = spec.params;
  const double nu = p.nu;
  const double unit_var = std::sqrt((nu - 2.0) / nu);
  // Elliptical bivariate t: one chi-square mixing draw shared by both members of a pair.
  auto t_pair = [&](Rng& rng, double corr) {
    const auto [g1, g2] = gaussian_pair(rng, corr);
    const double s = rng.chi_squared(nu) / nu;
    const double k = unit_var / std::sqrt(s);
    return GaussianPair{g1 * k, g2 * k};
  };

  AlignmentInstance inst = empty_instance(p);
  Rng rng(spec.seed);
  for (std::size_t i = 0; i < p.n; ++i)
    for (std::size_t j = i + 1; j < p.n; ++j) {
      const auto [w1, w2] = t_pair(rng, p.rho);
      set_edge(inst, i, j, w1, w2);
    }
  for (std::size_t u = 0; u < p.n; ++u)
    for (std::size_t c = 0; c < p.d; ++c) {
      const auto [xv, yv] = t_pair(rng, p.r);
      inst.x(u, c) = xv;
      inst.y(u, c) = yv;
    }
  return finish(std::move(inst), spec);
}

AlignmentInstance generate(const GenSpec& spec) {
  switch (spec.params.kind) {
    case ModelKind::GaussianWigner: return gen_gaussian_wigner(spec);
    case ModelKind::ErdosRenyi: return gen_erdos_renyi(spec);
    case ModelKind::StudentT: return gen_student_t(spec);
  }
  throw UsageError("generate: unknown model kind");
}

AlignmentInstance relabel(const AlignmentInstance& inst, const Permutation& pi) {
  if (pi.size() != inst.n) throw DimensionError("relabel: permutation length differs from n");
  AlignmentInstance out = inst;
  for (std::size_t i = 0; i < inst.n; ++i) {
    for (std::size_t j = 0; j < inst.n; ++j) out.a2(pi(i), pi(j)) = inst.a2(i, j);
    for (std::size_t c = 0; c < inst.d; ++c) out.y(pi(i), c) = inst.y(i, c);
  }
  out.truth = pi.compose(inst.truth ? *inst.truth : Permutation::identity(inst.n));
  return out;
}

Permutation random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(m[i - 1], m[rng.index(i)]);
  return Permutation(std::move(m));
}

}  // namespace qpalign::synth
