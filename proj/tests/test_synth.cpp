#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qpalign/synth.hpp"
#include "test_support.hpp"

using namespace qpalign;
using namespace qpalign::synth;
using namespace qpalign::testing;

namespace {

GenSpec make_spec(ModelKind kind, std::size_t n, std::size_t d, double rho, double r, std::uint64_t seed,
                  TruthMode truth = TruthMode::UniformRandom) {
  GenSpec s;
  s.params.kind = kind;
  s.params.n = n;
  s.params.d = d;
  s.params.rho = rho;
  s.params.r = r;
  s.seed = seed;
  s.truth = truth;
  return s;
}

// Matched pairs (A1(u,v), A2(pi(u), pi(v))) over u < v.
void matched_edges(const AlignmentInstance& inst, std::vector<double>& a, std::vector<double>& b) {
  const Permutation& pi = *inst.truth;
  for (std::size_t u = 0; u < inst.n; ++u)
    for (std::size_t v = u + 1; v < inst.n; ++v) {
      a.push_back(inst.a1(u, v));
      b.push_back(inst.a2(pi(u), pi(v)));
    }
}

void matched_features(const AlignmentInstance& inst, std::vector<double>& a, std::vector<double>& b) {
  const Permutation& pi = *inst.truth;
  for (std::size_t u = 0; u < inst.n; ++u)
    for (std::size_t c = 0; c < inst.d; ++c) {
      a.push_back(inst.x(u, c));
      b.push_back(inst.y(pi(u), c));
    }
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double worst = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    worst = std::max(worst, std::fabs(double(i) / a.size() - double(j) / b.size()));
  }
  return worst;
}

void check_structure(const AlignmentInstance& inst) {
  CHECK_NOTHROW(inst.validate());
  CHECK(inst.x.rows() == inst.n);
  CHECK(inst.y.cols() == inst.d);
  REQUIRE(inst.truth.has_value());
}

}  // namespace

TEST_CASE("gaussian wigner: strong correlation") {
  double avg = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = gen_gaussian_wigner(make_spec(ModelKind::GaussianWigner, 20, 4, 0.999, 0.999, seed));
    check_structure(inst);
    std::vector<double> a, b;
    matched_edges(inst, a, b);
    CHECK(a.size() == 190);
    avg += pearson(a, b) / 5.0;
  }
  CHECK(avg >= 0.99);
}

TEST_CASE("gaussian wigner: independence and moments") {
  const auto inst = gen_gaussian_wigner(make_spec(ModelKind::GaussianWigner, 100, 16, 0.0, 0.0, 42));
  check_structure(inst);
  std::vector<double> a, b, x, y;
  matched_edges(inst, a, b);
  matched_features(inst, x, y);
  CHECK(std::fabs(pearson(a, b)) <= 0.1);
  CHECK(std::fabs(pearson(x, y)) <= 0.1);
  for (const auto* v : {&a, &b, &x, &y}) {
    const double n = static_cast<double>(v->size());
    CHECK(std::fabs(mean(*v)) <= 5.0 / std::sqrt(n));
    CHECK(std::fabs(variance(*v) - 1.0) <= 5.0 * std::sqrt(2.0 / n));
  }
}

TEST_CASE("gaussian wigner: moderate correlation is recovered") {
  const auto inst = gen_gaussian_wigner(make_spec(ModelKind::GaussianWigner, 150, 20, 0.6, 0.3, 9));
  std::vector<double> a, b, x, y;
  matched_edges(inst, a, b);
  matched_features(inst, x, y);
  CHECK(pearson(a, b) == doctest::Approx(0.6).epsilon(0.05));
  CHECK(pearson(x, y) == doctest::Approx(0.3).epsilon(0.15));
}

TEST_CASE("generators are deterministic in the seed") {
  for (ModelKind kind : {ModelKind::GaussianWigner, ModelKind::ErdosRenyi, ModelKind::StudentT}) {
    const auto spec = make_spec(kind, 30, 3, 0.5, 0.4, 1234);
    const auto first = generate(spec);
    const auto second = generate(spec);
    CHECK(first.a1 == second.a1);
    CHECK(first.a2 == second.a2);
    CHECK(first.x == second.x);
    CHECK(first.y == second.y);
    CHECK(*first.truth == *second.truth);
    auto other = spec;
    other.seed = 1235;
    CHECK_FALSE(generate(other).a1 == first.a1);
  }
}

TEST_CASE("generators reject the wrong kind and bad parameters") {
  CHECK_THROWS_AS(gen_erdos_renyi(make_spec(ModelKind::GaussianWigner, 5, 1, 0.5, 0.5, 1)), UsageError);
  CHECK_THROWS_AS(gen_gaussian_wigner(make_spec(ModelKind::GaussianWigner, 5, 1, -0.5, 0.5, 1)), DomainError);
  auto t = make_spec(ModelKind::StudentT, 5, 1, 0.5, 0.5, 1);
  t.params.nu = 2.0;
  CHECK_THROWS_AS(gen_student_t(t), DomainError);
}

TEST_CASE("bivariate bernoulli law") {
  const auto indep = bernoulli_pair_law(0.5, 0.0);
  CHECK(indep.p11 == doctest::Approx(0.25));
  const auto perfect = bernoulli_pair_law(0.5, 1.0);
  CHECK(perfect.p10 == 0.0);
  CHECK(perfect.p01 == 0.0);
  const auto law = bernoulli_pair_law(0.3, 0.4);
  CHECK(law.p11 + law.p10 + law.p01 + law.p00 == doctest::Approx(1.0));
  CHECK(law.p11 + law.p10 == doctest::Approx(0.3));
  CHECK(law.p11 + law.p01 == doctest::Approx(0.3));
  CHECK_THROWS_AS(bernoulli_pair_law(0.5, -0.1), DomainError);
  CHECK_THROWS_AS(bernoulli_pair_law(0.0, 0.1), DomainError);
}

TEST_CASE("erdos renyi: joint frequencies") {
  auto spec = make_spec(ModelKind::ErdosRenyi, 200, 2, 0.6, 0.5, 77);
  spec.raw_bernoulli = true;
  const auto inst = gen_erdos_renyi(spec);
  check_structure(inst);
  std::vector<double> a, b;
  matched_edges(inst, a, b);
  double both = 0.0, first = 0.0, second = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    both += a[k] * b[k];
    first += a[k];
    second += b[k];
  }
  const double m = static_cast<double>(a.size());
  CHECK(std::fabs(both / m - 0.40) <= 0.03);
  CHECK(std::fabs(first / m - 0.5) <= 0.03);
  CHECK(std::fabs(second / m - 0.5) <= 0.03);
  CHECK(pearson(a, b) == doctest::Approx(0.6).epsilon(0.1));

  spec.params.rho = 0.0;
  spec.params.n = 120;
  const auto indep = gen_erdos_renyi(spec);
  std::vector<double> c, e;
  matched_edges(indep, c, e);
  double joint = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) joint += c[k] * e[k];
  CHECK(std::fabs(joint / c.size() - 0.25) <= 0.03);
}

TEST_CASE("erdos renyi: perfect correlation copies edges") {
  auto spec = make_spec(ModelKind::ErdosRenyi, 60, 2, 0.0, 0.5, 5);
  spec.params.rho = 0.9999999;
  spec.raw_bernoulli = true;
  std::vector<double> a, b;
  matched_edges(gen_erdos_renyi(spec), a, b);
  CHECK(a == b);
}

TEST_CASE("erdos renyi: standardized entries") {
  auto spec = make_spec(ModelKind::ErdosRenyi, 120, 2, 0.3, 0.5, 6);
  spec.params.p = 0.2;
  const auto inst = gen_erdos_renyi(spec);
  const double hi = 0.8 / std::sqrt(0.16), lo = -0.2 / std::sqrt(0.16);
  for (std::size_t i = 0; i < inst.n; ++i)
    for (std::size_t j = 0; j < inst.n; ++j)
      if (i != j) CHECK((inst.a1(i, j) == hi || inst.a1(i, j) == lo));
  std::vector<double> a, b;
  matched_edges(inst, a, b);
  CHECK(std::fabs(mean(a)) <= 5.0 / std::sqrt(double(a.size())));
  CHECK(variance(a) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("student t: unit marginal variance") {
  auto spec = make_spec(ModelKind::StudentT, 142, 2, 0.5, 0.5, 3);
  spec.params.nu = 5.0;
  const auto inst = gen_student_t(spec);
  check_structure(inst);
  std::vector<double> a, b;
  matched_edges(inst, a, b);
  REQUIRE(a.size() >= 10000);
  const double v = variance(a);
  CHECK(v >= 0.8);
  CHECK(v <= 1.25);
  CHECK(pearson(a, b) == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("student t: large dof approaches the gaussian law") {
  auto t = make_spec(ModelKind::StudentT, 200, 4, 0.5, 0.5, 11);
  t.params.nu = 1e6;
  const auto g = make_spec(ModelKind::GaussianWigner, 200, 4, 0.5, 0.5, 12);
  std::vector<double> ta, tb, ga, gb;
  matched_edges(gen_student_t(t), ta, tb);
  matched_edges(gen_gaussian_wigner(g), ga, gb);
  CHECK(ks_distance(ta, ga) <= 0.05);
  CHECK(ks_distance(tb, gb) <= 0.05);
}

TEST_CASE("relabel") {
  const auto base = gaussian_instance(9, 3, 0.5, 0.5, 21, TruthMode::Identity);
  const auto same = relabel(base, Permutation::identity(9));
  CHECK(same.a2 == base.a2);
  CHECK(same.y == base.y);
  CHECK(*same.truth == *base.truth);

  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const auto pi = random_permutation(9, rng);
    const auto moved = relabel(base, pi);
    CHECK_NOTHROW(moved.validate());
    CHECK(*moved.truth == pi);
    const auto back = relabel(moved, pi.inverse());
    CHECK(back.a2 == base.a2);
    CHECK(back.y == base.y);
    CHECK(*back.truth == Permutation::identity(9));
    // Losses evaluated at the composed truth are invariant.
    CHECK(squared_loss(moved, *moved.truth, 0.3) == doctest::Approx(squared_loss(base, *base.truth, 0.3)));
  }
  CHECK_THROWS_AS(relabel(base, Permutation::identity(8)), DimensionError);
}

TEST_CASE("hidden permutation has the fixed-point law of a uniform permutation") {
  const std::size_t n = 10;
  const int reps = 2000;
  double fixed = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    const auto inst = gaussian_instance(n, 1, 0.1, 0.1, 1000 + rep);
    fixed += overlap(*inst.truth, Permutation::identity(n)) * n;
  }
  // Mean 1, variance 1 for the number of fixed points.
  CHECK(std::fabs(fixed / reps - 1.0) <= 4.0 / std::sqrt(double(reps)));
}

TEST_CASE("derived seeds separate streams") {
  CHECK(derive_seed(1, {0}) != derive_seed(1, {1}));
  CHECK(derive_seed(1, {0, 1}) != derive_seed(1, {1, 0}));
  CHECK(derive_seed(5, {2, 3}) == derive_seed(5, {2, 3}));
  Rng a(3), b(3);
  for (int k = 0; k < 10; ++k) CHECK(a.normal() == b.normal());
}

TEST_CASE("rng distributions") {
  Rng rng(2024);
  const int m = 200000;
  double s = 0.0, s2 = 0.0, g = 0.0, c = 0.0;
  std::vector<int> counts(7, 0);
  for (int k = 0; k < m; ++k) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    g += rng.gamma(0.5);
    c += rng.chi_squared(5.0);
    ++counts[rng.index(7)];
  }
  CHECK(std::fabs(s / m) <= 5.0 / std::sqrt(double(m)));
  CHECK(s2 / m == doctest::Approx(1.0).epsilon(0.02));
  CHECK(g / m == doctest::Approx(0.5).epsilon(0.02));
  CHECK(c / m == doctest::Approx(5.0).epsilon(0.02));
  for (int k : counts) CHECK(std::fabs(k / double(m) - 1.0 / 7) <= 0.005);
}
