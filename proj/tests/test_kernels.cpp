#include <doctest.h>

#include <vector>

#include "qpalign/kernels.hpp"
#include "test_support.hpp"

using namespace qpalign;
using qpalign::testing::random_matrix;

namespace {

// Sizes straddle the parallel threshold.
constexpr std::size_t kSizes[] = {1, 7, 31, 32, 65};

}  // namespace

TEST_CASE("parallel kernels agree with the serial reference bit for bit") {
  Rng rng(11);
  for (std::size_t n : kSizes) {
    CAPTURE(n);
    const Matrix a1 = random_matrix(n, n, rng), a2 = random_matrix(n, n, rng), p = random_matrix(n, n, rng);
    const Matrix x = random_matrix(n, 5, rng), y = random_matrix(n, 5, rng);

    Matrix es, ep;
    kernels::serial::commutator(a1, p, a2, es);
    kernels::parallel::commutator(a1, p, a2, ep);
    CHECK(es == ep);

    Matrix gs, gp;
    kernels::serial::commutator_adjoint(a1, es, a2, 0.7, gs);
    kernels::parallel::commutator_adjoint(a1, es, a2, 0.7, gp);
    CHECK(gs == gp);

    Matrix ms, mp;
    kernels::serial::multiply_transposed(x, y, ms);
    kernels::parallel::multiply_transposed(x, y, mp);
    CHECK(ms == mp);

    Matrix ds, dp;
    kernels::serial::feature_distance(x, y, ds);
    kernels::parallel::feature_distance(x, y, dp);
    CHECK(ds == dp);

    Matrix ls = gs, lp = gs;
    kernels::serial::add_local_terms(ds, p, 1.3, 0.1, ls);
    kernels::parallel::add_local_terms(ds, p, 1.3, 0.1, lp);
    CHECK(ls == lp);

    std::vector<double> rs(n), rp(n), cs(n), cp(n);
    kernels::serial::row_sums(p, rs);
    kernels::parallel::row_sums(p, rp);
    kernels::serial::col_sums(p, cs);
    kernels::parallel::col_sums(p, cp);
    CHECK(rs == rp);
    CHECK(cs == cp);

    Matrix ss = p, sp = p;
    kernels::serial::scale_rows(ss, rs);
    kernels::parallel::scale_rows(sp, rs);
    kernels::serial::scale_cols(ss, cs);
    kernels::parallel::scale_cols(sp, cs);
    kernels::serial::truncate_nonneg(ss);
    kernels::parallel::truncate_nonneg(sp);
    kernels::serial::axpy(-0.25, a1, ss);
    kernels::parallel::axpy(-0.25, a1, sp);
    kernels::serial::add_constant(ss, 0.5);
    kernels::parallel::add_constant(sp, 0.5);
    CHECK(ss == sp);

    CHECK(kernels::serial::frobenius_sq(es) == kernels::parallel::frobenius_sq(es));
    CHECK(kernels::serial::weighted_sq_sum(ds, p) == kernels::parallel::weighted_sq_sum(ds, p));
    CHECK(kernels::serial::binary_penalty(p) == kernels::parallel::binary_penalty(p));
  }
}

TEST_CASE("commutator kernels match textbook products") {
  Rng rng(3);
  const std::size_t n = 9;
  const Matrix a1 = random_matrix(n, n, rng), a2 = random_matrix(n, n, rng), p = random_matrix(n, n, rng);
  auto mul = [n](const Matrix& a, const Matrix& b) {
    Matrix c(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) c(i, j) += a(i, k) * b(k, j);
    return c;
  };
  Matrix e;
  kernels::serial::commutator(a1, p, a2, e);
  CHECK(max_abs_difference(e, mul(a1, p) - mul(p, a2)) < 1e-12);

  Matrix g;
  kernels::serial::commutator_adjoint(a1, e, a2, 2.0, g);
  const Matrix expected = 2.0 * (mul(a1.transposed(), e) - mul(e, a2.transposed()));
  CHECK(max_abs_difference(g, expected) < 1e-12);
}

TEST_CASE("feature distance agrees with the norm expansion") {
  Rng rng(5);
  const Matrix x = random_matrix(20, 6, rng), y = random_matrix(20, 6, rng);
  Matrix d, xy;
  kernels::feature_distance(x, y, d);
  kernels::multiply_transposed(x, y, xy);
  for (std::size_t k = 0; k < 20; ++k)
    for (std::size_t j = 0; j < 20; ++j) {
      double xx = 0, yy = 0;
      for (std::size_t c = 0; c < 6; ++c) xx += x(k, c) * x(k, c), yy += y(j, c) * y(j, c);
      CHECK(d(k, j) == doctest::Approx(xx + yy - 2.0 * xy(k, j)).epsilon(1e-9));
    }
}

TEST_CASE("compensated reductions keep small terms next to large ones") {
  Matrix d(1, 3), p(1, 3, 1.0);
  d(0, 0) = 1e16;
  d(0, 1) = 1.0;
  d(0, 2) = -1e16;
  // Left-to-right naive summation loses the 1 entirely.
  CHECK(kernels::serial::weighted_sq_sum(d, p) == 1.0);
  CHECK(kernels::parallel::weighted_sq_sum(d, p) == 1.0);
}
