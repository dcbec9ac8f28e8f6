// Serial reference kernels vs their OpenMP twins. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <vector>

#include "qpalign/kernels.hpp"
#include "qpalign/rng.hpp"

namespace {

using namespace qpalign;

Matrix random_matrix(std::size_t n, std::uint64_t seed, bool symmetric) {
  Rng rng(seed);
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rng.uniform01();
  if (symmetric)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) m(i, j) = m(j, i);
  return m;
}

struct Inputs {
  Matrix a1, a2, pi, e;
  explicit Inputs(std::size_t n)
      : a1(random_matrix(n, 1, true)), a2(random_matrix(n, 2, true)), pi(random_matrix(n, 3, false)),
        e(random_matrix(n, 4, false)) {}
};

template <bool Parallel>
void commutator(benchmark::State& state) {
  const Inputs in(static_cast<std::size_t>(state.range(0)));
  Matrix out;
  for (auto _ : state) {
    if constexpr (Parallel) kernels::parallel::commutator(in.a1, in.pi, in.a2, out);
    else kernels::serial::commutator(in.a1, in.pi, in.a2, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void commutator_adjoint(benchmark::State& state) {
  const Inputs in(static_cast<std::size_t>(state.range(0)));
  Matrix out;
  for (auto _ : state) {
    if constexpr (Parallel) kernels::parallel::commutator_adjoint(in.a1, in.e, in.a2, 2.0, out);
    else kernels::serial::commutator_adjoint(in.a1, in.e, in.a2, 2.0, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void sinkhorn_sweep(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Matrix m = random_matrix(n, 5, false);
  std::vector<double> sums(n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::row_sums(m, sums);
      for (double& s : sums) s = 1.0 / s;
      kernels::parallel::scale_rows(m, sums);
      kernels::parallel::col_sums(m, sums);
      for (double& s : sums) s = 1.0 / s;
      kernels::parallel::scale_cols(m, sums);
    } else {
      kernels::serial::row_sums(m, sums);
      for (double& s : sums) s = 1.0 / s;
      kernels::serial::scale_rows(m, sums);
      kernels::serial::col_sums(m, sums);
      for (double& s : sums) s = 1.0 / s;
      kernels::serial::scale_cols(m, sums);
    }
    benchmark::DoNotOptimize(m.data());
  }
}

template <bool Parallel>
void objective_terms(benchmark::State& state) {
  const Inputs in(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    double f;
    if constexpr (Parallel) f = kernels::parallel::frobenius_sq(in.e) + kernels::parallel::weighted_sq_sum(in.a1, in.pi);
    else f = kernels::serial::frobenius_sq(in.e) + kernels::serial::weighted_sq_sum(in.a1, in.pi);
    benchmark::DoNotOptimize(f);
  }
}

#define QPALIGN_BENCH_PAIR(fn)                                                  \
  BENCHMARK(fn<false>)->Name(#fn "/serial")->RangeMultiplier(2)->Range(64, 512); \
  BENCHMARK(fn<true>)->Name(#fn "/parallel")->RangeMultiplier(2)->Range(64, 512)

QPALIGN_BENCH_PAIR(commutator);
QPALIGN_BENCH_PAIR(commutator_adjoint);
QPALIGN_BENCH_PAIR(sinkhorn_sweep);
QPALIGN_BENCH_PAIR(objective_terms);

}  // namespace

BENCHMARK_MAIN();
