#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace qpalign {

/// Reproducible random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. All distributions are implemented here rather than taken from
/// <random>, whose distribution algorithms are implementation-defined:
///   uniform01  = (u64 >> 11) * 2^-53
///   normal     = Box-Muller, both variates of a pair used (cos first, then sin)
///   gamma      = Marsaglia-Tsang squeeze (shape < 1 boosted by U^(1/shape))
///   index(n)   = rejection sampling on the top of the u64 range
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  /// Uniform on (0, 1]; safe for log().
  double uniform_open();
  double normal();
  double gamma(double shape, double scale = 1.0);
  double chi_squared(double dof) { return gamma(0.5 * dof, 2.0); }
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix64(std::uint64_t x);

/// Deterministic seed for (base, i0, i1, ...).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> indices);

}  // namespace qpalign
