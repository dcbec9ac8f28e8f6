#pragma once

// Instance persistence.
//
// Binary layout (all integers and doubles little-endian):
//   magic    "QPAI"            4 bytes
//   version  u32 = 1
//   n, d     u64, u64
//   kind     u32 (ModelKind)
//   rho, r   f64, f64
//   p, nu    f64, f64
//   seed     u64
//   truth?   u8 (0 or 1)
//   A1, A2   n*n f64 each, row-major
//   X, Y     n*d f64 each, row-major
//   truth    n u64 (only when the flag is 1)
//
// CSV export writes <prefix>_meta.csv (key,value), <prefix>_A1.csv and
// <prefix>_A2.csv (i,j,w per nonzero pair i<j), <prefix>_X.csv, <prefix>_Y.csv
// (one row per vertex) and, when known, <prefix>_truth.csv (i,pi_i). Doubles are
// printed with 17 significant digits so the CSV form also round-trips exactly.

#include <cstdint>
#include <filesystem>
#include <string>

#include "qpalign/core.hpp"

namespace qpalign::io {

struct InstanceMeta {
  ModelParams params;
  std::uint64_t seed = 0;
};

struct StoredInstance {
  AlignmentInstance instance;
  InstanceMeta meta;

  friend bool operator==(const StoredInstance& a, const StoredInstance& b) {
    const auto& p = a.meta.params;
    const auto& q = b.meta.params;
    return a.instance == b.instance && a.meta.seed == b.meta.seed && p.kind == q.kind &&
           p.n == q.n && p.d == q.d && p.rho == q.rho && p.r == q.r && p.p == q.p && p.nu == q.nu;
  }
};

void write_binary(const std::filesystem::path& path, const StoredInstance& stored);
StoredInstance read_binary(const std::filesystem::path& path);

void write_csv(const std::filesystem::path& prefix, const StoredInstance& stored);
StoredInstance read_csv(const std::filesystem::path& prefix);

/// Reads either form: a binary file when `path` exists, otherwise a CSV prefix.
StoredInstance read_any(const std::filesystem::path& path);

std::string model_name(ModelKind kind);
/// Accepts "gw", "gaussian", "er", "erdos-renyi", "t", "student-t".
ModelKind parse_model(const std::string& name);

}  // namespace qpalign::io
