#pragma once

// Data-parallel inner loops used by every numeric module.
//
// Each kernel has a scalar reference implementation and optional AVX2 / NEON
// variants selected at runtime.  All variants share one summation order:
// reductions keep four partial sums, element i feeding lane i % 4, and the
// lanes are combined as (l0 + l1) + (l2 + l3).  With contraction disabled the
// variants are therefore bitwise identical, which keeps seeded runs
// reproducible regardless of the instruction set that executes them.

#include <cassert>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace h4g::kernels {

enum class Isa { scalar, avx2, neon };

struct Table {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const Table& scalar_table() noexcept;
/// nullptr when the variant was not compiled in or the CPU lacks support.
const Table* avx2_table() noexcept;
const Table* neon_table() noexcept;
const Table* table_for(Isa isa) noexcept;

/// ISAs usable on this machine, scalar first.
std::vector<Isa> available();

/// Kernel table used by the wrappers below.  Defaults to the widest
/// available ISA unless H4G_KERNELS names another one.
const Table& active() noexcept;

/// Throws UsageError if `isa` is not available.
void select(Isa isa);

std::string_view name(Isa isa) noexcept;
/// Accepts "scalar", "avx2", "neon", "auto".  Throws UsageError otherwise.
Isa parse_isa(std::string_view text);

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().squared_distance(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace h4g::kernels
