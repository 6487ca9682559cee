#pragma once

#include <cstddef>
#include <cstdint>

// Arithmetic inner loops shared by the rank statistics. Each kernel has a
// scalar reference implementation and SIMD variants selected at runtime.
//
// All floating-point reductions use the same fixed 4-lane striped accumulation
// regardless of the instruction set: lane j accumulates elements j, j+4,
// j+8, ... and the lanes combine as (l0 + l2) + (l1 + l3). Because every
// per-lane operation is an exactly-rounded IEEE op in the same order, the
// scalar and SIMD variants return bit-identical results, which keeps golden
// files stable no matter which variant the host dispatches to. The
// equivalence tests assert exact equality, not a tolerance.

namespace corrnet::kernels {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa);
bool supported(Isa isa);

/// The variant currently in use. Defaults to the best supported one;
/// the CORRNET_KERNEL environment variable ("scalar", "avx2", "auto")
/// overrides the default at first use.
Isa active();

/// Force a specific variant (throws InvalidArgument if unsupported on this
/// host). Intended for tests and benchmarking.
void force(Isa isa);

/// Back to automatic selection.
void reset();

/// Striped sum of x[0..n).
double sum(const double* x, std::size_t n);

/// Striped dot product of x[0..n) and y[0..n).
double dot(const double* x, const double* y, std::size_t n);

struct PairCounts {
  int64_t concordant = 0;
  int64_t discordant = 0;

  bool operator==(const PairCounts&) const = default;
};

/// Counts concordant and discordant index pairs i < j between two series.
/// Pairs tied in either series count as neither.
PairCounts concordance_counts(const double* x, const double* y, std::size_t n);

namespace detail {
double sum_scalar(const double* x, std::size_t n);
double dot_scalar(const double* x, const double* y, std::size_t n);
PairCounts concordance_scalar(const double* x, const double* y, std::size_t n);
// Defined only when the library is built with AVX2 support; never referenced
// otherwise.
double sum_avx2(const double* x, std::size_t n);
double dot_avx2(const double* x, const double* y, std::size_t n);
PairCounts concordance_avx2(const double* x, const double* y, std::size_t n);
}  // namespace detail

}  // namespace corrnet::kernels
