#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// on x86-64 hosts with AVX2+FMA, a vectorized version; `active()` picks one at
// first use. Set INBAND_SIMD=scalar in the environment to force the reference
// kernels.

#include <cstddef>
#include <span>

namespace inband::kernels {

struct Dot3 {
  double xy = 0.0;
  double xx = 0.0;
  double yy = 0.0;
};

struct KernelTable {
  const char* name;

  /// Sum of x*y, x*x and y*y in one pass. Spans must have equal length.
  Dot3 (*dot3)(std::span<const double> x, std::span<const double> y);

  double (*sum)(std::span<const double> x);

  /// Sum of (x - y)^2.
  double (*sq_diff)(std::span<const double> x, std::span<const double> y);

  /// One row of 2x2 Haar analysis. `top` and `bottom` hold 2n samples; the four
  /// outputs hold n. Bit-identical across implementations.
  void (*haar_analyze_row)(const double* top, const double* bottom, std::size_t n, double* approx, double* horiz,
                           double* vert, double* diag);

  /// Inverse of haar_analyze_row. Bit-identical across implementations.
  void (*haar_synthesize_row)(const double* approx, const double* horiz, const double* vert, const double* diag,
                              std::size_t n, double* top, double* bottom);
};

const KernelTable& scalar();

/// AVX2 table, or nullptr when the host or the build lacks AVX2/FMA.
const KernelTable* avx2();

/// Table selected for this process.
const KernelTable& active();

}  // namespace inband::kernels
