#pragma once

// Data-parallel inner loops shared by the operators. Every kernel has a scalar
// reference implementation; an AVX2 variant is selected at runtime when the
// CPU supports it. Set RIESZLAB_SIMD=scalar to force the reference path.

#include <cstddef>
#include <string_view>

namespace rieszlab::simd {

struct KernelTable {
  std::string_view name;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // sum_i a[i]
  double (*sum)(const double* a, std::size_t n);

  // sum_i |a[i] - center|
  double (*abs_dev_sum)(const double* a, std::size_t n, double center);

  // sum_k (2k - n + 1) * sorted[k]; equals half the sum of |v_i - v_j| over
  // all ordered pairs when `sorted` is ascending.
  double (*rank_weighted_sum)(const double* sorted, std::size_t n);

  // acc[c] += prefix[c + hi] - prefix[c + lo] for c in [0, count)
  void (*window_accumulate)(double* acc, const double* prefix, std::size_t count,
                            std::size_t lo, std::size_t hi);

  // inout[k] *= factor[k] for interleaved complex arrays of n_complex entries
  void (*complex_mul)(double* inout, const double* factor, std::size_t n_complex);
};

const KernelTable& scalar_kernels();

// nullptr when the AVX2 translation unit was not built or the CPU lacks
// AVX2/FMA.
const KernelTable* avx2_kernels();

// The table used by the library. Chosen once per process.
const KernelTable& active();

}  // namespace rieszlab::simd
