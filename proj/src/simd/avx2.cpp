// Compiled with -mavx2 -mfma. Nothing in here may run before the dispatcher
// has confirmed CPU support.

#include "rieszlab/simd.hpp"

#include <immintrin.h>

#include <cmath>

namespace rieszlab::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i];
  return s;
}

double abs_dev_sum_avx2(const double* a, std::size_t n, double center) {
  const __m256d c = _mm256_set1_pd(center);
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), c);
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::fabs(a[i] - center);
  return s;
}

double rank_weighted_sum_avx2(const double* sorted, std::size_t n) {
  const double offset = 1.0 - static_cast<double>(n);
  __m256d w = _mm256_setr_pd(offset, offset + 2.0, offset + 4.0, offset + 6.0);
  const __m256d step = _mm256_set1_pd(8.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    acc = _mm256_fmadd_pd(w, _mm256_loadu_pd(sorted + k), acc);
    w = _mm256_add_pd(w, step);
  }
  double s = hsum(acc);
  for (; k < n; ++k) s += (2.0 * static_cast<double>(k) + offset) * sorted[k];
  return s;
}

void window_accumulate_avx2(double* acc, const double* prefix, std::size_t count,
                            std::size_t lo, std::size_t hi) {
  std::size_t c = 0;
  for (; c + 4 <= count; c += 4) {
    const __m256d diff =
        _mm256_sub_pd(_mm256_loadu_pd(prefix + c + hi), _mm256_loadu_pd(prefix + c + lo));
    _mm256_storeu_pd(acc + c, _mm256_add_pd(_mm256_loadu_pd(acc + c), diff));
  }
  for (; c < count; ++c) acc[c] += prefix[c + hi] - prefix[c + lo];
}

void complex_mul_avx2(double* inout, const double* factor, std::size_t n_complex) {
  std::size_t k = 0;
  for (; k + 2 <= n_complex; k += 2) {
    const __m256d a = _mm256_loadu_pd(inout + 2 * k);   // ar0 ai0 ar1 ai1
    const __m256d b = _mm256_loadu_pd(factor + 2 * k);  // br0 bi0 br1 bi1
    const __m256d b_re = _mm256_movedup_pd(b);          // br0 br0 br1 br1
    const __m256d b_im = _mm256_permute_pd(b, 0xF);     // bi0 bi0 bi1 bi1
    const __m256d a_swap = _mm256_permute_pd(a, 0x5);   // ai0 ar0 ai1 ar1
    // (ar*br - ai*bi, ai*br + ar*bi)
    const __m256d r = _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_swap, b_im));
    _mm256_storeu_pd(inout + 2 * k, r);
  }
  for (; k < n_complex; ++k) {
    const double ar = inout[2 * k], ai = inout[2 * k + 1];
    const double br = factor[2 * k], bi = factor[2 * k + 1];
    inout[2 * k] = ar * br - ai * bi;
    inout[2 * k + 1] = ar * bi + ai * br;
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{"avx2",          dot_avx2,
                                 sum_avx2,        abs_dev_sum_avx2,
                                 rank_weighted_sum_avx2, window_accumulate_avx2,
                                 complex_mul_avx2};
  return table;
}

}  // namespace rieszlab::simd
