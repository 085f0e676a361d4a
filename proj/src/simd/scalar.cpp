#include "rieszlab/simd.hpp"

#include <cmath>

namespace rieszlab::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

double abs_dev_sum_scalar(const double* a, std::size_t n, double center) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i] - center);
  return s;
}

double rank_weighted_sum_scalar(const double* sorted, std::size_t n) {
  double s = 0.0;
  const double offset = 1.0 - static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) s += (2.0 * static_cast<double>(k) + offset) * sorted[k];
  return s;
}

void window_accumulate_scalar(double* acc, const double* prefix, std::size_t count,
                              std::size_t lo, std::size_t hi) {
  for (std::size_t c = 0; c < count; ++c) acc[c] += prefix[c + hi] - prefix[c + lo];
}

void complex_mul_scalar(double* inout, const double* factor, std::size_t n_complex) {
  for (std::size_t k = 0; k < n_complex; ++k) {
    const double ar = inout[2 * k], ai = inout[2 * k + 1];
    const double br = factor[2 * k], bi = factor[2 * k + 1];
    inout[2 * k] = ar * br - ai * bi;
    inout[2 * k + 1] = ar * bi + ai * br;
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar",          dot_scalar,
                                 sum_scalar,        abs_dev_sum_scalar,
                                 rank_weighted_sum_scalar, window_accumulate_scalar,
                                 complex_mul_scalar};
  return table;
}

}  // namespace rieszlab::simd
