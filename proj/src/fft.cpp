#include "rieszlab/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace rieszlab {

namespace {
// FFTW's planner is not thread-safe; execution on new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

int fft_friendly_size(int m) {
  for (int s = std::max(m, 1);; ++s) {
    int r = s;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return s;
  }
}

struct RealFft::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

RealFft::RealFft(std::vector<int> dims) : dims_(std::move(dims)), plans_(std::make_unique<Plans>()) {
  if (dims_.empty()) throw std::invalid_argument("RealFft needs at least one axis");
  real_size_ = 1;
  for (int n : dims_) real_size_ *= static_cast<std::size_t>(n);
  complex_size_ = real_size_ / static_cast<std::size_t>(dims_.back()) *
                  static_cast<std::size_t>(dims_.back() / 2 + 1);

  std::lock_guard<std::mutex> lock(planner_mutex());
  double* r = fftw_alloc_real(real_size_);
  fftw_complex* c = fftw_alloc_complex(complex_size_);
  const int rank = static_cast<int>(dims_.size());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans_->forward = fftw_plan_dft_r2c(rank, dims_.data(), r, c, flags);
  plans_->backward = fftw_plan_dft_c2r(rank, dims_.data(), c, r, flags | FFTW_DESTROY_INPUT);
  fftw_free(r);
  fftw_free(c);
  if (!plans_->forward || !plans_->backward) throw std::runtime_error("FFTW planning failed");
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plans_->forward);
  fftw_destroy_plan(plans_->backward);
}

void RealFft::forward(const double* real, double* spectrum) const {
  // r2c does not modify its input, but the C signature is non-const.
  fftw_execute_dft_r2c(plans_->forward, const_cast<double*>(real),
                       reinterpret_cast<fftw_complex*>(spectrum));
}

void RealFft::backward(const double* spectrum, double* real) const {
  // c2r destroys its input, so work on a copy.
  std::vector<double> scratch(spectrum, spectrum + 2 * complex_size_);
  fftw_execute_dft_c2r(plans_->backward, reinterpret_cast<fftw_complex*>(scratch.data()), real);
}

}  // namespace rieszlab
