#pragma once

// Thin RAII wrapper over FFTW real-to-complex transforms on row-major boxes.

#include <cstddef>
#include <memory>
#include <vector>

namespace rieszlab {

// Smallest 2^a 3^b 5^c 7^d >= m.
int fft_friendly_size(int m);

class RealFft {
 public:
  explicit RealFft(std::vector<int> dims);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  const std::vector<int>& dims() const { return dims_; }
  std::size_t real_size() const { return real_size_; }
  // Number of complex coefficients (last axis halved).
  std::size_t complex_size() const { return complex_size_; }

  // `spectrum` holds complex_size() interleaved (re, im) pairs. Both calls
  // may run concurrently on distinct buffers.
  void forward(const double* real, double* spectrum) const;
  // Unnormalized: backward(forward(x)) = real_size() * x.
  void backward(const double* spectrum, double* real) const;

 private:
  struct Plans;
  std::vector<int> dims_;
  std::size_t real_size_;
  std::size_t complex_size_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace rieszlab
