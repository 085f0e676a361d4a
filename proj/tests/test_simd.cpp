#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "rieszlab/simd.hpp"

using rieszlab::simd::KernelTable;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint32_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-3.0, 5.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

const KernelTable* vector_table() { return rieszlab::simd::avx2_kernels(); }

}  // namespace

TEST(SimdScalar, RankWeightedSumMatchesPairEnumeration) {
  const auto& k = rieszlab::simd::scalar_kernels();
  for (std::size_t n : {1u, 2u, 5u, 17u}) {
    auto v = random_vector(n, 11 + n);
    double pairs = 0.0;
    for (double a : v)
      for (double b : v) pairs += std::abs(a - b);
    std::sort(v.begin(), v.end());
    EXPECT_NEAR(2.0 * k.rank_weighted_sum(v.data(), n), pairs, 1e-10 * (1.0 + pairs));
  }
}

TEST(SimdScalar, WindowAccumulateIsWindowSum) {
  const auto& k = rieszlab::simd::scalar_kernels();
  const auto v = random_vector(20, 3);
  std::vector<double> prefix(v.size() + 1, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) prefix[i + 1] = prefix[i] + v[i];
  std::vector<double> acc(10, 1.0);
  k.window_accumulate(acc.data(), prefix.data(), acc.size(), 2, 7);
  for (std::size_t c = 0; c < acc.size(); ++c) {
    double s = 1.0;
    for (std::size_t i = c + 2; i < c + 7; ++i) s += v[i];
    EXPECT_NEAR(acc[c], s, 1e-12);
  }
}

class SimdEquivalence : public ::testing::TestWithParam<std::size_t> {
 protected:
  void SetUp() override {
    if (!vector_table()) GTEST_SKIP() << "no vector kernels on this CPU";
  }
};

TEST_P(SimdEquivalence, ReductionsAgreeWithScalar) {
  const auto& s = rieszlab::simd::scalar_kernels();
  const auto& v = *vector_table();
  const std::size_t n = GetParam();
  const auto a = random_vector(n, 100 + n);
  const auto b = random_vector(n, 200 + n);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  const double tol = 1e-12 * (1.0 + static_cast<double>(n));
  EXPECT_NEAR(v.dot(a.data(), b.data(), n), s.dot(a.data(), b.data(), n), tol * 10);
  EXPECT_NEAR(v.sum(a.data(), n), s.sum(a.data(), n), tol * 5);
  EXPECT_NEAR(v.abs_dev_sum(a.data(), n, 0.7), s.abs_dev_sum(a.data(), n, 0.7), tol * 5);
  EXPECT_NEAR(v.rank_weighted_sum(sorted.data(), n), s.rank_weighted_sum(sorted.data(), n),
              tol * 5 * (1.0 + static_cast<double>(n)));
}

TEST_P(SimdEquivalence, WindowAccumulateIsBitwiseEqual) {
  const auto& s = rieszlab::simd::scalar_kernels();
  const auto& v = *vector_table();
  const std::size_t n = GetParam();
  const auto prefix = random_vector(n + 9, 300 + n);
  std::vector<double> acc_s(n, 0.25), acc_v(n, 0.25);
  s.window_accumulate(acc_s.data(), prefix.data(), n, 1, 9);
  v.window_accumulate(acc_v.data(), prefix.data(), n, 1, 9);
  EXPECT_EQ(acc_s, acc_v);
}

TEST_P(SimdEquivalence, ComplexMultiplyAgrees) {
  const auto& s = rieszlab::simd::scalar_kernels();
  const auto& v = *vector_table();
  const std::size_t n = GetParam();
  auto x_s = random_vector(2 * n, 400 + n);
  auto x_v = x_s;
  const auto f = random_vector(2 * n, 500 + n);
  s.complex_mul(x_s.data(), f.data(), n);
  v.complex_mul(x_v.data(), f.data(), n);
  for (std::size_t i = 0; i < 2 * n; ++i) EXPECT_NEAR(x_s[i], x_v[i], 1e-13 * (1 + std::abs(x_s[i])));
}

INSTANTIATE_TEST_SUITE_P(Lengths, SimdEquivalence,
                         ::testing::Values(0u, 1u, 3u, 4u, 7u, 8u, 9u, 31u, 64u, 1001u));
