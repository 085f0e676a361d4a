#include "rieszlab/singular_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rieszlab/fft.hpp"
#include "rieszlab/parallel.hpp"
#include "rieszlab/simd.hpp"

namespace rieszlab {

namespace {

void check_alpha(const GridSpec& spec, double alpha) {
  if (!(alpha > 0.0) || !(alpha < spec.d()))
    throw GridError("Riesz order alpha must lie in (0, d)");
}

// Kernel value at integer offset k (in units of h).
double riesz_kernel(const GridSpec& spec, double alpha, long k2) {
  if (k2 == 0) return regularized_power_cell_value(spec.d(), spec.h(), spec.d() - alpha);
  return std::pow(static_cast<double>(k2) * spec.h() * spec.h(), 0.5 * (alpha - spec.d()));
}

std::vector<double> riesz_fft(const GridFunction& f, double alpha) {
  const GridSpec& spec = f.spec();
  const int d = spec.d();
  const int n = spec.n();
  const int N = fft_friendly_size(2 * n - 1);
  std::vector<int> dims(static_cast<std::size_t>(d), N);
  RealFft fft(dims);

  std::vector<double> kernel(fft.real_size(), 0.0), data(fft.real_size(), 0.0);
  const int N2 = d == 3 ? N : 1;
  auto wrap = [&](int i) { return i < n ? i : i - N; };  // padded index -> offset
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b)
      for (int c = 0; c < N2; ++c) {
        const long ka = wrap(a), kb = wrap(b), kc = d == 3 ? wrap(c) : 0;
        if (a >= n && a <= N - n) continue;
        if (b >= n && b <= N - n) continue;
        if (d == 3 && c >= n && c <= N - n) continue;
        const std::size_t idx = (static_cast<std::size_t>(a) * N + b) * N2 + c;
        kernel[idx] = riesz_kernel(spec, alpha, ka * ka + kb * kb + kc * kc);
      }
  const auto v = f.values();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Node x = spec.unravel(i);
    const std::size_t idx = d == 3 ? (static_cast<std::size_t>(x[0]) * N + x[1]) * N + x[2]
                                   : static_cast<std::size_t>(x[0]) * N + x[1];
    data[idx] = v[i];
  }
  std::vector<double> ks(2 * fft.complex_size()), ds(2 * fft.complex_size());
  fft.forward(kernel.data(), ks.data());
  fft.forward(data.data(), ds.data());
  simd::active().complex_mul(ds.data(), ks.data(), fft.complex_size());
  fft.backward(ds.data(), data.data());

  const double scale = spec.cell_volume() / static_cast<double>(fft.real_size());
  std::vector<double> out(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Node x = spec.unravel(i);
    const std::size_t idx = d == 3 ? (static_cast<std::size_t>(x[0]) * N + x[1]) * N + x[2]
                                   : static_cast<std::size_t>(x[0]) * N + x[1];
    out[i] = data[idx] * scale;
  }
  return out;
}

std::vector<double> riesz_direct(const GridFunction& f, double alpha) {
  const GridSpec& spec = f.spec();
  const int d = spec.d();
  const int n = spec.n();
  const int W = 2 * n - 1;
  const std::size_t nn = static_cast<std::size_t>(n);
  // Kernel on offsets [-(n-1), n-1]^d, and f with its last axis reversed so
  // that every row product is a contiguous dot product.
  const std::size_t krows = d == 3 ? static_cast<std::size_t>(W) * W : W;
  std::vector<double> kernel(krows * W);
  for (std::size_t r = 0; r < krows; ++r) {
    const long ka = d == 3 ? static_cast<long>(r / W) - (n - 1) : 0;
    const long kb = static_cast<long>(r % W) - (n - 1);
    for (int c = 0; c < W; ++c) {
      const long kc = c - (n - 1);
      kernel[r * W + c] = riesz_kernel(spec, alpha, ka * ka + kb * kb + kc * kc);
    }
  }
  const auto v = f.values();
  const std::size_t rows = spec.size() / nn;
  std::vector<double> rev(spec.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < nn; ++c) rev[r * nn + c] = v[r * nn + (nn - 1 - c)];

  const auto& kern = simd::active();
  std::vector<double> out(spec.size());
  parallel_for(0, spec.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const Node x = spec.unravel(i);
      const int xi0 = d == 3 ? x[0] : 0;
      const int xi1 = d == 3 ? x[1] : x[0];
      const int xl = d == 3 ? x[2] : x[1];
      double s = 0.0;
      for (std::size_t r = 0; r < rows; ++r) {
        const int j0 = d == 3 ? static_cast<int>(r / nn) : 0;
        const int j1 = static_cast<int>(r % nn);
        const std::size_t krow =
            d == 3 ? static_cast<std::size_t>(xi0 - j0 + n - 1) * W + (xi1 - j1 + n - 1)
                   : static_cast<std::size_t>(xi1 - j1 + n - 1);
        s += kern.dot(kernel.data() + krow * W + xl, rev.data() + r * nn, nn);
      }
      out[i] = s * spec.cell_volume();
    }
  });
  return out;
}

// splitmix64 step
std::uint64_t mix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double sampled_pair_mean(std::span<const double> values, std::size_t budget, std::uint64_t seed) {
  std::uint64_t state = seed;
  const std::uint64_t n = values.size();
  double s = 0.0;
  for (std::size_t k = 0; k < budget; ++k) {
    const std::uint64_t a = mix(state) % n;
    const std::uint64_t b = mix(state) % n;
    s += std::abs(values[a] - values[b]);
  }
  return s / static_cast<double>(budget);
}

}  // namespace

GridFunction riesz_potential(const GridFunction& f, const RieszParams& params,
                             ConvolutionBackend backend) {
  check_alpha(f.spec(), params.alpha);
  if (f.support_margin() < 1) throw GridError("Riesz potential needs support_margin >= 1");
  auto out = backend == ConvolutionBackend::fft ? riesz_fft(f, params.alpha)
                                                : riesz_direct(f, params.alpha);
  return GridFunction(f.spec(), std::move(out), 0);
}

GridFunction fractional_maximal(const GridFunction& g, const MaximalParams& params) {
  if (!(params.beta >= 0.0)) throw GridError("maximal weight exponent must be >= 0");
  const GridSpec& spec = g.spec();
  std::vector<double> absg(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) absg[i] = std::abs(g[i]);
  std::vector<double> best(g.size(), 0.0);
  for (double rho : params.radii.radii()) {
    const auto stencil = BallStencil::make(spec, rho);
    const auto sums = ball_sums(spec, absg, stencil);
    const auto counts = ball_counts(spec, stencil);
    const double w = std::pow(rho, params.beta);
    for (std::size_t i = 0; i < best.size(); ++i)
      best[i] = std::max(best[i], w * sums[i] / counts[i]);
  }
  return GridFunction(spec, std::move(best), 0);
}

BallOscillation ball_oscillation(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) throw GridError("region below grid resolution");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto& k = simd::active();
  const double N = static_cast<double>(n);
  const double pair_mean = 2.0 * k.rank_weighted_sum(sorted.data(), n) / (N * N);
  const double mean = k.sum(sorted.data(), n) / N;
  return {pair_mean, k.abs_dev_sum(sorted.data(), n, mean) / N};
}

std::vector<double> sharp_function_at(const GridFunction& u, const RadiusSet& radii,
                                      std::span<const std::size_t> nodes,
                                      std::size_t pair_budget) {
  if (pair_budget < 1) throw GridError("pair_budget must be >= 1");
  const GridSpec& spec = u.spec();
  std::vector<std::vector<Node>> offsets;
  for (double rho : radii.radii()) offsets.push_back(BallStencil::make(spec, rho).offsets());

  std::vector<double> out(nodes.size(), 0.0);
  parallel_for(0, nodes.size(), [&](std::size_t lo, std::size_t hi) {
    std::vector<double> vals;
    for (std::size_t k = lo; k < hi; ++k) {
      const Node c = spec.unravel(nodes[k]);
      double best = 0.0;
      for (std::size_t r = 0; r < offsets.size(); ++r) {
        vals.clear();
        for (const Node& o : offsets[r]) {
          const Node y{c[0] + o[0], c[1] + o[1], c[2] + o[2]};
          if (spec.contains(y)) vals.push_back(u[spec.index(y)]);
        }
        const double pairs = static_cast<double>(vals.size()) * static_cast<double>(vals.size());
        double v;
        if (pairs <= static_cast<double>(pair_budget)) {
          v = ball_oscillation(vals).pair_mean;
        } else {
          std::uint64_t seed = kSharpSeed ^ (static_cast<std::uint64_t>(nodes[k]) << 8) ^ r;
          v = sampled_pair_mean(vals, pair_budget, mix(seed));
        }
        best = std::max(best, v);
      }
      out[k] = best;
    }
  });
  return out;
}

GridFunction sharp_function(const GridFunction& u, const RadiusSet& radii,
                            std::size_t pair_budget) {
  std::vector<std::size_t> all(u.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return GridFunction(u.spec(), sharp_function_at(u, radii, all, pair_budget), 0);
}

}  // namespace rieszlab
