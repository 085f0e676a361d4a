#include "rieszlab/heat.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rieszlab/fft.hpp"
#include "rieszlab/parallel.hpp"

namespace rieszlab {

namespace {

constexpr double kPi = std::numbers::pi;

double sphere_area(int d) { return 2.0 * std::pow(kPi, d / 2.0) / std::tgamma(d / 2.0); }

// The grid embedded at the low corner of a periodic box of N^d nodes, with
// N h >= 2L + pad, so images of a compactly supported function stay at least
// `pad` away from the grid.
class PaddedBox {
 public:
  PaddedBox(const GridSpec& spec, double pad)
      : spec_(spec),
        N_(fft_friendly_size(spec.n() + static_cast<int>(std::ceil(pad / spec.h())))),
        fft_(std::vector<int>(static_cast<std::size_t>(spec.d()), N_)) {
    const double L = N_ * spec.h();
    xi2_.resize(static_cast<std::size_t>(N_));
    for (int k = 0; k < N_; ++k) {
      const int kk = k <= N_ / 2 ? k : k - N_;
      const double xi = 2.0 * kPi * kk / L;
      xi2_[k] = xi * xi;
    }
  }

  const RealFft& fft() const { return fft_; }
  std::size_t complex_size() const { return fft_.complex_size(); }
  int last_extent() const { return N_ / 2 + 1; }

  void to_spectrum(std::span<const double> values, double* spectrum) const {
    std::vector<double> real(fft_.real_size(), 0.0);
    for (std::size_t i = 0; i < spec_.size(); ++i) real[padded_index(i)] = values[i];
    fft_.forward(real.data(), spectrum);
  }

  void from_spectrum(const double* spectrum, double* out) const {
    std::vector<double> real(fft_.real_size());
    fft_.backward(spectrum, real.data());
    const double scale = 1.0 / static_cast<double>(fft_.real_size());
    for (std::size_t i = 0; i < spec_.size(); ++i) out[i] = real[padded_index(i)] * scale;
  }

  // Heat symbol exp(-s |xi|^2) on the half-spectrum, built from 1-d tables.
  void heat_symbol(double s, std::vector<double>& out) const {
    std::vector<double> e(static_cast<std::size_t>(N_));
    for (int k = 0; k < N_; ++k) e[k] = std::exp(-s * xi2_[k]);
    out.resize(complex_size());
    const int M = last_extent();
    const std::size_t rows = complex_size() / static_cast<std::size_t>(M);
    for (std::size_t r = 0; r < rows; ++r) {
      double outer = 1.0;
      std::size_t rr = r;
      for (int a = spec_.d() - 2; a >= 0; --a) {
        outer *= e[rr % static_cast<std::size_t>(N_)];
        rr /= static_cast<std::size_t>(N_);
      }
      for (int c = 0; c < M; ++c) out[r * M + c] = outer * e[c];
    }
  }

 private:
  std::size_t padded_index(std::size_t i) const {
    const Node x = spec_.unravel(i);
    std::size_t idx = 0;
    for (int a = 0; a < spec_.d(); ++a) idx = idx * static_cast<std::size_t>(N_) + x[a];
    return idx;
  }

  GridSpec spec_;
  int N_;
  RealFft fft_;
  std::vector<double> xi2_;
};

int margin_of_slices(const SpaceTimeGridSpec& st, std::span<const double> v) {
  const std::size_t S = st.spatial().size();
  int margin = (st.spatial().n() + 1) / 2;
  for (int j = 0; j < st.m(); ++j) margin = std::min(margin, detect_margin(st.spatial(), v.subspan(j * S, S)));
  return margin;
}

}  // namespace

double heat_kernel(int d, const HeatKernelParams& params, double t, const Point& x) {
  if (!(t > 0.0)) throw GridError("heat kernel needs t > 0");
  const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
  return std::pow(t, -(d + params.gamma) / 2.0) * std::exp(-r2 / (8.0 * t));
}

double kernel_norm_slope(int d, const HeatKernelParams& params) {
  return -(d + params.gamma) / 2.0 + d / (2.0 * params.s);
}

double kernel_norm(int d, const HeatKernelParams& params, double t) {
  if (!(params.s >= 1.0)) throw GridError("kernel norm needs s >= 1");
  if (!(t > 0.0)) throw GridError("heat kernel needs t > 0");
  // exp(-s r^2 / (8t)) < e^{-60} beyond r_max
  const double r_max = std::sqrt(8.0 * t * 60.0 / params.s);
  auto simpson = [&](int intervals) {
    const double dr = r_max / intervals;
    double acc = 0.0;
    for (int k = 0; k <= intervals; ++k) {
      const double r = k * dr;
      const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      const double p = heat_kernel(d, params, t, {r, 0.0, 0.0});
      acc += w * std::pow(r, d - 1) * std::pow(p, params.s);
    }
    return acc * dr / 3.0 * sphere_area(d);
  };
  const double coarse = simpson(2000);
  const double fine = simpson(4000);
  if (!(std::abs(fine - coarse) <= 1e-9 * std::abs(fine)))
    throw GridError("radial quadrature did not converge");
  return std::pow(fine, 1.0 / params.s);
}

double kernel_norm_exponent(int d, const HeatKernelParams& params, std::span<const double> t_grid) {
  if (t_grid.size() < 2) throw GridError("kernel norm fit needs at least two times");
  const auto [lo, hi] = std::minmax_element(t_grid.begin(), t_grid.end());
  if (*hi < 100.0 * *lo) throw GridError("time grid must span at least two decades");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(t_grid.size());
  for (double t : t_grid) {
    const double x = std::log(t), y = std::log(kernel_norm(d, params, t));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double drift_domination_constant(int samples, double z_max) {
  double best = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double z = z_max * k / (samples - 1);
    best = std::max(best, z * std::exp(-z * z / 8.0));
  }
  return best;
}

SpaceTimeFunction representation_R(const SpaceTimeFunction& f) {
  const auto& st = f.spec();
  const GridSpec& spec = st.spatial();
  const int m = st.m();
  const std::size_t S = spec.size();
  for (double v : f.slice_values(m - 1))
    if (v != 0.0) throw GridError("slab does not contain the support of f: last slice is nonzero");

  const PaddedBox box(spec, 10.0 * std::sqrt(st.t1() - st.t0()));
  const std::size_t C = box.complex_size();
  std::vector<double> spectra(static_cast<std::size_t>(m) * 2 * C);
  parallel_for(0, static_cast<std::size_t>(m), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) box.to_spectrum(f.slice_values(static_cast<int>(j)), spectra.data() + j * 2 * C);
  });

  const double tau = st.tau();
  const double s_min = tau / 4.0;
  std::vector<double> out(st.size(), 0.0);
  parallel_for(0, static_cast<std::size_t>(m), [&](std::size_t lo, std::size_t hi) {
    std::vector<double> acc(2 * C), symbol;
    for (std::size_t j = lo; j < hi; ++j) {
      const double span_s = (m - 1 - static_cast<double>(j)) * tau;
      if (span_s <= 0.0) continue;
      // (s, weight) pairs, ascending in s
      std::vector<std::pair<double, double>> nodes;
      if (span_s <= s_min) {
        nodes.emplace_back(span_s / 2.0, span_s);
      } else {
        nodes.emplace_back(s_min / 2.0, s_min);
        const double log_span = std::log(span_s / s_min);
        const int K = std::max(1, static_cast<int>(std::ceil(64.0 * log_span / std::log(10.0))));
        const double ds = log_span / K;
        for (int k = 0; k <= K; ++k) {
          const double s = s_min * std::exp(k * ds);
          nodes.emplace_back(s, ds * s * ((k == 0 || k == K) ? 0.5 : 1.0));
        }
      }
      std::fill(acc.begin(), acc.end(), 0.0);
      for (const auto& [s, w] : nodes) {
        const double x = static_cast<double>(j) + s / tau;
        int k = static_cast<int>(std::floor(x));
        double theta = x - k;
        if (k >= m - 1) continue;  // f vanishes from the last slice on
        const double* F0 = spectra.data() + static_cast<std::size_t>(k) * 2 * C;
        const double* F1 = F0 + 2 * C;
        box.heat_symbol(s, symbol);
        const double a = w * (1.0 - theta), b = w * theta;
        for (std::size_t c = 0; c < C; ++c) {
          acc[2 * c] += symbol[c] * (a * F0[2 * c] + b * F1[2 * c]);
          acc[2 * c + 1] += symbol[c] * (a * F0[2 * c + 1] + b * F1[2 * c + 1]);
        }
      }
      box.from_spectrum(acc.data(), out.data() + j * S);
    }
  });
  const int margin = margin_of_slices(st, out);
  return SpaceTimeFunction(st, std::move(out), margin);
}

SpaceTimeFunction heat_extension(const GridFunction& g, double from, const SpaceTimeGridSpec& slab) {
  if (!(slab.spatial() == g.spec())) throw GridError("slab grid does not match the data grid");
  if (slab.t0() < from - 1e-12 * std::max(1.0, std::abs(from)))
    throw GridError("heat extension queried before its start time");
  const GridSpec& spec = g.spec();
  const PaddedBox box(spec, 10.0 * std::sqrt(slab.t1() - from));
  const std::size_t C = box.complex_size();
  std::vector<double> g_hat(2 * C);
  box.to_spectrum(g.values(), g_hat.data());
  const std::size_t S = spec.size();
  std::vector<double> out(slab.size());
  parallel_for(0, static_cast<std::size_t>(slab.m()), [&](std::size_t lo, std::size_t hi) {
    std::vector<double> work(2 * C), symbol;
    for (std::size_t j = lo; j < hi; ++j) {
      const double s = std::max(0.0, slab.time(static_cast<int>(j)) - from);
      box.heat_symbol(s, symbol);
      for (std::size_t c = 0; c < C; ++c) {
        work[2 * c] = g_hat[2 * c] * symbol[c];
        work[2 * c + 1] = g_hat[2 * c + 1] * symbol[c];
      }
      box.from_spectrum(work.data(), out.data() + j * S);
    }
  });
  const int margin = margin_of_slices(slab, out);
  return SpaceTimeFunction(slab, std::move(out), margin);
}

double mollifier_profile(double t, const Point& x) {
  const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
  const double rho2 = t * t + r2 * r2;
  return rho2 < 1.0 ? std::exp(-1.0 / (1.0 - rho2)) : 0.0;
}

MollifierStencil MollifierStencil::make(const SpaceTimeGridSpec& st, double eps) {
  const GridSpec& spec = st.spatial();
  const double h = spec.h(), tau = st.tau();
  if (eps < std::max(2.0 * h, 2.0 * std::sqrt(tau)) * (1.0 - 1e-12))
    throw GridError("mollifier scale below grid resolution");
  MollifierStencil m;
  m.eps = eps;
  const int KT = static_cast<int>(std::ceil(eps * eps / tau));
  const int KX = static_cast<int>(std::ceil(eps / h));
  const int K2 = spec.d() == 3 ? KX : 0;
  double total = 0.0;
  for (int kt = -KT; kt <= KT; ++kt)
    for (int a = -KX; a <= KX; ++a)
      for (int b = -KX; b <= KX; ++b)
        for (int c = -K2; c <= K2; ++c) {
          const double w = mollifier_profile(kt * tau / (eps * eps), {a * h / eps, b * h / eps, c * h / eps});
          if (w <= 0.0) continue;
          m.time_offsets.push_back(kt);
          m.space_offsets.push_back(Node{a, b, c});
          m.weights.push_back(w);
          total += w;
          m.time_radius = std::max(m.time_radius, std::abs(kt));
        }
  for (double& w : m.weights) w /= total;
  return m;
}

double MollifierStencil::second_moment(const GridSpec& spec) const {
  double m2 = 0.0;
  for (std::size_t e = 0; e < weights.size(); ++e) {
    const double x = space_offsets[e][0] * spec.h();
    m2 += weights[e] * x * x;
  }
  return m2;
}

namespace {

void accumulate_slice(const SpaceTimeFunction& u, const MollifierStencil& st, int j, double* out) {
  const GridSpec& spec = u.spec().spatial();
  const int n = spec.n();
  const int d = spec.d();
  const std::size_t nn = static_cast<std::size_t>(n);
  const std::size_t rows = spec.size() / nn;
  for (std::size_t e = 0; e < st.weights.size(); ++e) {
    const int src_t = j - st.time_offsets[e];
    if (src_t < 0 || src_t >= u.spec().m()) continue;
    const auto v = u.slice_values(src_t);
    const Node& k = st.space_offsets[e];
    const double w = st.weights[e];
    const int k_outer0 = d == 3 ? k[0] : 0;
    const int k_outer1 = d == 3 ? k[1] : k[0];
    const int k_last = d == 3 ? k[2] : k[1];
    const int c_lo = std::max(0, k_last), c_hi = std::min(n, n + k_last);
    for (std::size_t r = 0; r < rows; ++r) {
      const int r0 = d == 3 ? static_cast<int>(r / nn) : 0;
      const int r1 = static_cast<int>(r % nn);
      const int s0 = r0 - k_outer0, s1 = r1 - k_outer1;
      if (s0 < 0 || s0 >= (d == 3 ? n : 1) || s1 < 0 || s1 >= n) continue;
      const double* src = v.data() + (static_cast<std::size_t>(s0) * nn + s1) * nn - k_last;
      double* dst = out + r * nn;
      for (int c = c_lo; c < c_hi; ++c) dst[c] += w * src[c];
    }
  }
}

}  // namespace

GridFunction mollify_slice(const SpaceTimeFunction& u, double eps, int t_index) {
  if (t_index < 0 || t_index >= u.spec().m()) throw GridError("time index out of range");
  const auto stencil = MollifierStencil::make(u.spec(), eps);
  std::vector<double> out(u.spec().spatial().size(), 0.0);
  accumulate_slice(u, stencil, t_index, out.data());
  const auto& spec = u.spec().spatial();
  const int margin = detect_margin(spec, out);
  return GridFunction(spec, std::move(out), margin);
}

SpaceTimeFunction mollify(const SpaceTimeFunction& u, double eps) {
  const auto stencil = MollifierStencil::make(u.spec(), eps);
  const std::size_t S = u.spec().spatial().size();
  std::vector<double> out(u.size(), 0.0);
  parallel_for(0, static_cast<std::size_t>(u.spec().m()), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) accumulate_slice(u, stencil, static_cast<int>(j), out.data() + j * S);
  });
  const int margin = margin_of_slices(u.spec(), out);
  return SpaceTimeFunction(u.spec(), std::move(out), margin);
}

std::vector<double> default_eps_sequence(const SpaceTimeGridSpec& spec, int count) {
  const double floor_eps = std::max(2.0 * spec.spatial().h(), 2.0 * std::sqrt(spec.tau()));
  std::vector<double> eps;
  for (int k = 2; k < 64; ++k) {
    const double e = std::ldexp(1.0, -k);
    if (e < floor_eps * (1.0 - 1e-12)) break;
    eps.push_back(e);
  }
  if (eps.size() > static_cast<std::size_t>(count)) eps.erase(eps.begin(), eps.end() - count);
  if (eps.empty()) throw GridError("grid too coarse for any dyadic mollifier scale");
  return eps;
}

namespace {

std::vector<GridFunction> trace_components(const SpaceTimeFunction& u, int gamma, double eps, int j0) {
  auto slice = mollify_slice(u, eps, j0);
  if (gamma == 0) return {slice};
  return gradient(slice);
}

GridFunction difference_magnitude(const std::vector<GridFunction>& a, const std::vector<GridFunction>& b) {
  const GridSpec& spec = a.front().spec();
  std::vector<double> v(spec.size(), 0.0);
  for (std::size_t c = 0; c < a.size(); ++c)
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double dlt = a[c][i] - b[c][i];
      v[i] += dlt * dlt;
    }
  for (double& x : v) x = std::sqrt(x);
  const int margin = detect_margin(spec, v);
  return GridFunction(spec, std::move(v), margin);
}

}  // namespace

TraceResult trace(const SpaceTimeFunction& u, int gamma, std::span<const double> eps_sequence,
                  const TraceOptions& options) {
  if (gamma != 0 && gamma != 1) throw GridError("trace order must be 0 or 1");
  if (eps_sequence.empty()) throw GridError("empty mollifier scale sequence");
  for (std::size_t k = 1; k < eps_sequence.size(); ++k)
    if (!(eps_sequence[k] < eps_sequence[k - 1])) throw GridError("mollifier scales must decrease");
  const auto& st = u.spec();
  const auto j0 = st.time_index(0.0);
  if (!j0 || *j0 < 1 || *j0 > st.m() - 2) throw GridError("t = 0 must be an interior time node");
  BallRegion ball = options.ball;
  if (ball.radius <= 0.0) ball.radius = st.spatial().L() / 2.0;

  TraceResult result;
  result.eps.assign(eps_sequence.begin(), eps_sequence.end());
  std::vector<GridFunction> prev, before;
  double m2_prev = 0.0, m2_before = 0.0;
  for (double eps : eps_sequence) {
    auto cur = trace_components(u, gamma, eps, *j0);
    if (!prev.empty()) {
      result.increments.push_back(lp_norm(difference_magnitude(cur, prev), options.r, ball));
      const std::size_t k = result.increments.size();
      if (k >= 2 && result.increments[k - 1] > result.increments[k - 2]) result.cauchy = false;
    }
    before = std::move(prev);
    prev = std::move(cur);
    m2_before = m2_prev;
    m2_prev = MollifierStencil::make(st, eps).second_moment(st.spatial());
  }
  result.last = prev;
  if (before.empty()) {
    result.limit = prev;
    return result;
  }
  // The leading mollification error is (m2 / 2) Laplacian, with m2 the
  // per-axis second moment of the discrete stencil; eliminate it between
  // the last two iterates.
  const double w = m2_prev / (m2_before - m2_prev);
  for (std::size_t c = 0; c < prev.size(); ++c) {
    std::vector<double> v(prev[c].size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = prev[c][i] + w * (prev[c][i] - before[c][i]);
    const int margin = detect_margin(prev[c].spec(), v);
    result.limit.emplace_back(prev[c].spec(), std::move(v), margin);
  }
  return result;
}

double tail_kernel(int d, double gamma, double s, const Point& y) {
  return heat_kernel(d, {2.0 - gamma}, s, y);
}

double parabolic_tail_potential(const SpaceTimeFunction& f, double gamma, double rho) {
  const auto& st = f.spec();
  const GridSpec& spec = st.spatial();
  const int d = spec.d();
  if (!(gamma >= 0.0) || !(gamma < d + 2)) throw GridError("tail order must lie in [0, d + 2)");
  if (!(st.t0() > 0.0)) throw GridError("tail potential needs positive time nodes");
  if (rho * rho < st.tau()) throw GridError("inner cutoff below time resolution");
  for (double v : f.values())
    if (v < 0.0) throw GridError("tail potential needs f >= 0");

  // f is held at its node value over each time cell; the kernel, which is
  // sharply peaked in s near the excised cylinder, is integrated over the
  // cell by a 32-point midpoint rule. Kernel weights depend on y only through
  // the integer |k|^2, so they are cached per slice.
  constexpr int kSub = 32;
  const int c = spec.center();
  const std::size_t S = spec.size();
  std::vector<int> key(S);
  for (std::size_t i = 0; i < S; ++i) {
    const Node x = spec.unravel(i);
    int k2 = 0;
    for (int a = 0; a < d; ++a) k2 += (x[a] - c) * (x[a] - c);
    key[i] = k2;
  }
  const double h2 = spec.h() * spec.h();
  const double r2_cut = rho * rho * (1.0 - 1e-9);
  const double tau = st.tau();
  std::vector<double> row(static_cast<std::size_t>(st.m()), 0.0);
  parallel_for(0, static_cast<std::size_t>(st.m()), [&](std::size_t lo_j, std::size_t hi_j) {
    std::vector<double> weight(static_cast<std::size_t>(d * c * c + 1));
    for (std::size_t j = lo_j; j < hi_j; ++j) {
      const double t = st.time(static_cast<int>(j));
      const double lo = std::max(0.0, t - tau / 2), hi = t + tau / 2;
      std::fill(weight.begin(), weight.end(), -1.0);
      const bool early = t < rho * rho;
      const auto v = f.slice_values(static_cast<int>(j));
      double acc = 0.0;
      for (std::size_t i = 0; i < S; ++i) {
        if (v[i] == 0.0) continue;
        const double r2 = key[i] * h2;
        if (early && r2 < r2_cut) continue;
        double& w = weight[key[i]];
        if (w < 0.0) {
          w = 0.0;
          for (int q = 0; q < kSub; ++q) {
            const double s = lo + (q + 0.5) * (hi - lo) / kSub;
            w += tail_kernel(d, gamma, s, {std::sqrt(r2), 0.0, 0.0});
          }
          w *= (hi - lo) / kSub;
        }
        acc += w * v[i];
      }
      row[j] = acc;
    }
  });
  double total = 0.0;
  for (double r : row) total += r;
  return total * spec.cell_volume();
}

}  // namespace rieszlab
