#include "rieszlab/morrey.hpp"

#include <algorithm>
#include <cmath>

#include "rieszlab/parallel.hpp"

namespace rieszlab {

namespace {

constexpr double kRadiusSlack = 1e-12;

void check_cap(const RadiusSet& radii, bool homogeneous) {
  if (!homogeneous && radii.max() > 1.0 + kRadiusSlack)
    throw GridError("inhomogeneous Morrey norms take radii <= 1");
}

// Ball means of |v|^p for every node.
std::vector<double> ball_power_means(const GridSpec& spec, std::span<const double> v, double p,
                                     const BallStencil& stencil, std::span<const double> counts) {
  std::vector<double> pw(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) pw[i] = std::pow(std::abs(v[i]), p);
  auto sums = ball_sums(spec, pw, stencil);
  for (std::size_t i = 0; i < sums.size(); ++i) sums[i] = std::max(0.0, sums[i]) / counts[i];
  return sums;
}

int time_count(const SpaceTimeGridSpec& spec, double rho) {
  const double k = rho * rho / spec.tau();
  return std::max(1, static_cast<int>(std::ceil(k - 1e-9)));
}

}  // namespace

MorreyResult elliptic_morrey_norm(const GridSpec& spec, std::span<const double> f,
                                  const EllipticMorreyParams& params) {
  if (!(params.q >= 1.0)) throw GridError("Morrey exponent q must be >= 1");
  if (!(params.beta >= 0.0)) throw GridError("Morrey scaling exponent must be >= 0");
  check_cap(params.radii, params.homogeneous);
  MorreyResult best;
  bool first = true;
  for (double rho : params.radii.radii()) {
    const auto stencil = BallStencil::make(spec, rho);
    const auto counts = ball_counts(spec, stencil);
    const auto means = ball_power_means(spec, f, params.q, stencil, counts);
    const auto it = std::max_element(means.begin(), means.end());  // first maximal index
    const double value = std::pow(rho, params.beta) * std::pow(*it, 1.0 / params.q);
    if (first || value > best.value) {
      best.value = value;
      best.argmax_center = static_cast<std::size_t>(it - means.begin());
      best.argmax_radius = rho;
      first = false;
    }
  }
  best.cap_limited = params.homogeneous && best.argmax_radius == params.radii.max();
  return best;
}

MorreyResult elliptic_morrey_norm(const GridFunction& f, const EllipticMorreyParams& params) {
  return elliptic_morrey_norm(f.spec(), f.values(), params);
}

RadiusSet truncated_radii(const GridSpec& spec, double rho_b) {
  if (!(rho_b > 0.0)) throw GridError("truncation radius must be positive");
  if (rho_b < spec.h() * (1.0 - 1e-9)) throw GridError("truncation radius below the grid spacing");
  if (rho_b > spec.L() * (1.0 + 1e-9)) throw GridError("truncation radius exceeds the box");
  std::vector<double> radii;
  for (double r = 2.0 * spec.h(); r < rho_b * (1.0 - 1e-9); r *= 2.0) radii.push_back(r);
  radii.push_back(rho_b);
  return RadiusSet(std::move(radii), CapMode::inhomogeneous);
}

MorreyResult truncated_morrey(const GridFunction& b, const TruncatedMorreyParams& params) {
  if (!(params.p_b > 1.0)) throw GridError("truncated Morrey exponent must exceed 1");
  return elliptic_morrey_norm(b, {params.p_b, 1.0, true, truncated_radii(b.spec(), params.rho_b)});
}

std::pair<int, int> cylinder_time_range(const SpaceTimeGridSpec& spec, int t_index, double rho) {
  if (t_index < 0 || t_index >= spec.m()) throw GridError("cylinder anchor outside the slab");
  return {t_index, std::min(spec.m(), t_index + time_count(spec, rho))};
}

double mixed_lpq_norm(const SpaceTimeFunction& g, double p, double q, const Cylinder& cyl) {
  const auto& st = g.spec();
  const GridSpec& spec = st.spatial();
  const auto [j0, j1] = cylinder_time_range(st, cyl.t_index, cyl.rho);
  const auto offsets = BallStencil::make(spec, cyl.rho).offsets();
  const Node c = spec.unravel(cyl.center);
  double total = 0.0;
  for (int j = j0; j < j1; ++j) {
    const auto slice = g.slice_values(j);
    double s = 0.0;
    for (const Node& o : offsets) {
      const Node y{c[0] + o[0], c[1] + o[1], c[2] + o[2]};
      if (spec.contains(y)) s += std::pow(std::abs(slice[spec.index(y)]), p);
    }
    total += st.tau() * std::pow(s * spec.cell_volume(), q / p);
  }
  return std::pow(total, 1.0 / q);
}

double normalized_mixed_norm(const SpaceTimeFunction& g, double p, double q, const Cylinder& cyl) {
  const auto& st = g.spec();
  const GridSpec& spec = st.spatial();
  const auto [j0, j1] = cylinder_time_range(st, cyl.t_index, cyl.rho);
  const auto offsets = BallStencil::make(spec, cyl.rho).offsets();
  const Node c = spec.unravel(cyl.center);
  double count = 0.0;
  for (const Node& o : offsets)
    if (spec.contains({c[0] + o[0], c[1] + o[1], c[2] + o[2]})) count += 1.0;
  const double indicator =
      std::pow(st.tau() * (j1 - j0) * std::pow(count * spec.cell_volume(), q / p), 1.0 / q);
  return mixed_lpq_norm(g, p, q, cyl) / indicator;
}

double mixed_lpq_norm(const SpaceTimeGridSpec& spec, std::span<const double> g, double p, double q) {
  const std::size_t s = spec.spatial().size();
  if (g.size() != spec.size()) throw GridError("value count does not match the slab");
  double total = 0.0;
  for (int j = 0; j < spec.m(); ++j) {
    double inner = 0.0;
    for (std::size_t i = 0; i < s; ++i) inner += std::pow(std::abs(g[j * s + i]), p);
    total += spec.tau() * std::pow(inner * spec.spatial().cell_volume(), q / p);
  }
  return std::pow(total, 1.0 / q);
}

RadiusSet parabolic_radii(const SpaceTimeGridSpec& spec, bool homogeneous) {
  const double cap = homogeneous ? std::sqrt(spec.t1() - spec.t0()) : 1.0;
  return RadiusSet::dyadic(spec.spatial(), cap,
                           homogeneous ? CapMode::homogeneous : CapMode::inhomogeneous);
}

MorreyResult parabolic_morrey_norm(const SpaceTimeGridSpec& st, std::span<const double> g,
                                   const ParabolicMorreyParams& params, int time_lo, int time_hi) {
  if (!(params.p >= 1.0) || !(params.q >= 1.0)) throw GridError("mixed exponents must be >= 1");
  if (!(params.beta >= 0.0)) throw GridError("Morrey scaling exponent must be >= 0");
  check_cap(params.radii, params.homogeneous);
  if (time_hi < 0) time_hi = st.m();
  if (time_lo < 0 || time_hi > st.m() || time_lo >= time_hi) throw GridError("bad time window");
  const GridSpec& spec = st.spatial();
  const std::size_t S = spec.size();
  const int T = time_hi - time_lo;
  const double qp = params.q / params.p;

  MorreyResult best;
  bool first = true;
  for (double rho : params.radii.radii()) {
    const auto stencil = BallStencil::make(spec, rho);
    const auto counts = ball_counts(spec, stencil);
    // prefix[k * S + i] = sum over the first k slices of (ball mean |g|^p)^{q/p}
    std::vector<double> prefix(static_cast<std::size_t>(T + 1) * S, 0.0);
    std::vector<std::vector<double>> slices(static_cast<std::size_t>(T));
    parallel_for(0, static_cast<std::size_t>(T), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t k = lo; k < hi; ++k) {
        const auto v = g.subspan((time_lo + k) * S, S);
        auto m = ball_power_means(spec, v, params.p, stencil, counts);
        for (double& x : m) x = std::pow(x, qp);
        slices[k] = std::move(m);
      }
    });
    for (int k = 0; k < T; ++k)
      for (std::size_t i = 0; i < S; ++i)
        prefix[(k + 1) * S + i] = prefix[k * S + i] + slices[k][i];

    const int K = time_count(st, rho);
    double top = -1.0;
    int top_t = 0;
    std::size_t top_i = 0;
    for (int k = 0; k < T; ++k) {
      const int end = std::min(T, k + K);
      const double len = end - k;
      for (std::size_t i = 0; i < S; ++i) {
        const double mean = std::max(0.0, prefix[end * S + i] - prefix[k * S + i]) / len;
        if (mean > top) {
          top = mean;
          top_t = time_lo + k;
          top_i = i;
        }
      }
    }
    const double value = std::pow(rho, params.beta) * std::pow(top, 1.0 / params.q);
    if (first || value > best.value) {
      best.value = value;
      best.argmax_center = top_i;
      best.argmax_time = top_t;
      best.argmax_radius = rho;
      first = false;
    }
  }
  best.cap_limited = params.homogeneous && best.argmax_radius == params.radii.max();
  return best;
}

MorreyResult parabolic_morrey_norm(const SpaceTimeFunction& g, const ParabolicMorreyParams& params) {
  return parabolic_morrey_norm(g.spec(), g.values(), params);
}

std::vector<SpaceTimeFunction> space_time_gradient(const SpaceTimeFunction& u) {
  const auto& st = u.spec();
  const int d = st.spatial().d();
  const std::size_t S = st.spatial().size();
  if (u.support_margin() < 1) throw GridError("gradient needs support_margin >= 1");
  std::vector<std::vector<double>> out(static_cast<std::size_t>(d), std::vector<double>(st.size()));
  for (int j = 0; j < st.m(); ++j) {
    const auto g = gradient(u.slice(j));
    for (int a = 0; a < d; ++a) std::copy(g[a].values().begin(), g[a].values().end(), out[a].begin() + j * S);
  }
  std::vector<SpaceTimeFunction> result;
  for (auto& v : out) result.emplace_back(st, std::move(v), u.support_margin() - 1);
  return result;
}

std::vector<SpaceTimeFunction> space_time_hessian(const SpaceTimeFunction& u) {
  const auto& st = u.spec();
  const int d = st.spatial().d();
  const std::size_t S = st.spatial().size();
  if (u.support_margin() < 2) throw GridError("hessian needs support_margin >= 2");
  std::vector<std::vector<double>> out(static_cast<std::size_t>(d * d), std::vector<double>(st.size()));
  for (int j = 0; j < st.m(); ++j) {
    const auto H = hessian(u.slice(j));
    for (int a = 0; a < d * d; ++a)
      std::copy(H[a].values().begin(), H[a].values().end(), out[a].begin() + j * S);
  }
  std::vector<SpaceTimeFunction> result;
  for (auto& v : out) result.emplace_back(st, std::move(v), u.support_margin() - 2);
  return result;
}

std::vector<double> magnitude(std::span<const SpaceTimeFunction> components) {
  if (components.empty()) return {};
  std::vector<double> out(components.front().size(), 0.0);
  for (const auto& c : components) {
    const auto v = c.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i] * v[i];
  }
  for (double& x : out) x = std::sqrt(x);
  return out;
}

double E12Components::total() const {
  double s = u + time_derivative;
  for (double v : gradient) s += v;
  for (double v : hessian) s += v;
  return s;
}

E12Components e12_components(const SpaceTimeFunction& u, const ParabolicMorreyParams& params) {
  E12Components c;
  c.u = parabolic_morrey_norm(u, params).value;
  for (const auto& g : space_time_gradient(u)) c.gradient.push_back(parabolic_morrey_norm(g, params).value);
  for (const auto& h : space_time_hessian(u)) c.hessian.push_back(parabolic_morrey_norm(h, params).value);
  const auto dt = time_derivative(u);
  // The first and last slices hold one-sided differences; skip them.
  c.time_derivative =
      parabolic_morrey_norm(dt.spec(), dt.values(), params, 1, dt.spec().m() - 1).value;
  return c;
}

double e12_norm(const SpaceTimeFunction& u, const ParabolicMorreyParams& params) {
  return e12_components(u, params).total();
}

double parabolic_fractional_maximal(const SpaceTimeFunction& f, double beta, const RadiusSet& radii,
                                    int t_index, std::size_t center) {
  if (!(beta > 0.0)) throw GridError("parabolic maximal exponent must be positive");
  const auto& st = f.spec();
  const GridSpec& spec = st.spatial();
  if (beta > spec.d() + 2) throw GridError("parabolic maximal exponent must be <= d + 2");
  const Node c = spec.unravel(center);
  double best = 0.0;
  for (double rho : radii.radii()) {
    const auto [j0, j1] = cylinder_time_range(st, t_index, rho);
    const auto offsets = BallStencil::make(spec, rho).offsets();
    double sum = 0.0, count = 0.0;
    for (int j = j0; j < j1; ++j) {
      const auto slice = f.slice_values(j);
      for (const Node& o : offsets) {
        const Node y{c[0] + o[0], c[1] + o[1], c[2] + o[2]};
        if (!spec.contains(y)) continue;
        sum += std::abs(slice[spec.index(y)]);
        count += 1.0;
      }
    }
    best = std::max(best, std::pow(rho, beta) * sum / count);
  }
  return best;
}

TraceValidity validate_trace_params(int d, const TraceParams& tp, TraceWindow window) {
  TraceValidity v;
  v.kappa = tp.kappa(d);
  auto fail = [&](const char* clause) {
    v.valid = false;
    v.clause = clause;
    return v;
  };
  if (tp.gamma != 0.0 && tp.gamma != 1.0) return fail("gamma in {0, 1}");
  if (!(tp.p > 1.0) || !(tp.q > 1.0) || !(tp.r >= 1.0)) return fail("exponents");
  if (!(tp.r >= tp.p)) return fail("r >= p");
  const double scale = d / tp.p + 2.0 / tp.q;
  if (window == TraceWindow::morrey) {
    if (!(2.0 - tp.gamma < tp.beta)) return fail("lower window");
    if (!(tp.beta <= scale)) return fail("middle window");
    if (!(scale < 2.0 - tp.gamma + d / tp.r)) return fail("upper window");
    if (!(v.kappa <= tp.mu)) return fail("mu >= kappa");
    if (!(tp.mu < 2.0)) return fail("mu < 2");
    v.eps_exponent = -tp.mu / (2.0 - tp.mu);
  } else {
    if (!(v.kappa < 2.0)) return fail("kappa < 2");
    v.eps_exponent = -v.kappa / (2.0 - v.kappa);
  }
  v.valid = true;
  return v;
}

}  // namespace rieszlab
