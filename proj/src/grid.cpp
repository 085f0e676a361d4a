#include "rieszlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rieszlab/parallel.hpp"
#include "rieszlab/simd.hpp"

namespace rieszlab {

namespace {

// Relative slack for the strict |k| h < rho test, so radii that are exact
// multiples of h do not flip membership on rounding.
constexpr double kBallSlack = 1e-9;

int layer_of(const GridSpec& spec, const Node& node) {
  int layer = spec.n();
  for (int a = 0; a < spec.d(); ++a)
    layer = std::min({layer, node[a], spec.n() - 1 - node[a]});
  return layer;
}

void require_margin(const GridFunction& u, int needed, const char* op) {
  if (u.support_margin() < needed)
    throw GridError(std::string(op) + " needs support_margin >= " + std::to_string(needed) +
                    ", got " + std::to_string(u.support_margin()));
}

std::size_t axis_stride(const GridSpec& spec, int axis) {
  std::size_t stride = 1;
  for (int a = spec.d() - 1; a > axis; --a) stride *= static_cast<std::size_t>(spec.n());
  return stride;
}

}  // namespace

GridSpec::GridSpec(int d, double L, int n) : d_(d), L_(L), n_(n) {
  if (d != 2 && d != 3) throw GridError("dimension must be 2 or 3, got " + std::to_string(d));
  if (!(L > 0.0) || !std::isfinite(L)) throw GridError("half-extent L must be positive");
  if (n < 3 || n % 2 == 0) throw GridError("n must be odd and >= 3, got " + std::to_string(n));
  h_ = 2.0 * L / (n - 1);
  cell_volume_ = std::pow(h_, d);
  size_ = 1;
  for (int a = 0; a < d; ++a) size_ *= static_cast<std::size_t>(n);
}

Point GridSpec::point(const Node& node) const {
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < d_; ++a) p[a] = coord(node[a]);
  return p;
}

Node GridSpec::unravel(std::size_t index) const {
  Node node{0, 0, 0};
  for (int a = d_ - 1; a >= 0; --a) {
    node[a] = static_cast<int>(index % static_cast<std::size_t>(n_));
    index /= static_cast<std::size_t>(n_);
  }
  return node;
}

std::size_t GridSpec::index(const Node& node) const {
  std::size_t idx = 0;
  for (int a = 0; a < d_; ++a) idx = idx * static_cast<std::size_t>(n_) + node[a];
  return idx;
}

std::size_t GridSpec::origin_index() const {
  const int c = center();
  return index(Node{c, c, c});
}

bool GridSpec::contains(const Node& node) const {
  for (int a = 0; a < d_; ++a)
    if (node[a] < 0 || node[a] >= n_) return false;
  return true;
}

GridFunction::GridFunction(GridSpec spec, std::vector<double> values, int support_margin)
    : spec_(spec), values_(std::move(values)), support_margin_(support_margin) {
  if (values_.size() != spec_.size())
    throw GridError("value count " + std::to_string(values_.size()) + " does not match grid size " +
                    std::to_string(spec_.size()));
  if (support_margin_ < 0 || support_margin_ > (spec_.n() + 1) / 2)
    throw GridError("support_margin out of range");
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i]))
      throw GridError("non-finite value at node " + std::to_string(i));
  if (support_margin_ > 0) {
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (values_[i] != 0.0 && layer_of(spec_, spec_.unravel(i)) < support_margin_)
        throw GridError("nonzero value inside the declared support margin at node " +
                        std::to_string(i));
  }
}

GridFunction GridFunction::zeros(const GridSpec& spec) {
  return GridFunction(spec, std::vector<double>(spec.size(), 0.0), (spec.n() + 1) / 2);
}

int detect_margin(const GridSpec& spec, std::span<const double> values) {
  int margin = (spec.n() + 1) / 2;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] != 0.0) margin = std::min(margin, layer_of(spec, spec.unravel(i)));
  return margin;
}

SpaceTimeGridSpec::SpaceTimeGridSpec(GridSpec spatial, double t0, double t1, int m)
    : spatial_(spatial), t0_(t0), t1_(t1), m_(m) {
  if (!(t0 < t1)) throw GridError("time slab needs t0 < t1");
  if (m < 2) throw GridError("time slab needs m >= 2");
  tau_ = (t1 - t0) / (m - 1);
}

std::optional<int> SpaceTimeGridSpec::time_index(double t) const {
  const double j = (t - t0_) / tau_;
  const double r = std::round(j);
  if (std::abs(j - r) > 1e-9 || r < 0 || r > m_ - 1) return std::nullopt;
  return static_cast<int>(r);
}

SpaceTimeFunction::SpaceTimeFunction(SpaceTimeGridSpec spec, std::vector<double> values,
                                     int support_margin, bool one_sided_time_ends)
    : spec_(spec),
      values_(std::move(values)),
      support_margin_(support_margin),
      one_sided_time_ends_(one_sided_time_ends) {
  if (values_.size() != spec_.size())
    throw GridError("space-time value count does not match grid size");
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i]))
      throw GridError("non-finite value at space-time node " + std::to_string(i));
  if (support_margin_ < 0 || support_margin_ > (spec_.spatial().n() + 1) / 2)
    throw GridError("support_margin out of range");
}

SpaceTimeFunction SpaceTimeFunction::zeros(const SpaceTimeGridSpec& spec) {
  return SpaceTimeFunction(spec, std::vector<double>(spec.size(), 0.0),
                           (spec.spatial().n() + 1) / 2);
}

std::span<const double> SpaceTimeFunction::slice_values(int j) const {
  if (j < 0 || j >= spec_.m()) throw GridError("time index out of range");
  const std::size_t s = spec_.spatial().size();
  return std::span<const double>(values_).subspan(static_cast<std::size_t>(j) * s, s);
}

GridFunction SpaceTimeFunction::slice(int j) const {
  const auto v = slice_values(j);
  return GridFunction(spec_.spatial(), std::vector<double>(v.begin(), v.end()),
                      detect_margin(spec_.spatial(), v));
}

RadiusSet::RadiusSet(std::vector<double> radii, CapMode mode)
    : radii_(std::move(radii)), mode_(mode) {
  if (radii_.empty()) throw GridError("empty radius set");
  for (std::size_t i = 0; i < radii_.size(); ++i) {
    if (!(radii_[i] > 0.0) || !std::isfinite(radii_[i]))
      throw GridError("radii must be positive and finite");
    if (i > 0 && !(radii_[i] > radii_[i - 1])) throw GridError("radii must be ascending");
  }
}

RadiusSet RadiusSet::dyadic(const GridSpec& spec, double cap, CapMode mode) {
  const double top = std::min(cap, spec.L() / 2.0);
  if (top < spec.h() * (1.0 - kBallSlack))
    throw GridError("radius cap below grid resolution");
  std::vector<double> radii;
  for (double r = 2.0 * spec.h(); r <= top * (1.0 + 1e-12); r *= 2.0) radii.push_back(r);
  if (radii.empty() || std::abs(radii.back() - top) > 1e-9 * top) radii.push_back(top);
  return RadiusSet(std::move(radii), mode);
}

RadiusSet RadiusSet::dyadic(const GridSpec& spec, CapMode mode) {
  return dyadic(spec, mode == CapMode::inhomogeneous ? 1.0 : spec.L() / 2.0, mode);
}

RadiusSet RadiusSet::scaled(double factor) const {
  std::vector<double> r(radii_);
  for (double& x : r) x *= factor;
  return RadiusSet(std::move(r), mode_);
}

void RadiusSet::check_against(const GridSpec& spec) const {
  if (min() < spec.h() * (1.0 - kBallSlack))
    throw GridError("smallest radius is below the grid spacing");
  if (max() > spec.L() * (1.0 + kBallSlack))
    throw GridError("largest radius exceeds the box half-extent");
}

BallStencil BallStencil::make(const GridSpec& spec, double rho) {
  BallStencil s;
  s.d = spec.d();
  s.radius = rho;
  const double r = rho / spec.h();
  const double r2 = r * r * (1.0 - kBallSlack);
  const int R = static_cast<int>(std::ceil(r));
  const int outer0_range = spec.d() == 3 ? R : 0;
  for (int a = -outer0_range; a <= outer0_range; ++a) {
    for (int b = -R; b <= R; ++b) {
      const double rem = r2 - static_cast<double>(a * a + b * b);
      if (rem <= 0.0) continue;
      int w = static_cast<int>(std::floor(std::sqrt(rem)));
      while (static_cast<double>(w * w) >= rem) --w;
      while (static_cast<double>((w + 1) * (w + 1)) < rem) ++w;
      if (w < 0) continue;
      s.runs.push_back({a, b, w});
      s.count += static_cast<std::size_t>(2 * w + 1);
      s.max_half_width = std::max(s.max_half_width, w);
    }
  }
  if (s.count == 0) throw GridError("region below grid resolution");
  return s;
}

std::vector<Node> BallStencil::offsets() const {
  std::vector<Node> out;
  out.reserve(count);
  for (const Run& run : runs)
    for (int c = -run.half_width; c <= run.half_width; ++c)
      out.push_back(d == 3 ? Node{run.outer0, run.outer1, c} : Node{run.outer1, c, 0});
  return out;
}

std::vector<double> ball_sums(const GridSpec& spec, std::span<const double> values,
                              const BallStencil& stencil) {
  const int n = spec.n();
  const std::size_t nn = static_cast<std::size_t>(n);
  const int W = stencil.max_half_width;
  const std::size_t plen = nn + 2 * static_cast<std::size_t>(W) + 1;
  const std::size_t rows = spec.size() / nn;
  const int rows0 = spec.d() == 3 ? n : 1;  // row (r0, r1) with r1 along axis d-2

  // Prefix sums of each zero-padded row.
  std::vector<double> prefix(rows * plen, 0.0);
  parallel_for(0, rows, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t row = lo; row < hi; ++row) {
      double* P = prefix.data() + row * plen;
      const double* v = values.data() + row * nn;
      double acc = 0.0;
      for (std::size_t c = 0; c < plen - 1; ++c) {
        const long src = static_cast<long>(c) - W;
        if (src >= 0 && src < n) acc += v[src];
        P[c + 1] = acc;
      }
    }
  });

  const auto& kern = simd::active();
  std::vector<double> out(spec.size(), 0.0);
  parallel_for(0, rows, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t row = lo; row < hi; ++row) {
      const int r0 = static_cast<int>(row / nn);
      const int r1 = static_cast<int>(row % nn);
      double* acc = out.data() + row * nn;
      for (const auto& run : stencil.runs) {
        const int s0 = r0 + run.outer0;
        const int s1 = r1 + run.outer1;
        if (s0 < 0 || s0 >= rows0 || s1 < 0 || s1 >= n) continue;
        const double* P = prefix.data() + (static_cast<std::size_t>(s0) * nn + s1) * plen;
        kern.window_accumulate(acc, P, nn, static_cast<std::size_t>(W - run.half_width),
                               static_cast<std::size_t>(W + run.half_width + 1));
      }
    }
  });
  return out;
}

std::vector<double> ball_counts(const GridSpec& spec, const BallStencil& stencil) {
  const std::vector<double> ones(spec.size(), 1.0);
  return ball_sums(spec, ones, stencil);
}

double regularized_power_cell_value(int d, double h, double s) {
  if (!(s >= 0.0) || !(s < d)) throw GridError("singular exponent must lie in [0, d)");
  const double sigma = 2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
  const double he = h * std::pow(std::tgamma(d / 2.0 + 1.0), 1.0 / d) / std::sqrt(std::numbers::pi);
  return sigma * std::pow(he, d - s) / ((d - s) * std::pow(h, d));
}

GridFunction sample(const GridSpec& spec, const ScalarField& f,
                    std::span<const SingularNode> singular) {
  std::vector<double> values(spec.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = f(spec.point(i));
  for (const auto& s : singular) {
    if (s.index >= values.size()) throw GridError("singular node index out of range");
    values[s.index] = s.value;
  }
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]))
      throw GridError("non-finite value at undeclared singular node " + std::to_string(i));
  const int margin = detect_margin(spec, values);
  return GridFunction(spec, std::move(values), margin);
}

namespace {

struct RegionTotals {
  double sum = 0.0;     // sum of |u|^p over grid nodes in the region
  double count = 0.0;   // grid nodes in the region
};

template <typename Inside>
RegionTotals region_totals(const GridFunction& u, double p, const Point& lo, const Point& hi,
                           Inside inside) {
  const GridSpec& spec = u.spec();
  const double h = spec.h();
  Node first{0, 0, 0}, last{0, 0, 0};
  for (int a = 0; a < spec.d(); ++a) {
    first[a] = static_cast<int>(std::ceil((lo[a] + spec.L()) / h - 1e-9));
    last[a] = static_cast<int>(std::floor((hi[a] + spec.L()) / h + 1e-9));
  }
  for (int a = 0; a < spec.d(); ++a) {
    first[a] = std::max(first[a], 0);
    last[a] = std::min(last[a], spec.n() - 1);
  }
  RegionTotals t;
  const int k0 = spec.d() == 3 ? first[2] : 0;
  const int k1 = spec.d() == 3 ? last[2] : 0;
  for (int i = first[0]; i <= last[0]; ++i)
    for (int j = first[1]; j <= last[1]; ++j)
      for (int k = k0; k <= k1; ++k) {
        const Node node{i, j, k};
        if (!inside(spec.point(node))) continue;
        t.count += 1.0;
        t.sum += std::pow(std::abs(u[spec.index(node)]), p);
      }
  return t;
}

}  // namespace

double lp_norm(const GridFunction& u, double p, const Region& region) {
  if (!(p >= 1.0)) throw GridError("lp_norm needs p >= 1");
  const GridSpec& spec = u.spec();
  if (std::holds_alternative<std::monostate>(region)) {
    if (std::isinf(p)) {
      double m = 0.0;
      for (double v : u.values()) m = std::max(m, std::abs(v));
      return m;
    }
    double s = 0.0;
    for (double v : u.values()) s += std::pow(std::abs(v), p);
    return std::pow(s * spec.cell_volume(), 1.0 / p);
  }
  if (std::isinf(p)) throw GridError("lp_norm over a region needs finite p");
  RegionTotals t;
  if (const auto* ball = std::get_if<BallRegion>(&region)) {
    Point lo{}, hi{};
    for (int a = 0; a < 3; ++a) {
      lo[a] = ball->center[a] - ball->radius;
      hi[a] = ball->center[a] + ball->radius;
    }
    const double r2 = ball->radius * ball->radius * (1.0 - kBallSlack);
    t = region_totals(u, p, lo, hi, [&](const Point& x) {
      double s = 0.0;
      for (int a = 0; a < spec.d(); ++a) s += (x[a] - ball->center[a]) * (x[a] - ball->center[a]);
      return s < r2;
    });
  } else {
    const auto& box = std::get<BoxRegion>(region);
    t = region_totals(u, p, box.lo, box.hi, [](const Point&) { return true; });
  }
  if (t.count == 0.0) throw GridError("region below grid resolution");
  return std::pow(t.sum / t.count, 1.0 / p);
}

double ball_average_norm(const GridFunction& u, const Node& center, double rho, double q) {
  if (!(q > 0.0)) throw GridError("ball_average_norm needs q > 0");
  const GridSpec& spec = u.spec();
  const BallStencil stencil = BallStencil::make(spec, rho);
  double s = 0.0, count = 0.0;
  for (const Node& off : stencil.offsets()) {
    Node node{center[0] + off[0], center[1] + off[1], center[2] + off[2]};
    if (!spec.contains(node)) continue;
    s += std::pow(std::abs(u[spec.index(node)]), q);
    count += 1.0;
  }
  if (count == 0.0) throw GridError("region below grid resolution");
  return std::pow(s / count, 1.0 / q);
}

std::vector<GridFunction> gradient(const GridFunction& u) {
  require_margin(u, 1, "gradient");
  const GridSpec& spec = u.spec();
  const int d = spec.d();
  const double inv = 1.0 / (2.0 * spec.h());
  std::vector<GridFunction> out;
  for (int a = 0; a < d; ++a) {
    const std::size_t stride = axis_stride(spec, a);
    std::vector<double> g(spec.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const int c = spec.unravel(i)[a];
      const double up = c + 1 < spec.n() ? u[i + stride] : 0.0;
      const double dn = c > 0 ? u[i - stride] : 0.0;
      g[i] = (up - dn) * inv;
    }
    out.emplace_back(spec, std::move(g), u.support_margin() - 1);
  }
  return out;
}

std::vector<GridFunction> hessian(const GridFunction& u) {
  require_margin(u, 2, "hessian");
  const GridSpec& spec = u.spec();
  const int d = spec.d();
  const double h2 = spec.h() * spec.h();
  const int margin = u.support_margin() - 2;
  auto at = [&](const Node& node) { return spec.contains(node) ? u[spec.index(node)] : 0.0; };

  std::vector<std::vector<double>> comp(static_cast<std::size_t>(d * d));
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      std::vector<double> v(spec.size(), 0.0);
      for (std::size_t i = 0; i < v.size(); ++i) {
        const Node x = spec.unravel(i);
        if (layer_of(spec, x) < margin) continue;
        if (a == b) {
          Node p = x, m = x;
          ++p[a];
          --m[a];
          v[i] = (at(p) - 2.0 * u[i] + at(m)) / h2;
        } else {
          Node pp = x, pm = x, mp = x, mm = x;
          ++pp[a]; ++pp[b];
          ++pm[a]; --pm[b];
          --mp[a]; ++mp[b];
          --mm[a]; --mm[b];
          v[i] = (at(pp) - at(pm) - at(mp) + at(mm)) / (4.0 * h2);
        }
      }
      comp[a * d + b] = v;
      if (a != b) comp[b * d + a] = std::move(v);
    }
  std::vector<GridFunction> out;
  for (auto& v : comp) out.emplace_back(spec, std::move(v), margin);
  return out;
}

SpaceTimeFunction time_derivative(const SpaceTimeFunction& u) {
  const auto& spec = u.spec();
  const int m = spec.m();
  if (m < 3) throw GridError("time_derivative needs m >= 3");
  const std::size_t s = spec.spatial().size();
  const double tau = spec.tau();
  std::vector<double> out(u.size());
  const auto v = u.values();
  for (int j = 0; j < m; ++j) {
    const std::size_t base = static_cast<std::size_t>(j) * s;
    for (std::size_t i = 0; i < s; ++i) {
      if (j == 0)
        out[base + i] = (v[base + s + i] - v[base + i]) / tau;
      else if (j == m - 1)
        out[base + i] = (v[base + i] - v[base - s + i]) / tau;
      else
        out[base + i] = (v[base + s + i] - v[base - s + i]) / (2.0 * tau);
    }
  }
  return SpaceTimeFunction(spec, std::move(out), u.support_margin(), true);
}

std::vector<double> magnitude(std::span<const GridFunction> components) {
  if (components.empty()) return {};
  std::vector<double> out(components.front().size(), 0.0);
  for (const auto& c : components)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[i] * c[i];
  for (double& x : out) x = std::sqrt(x);
  return out;
}

}  // namespace rieszlab
