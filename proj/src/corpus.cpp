#include "rieszlab/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

#include "rieszlab/heat.hpp"

namespace rieszlab {

namespace {

constexpr std::array<std::pair<CaseKind, std::string_view>, 8> kKindNames{{
    {CaseKind::gaussian, "gaussian"},
    {CaseKind::bump, "bump"},
    {CaseKind::radial_power_cutoff, "radial_power_cutoff"},
    {CaseKind::indicator_ball, "indicator_ball"},
    {CaseKind::singular_weight, "singular_weight"},
    {CaseKind::u_kappa, "u_kappa"},
    {CaseKind::heat_extension, "heat_extension"},
    {CaseKind::separable_spacetime, "separable_spacetime"},
}};

// Uniform doubles from the raw 64-bit stream, which std::mt19937_64 fixes
// exactly; the standard distributions are implementation-defined.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 gen_;
};

double dist2(const Point& x, const Point& c) {
  double s = 0.0;
  for (int a = 0; a < 3; ++a) s += (x[a] - c[a]) * (x[a] - c[a]);
  return s;
}

Point center_of(const CorpusCase& c) {
  auto get = [&](const char* k) {
    const auto it = c.parameters.find(k);
    return it == c.parameters.end() ? 0.0 : it->second;
  };
  return {get("c0"), get("c1"), get("c2")};
}

void draw_center(Draw& draw, int d, double span, std::map<std::string, double>& p) {
  for (int a = 0; a < d; ++a) p["c" + std::to_string(a)] = draw.uniform(-span, span);
}

// Spatial profile of the bounded elliptic kinds at x; also the spatial
// factor of the space-time kinds.
double bounded_value(const CorpusCase& c, const Point& x) {
  const Point ctr = center_of(c);
  const double r2 = dist2(x, ctr);
  switch (c.kind) {
    case CaseKind::gaussian:
    case CaseKind::heat_extension: {
      const double s = c.param("sigma");
      return c.param("amplitude") * std::exp(-r2 / (2.0 * s * s)) * smooth_cutoff(std::sqrt(r2) / (4.0 * s));
    }
    case CaseKind::bump:
    case CaseKind::separable_spacetime: {
      const double R = c.param("radius");
      const double y = r2 / (R * R);
      return y < 1.0 ? c.param("amplitude") * std::exp(-1.0 / (1.0 - y)) : 0.0;
    }
    case CaseKind::indicator_ball:
      return r2 < c.param("radius") * c.param("radius") ? c.param("amplitude") : 0.0;
    case CaseKind::u_kappa:
      return u_kappa_profile(std::sqrt(r2) / c.param("kappa"));
    default:
      throw GridError("not a bounded kind");
  }
}

}  // namespace

std::string_view kind_name(CaseKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

CaseKind parse_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  std::string valid;
  for (const auto& [k, n] : kKindNames) valid += (valid.empty() ? "" : ", ") + std::string(n);
  throw GridError("unknown corpus kind '" + std::string(name) + "'; valid kinds: " + valid);
}

bool is_space_time(CaseKind kind) {
  return kind == CaseKind::heat_extension || kind == CaseKind::separable_spacetime;
}

std::vector<CaseKind> elliptic_kinds() {
  return {CaseKind::gaussian, CaseKind::bump, CaseKind::radial_power_cutoff, CaseKind::indicator_ball,
          CaseKind::singular_weight};
}

std::vector<CaseKind> space_time_kinds() {
  return {CaseKind::heat_extension, CaseKind::separable_spacetime};
}

double CorpusCase::param(const std::string& key) const {
  const auto it = parameters.find(key);
  if (it == parameters.end()) throw GridError("case " + case_id + " has no parameter " + key);
  return it->second;
}

const GridSpec& CorpusCase::spatial() const {
  if (const auto* g = std::get_if<GridSpec>(&grid)) return *g;
  return std::get<SpaceTimeGridSpec>(grid).spatial();
}

double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

double smooth_cutoff(double r) { return 1.0 - smooth_step(2.0 * r - 1.0); }

double u_kappa_profile(double t) {
  return t * smooth_step(t - 1.0) * (1.0 - smooth_step((t - 3.0) / 0.75));
}

double singular_exponent(const CorpusCase& c) {
  return (c.kind == CaseKind::singular_weight || c.kind == CaseKind::radial_power_cutoff) ? c.param("a")
                                                                                          : 0.0;
}

std::vector<CorpusCase> build_corpus(std::uint64_t seed, std::span<const CaseKind> kinds, const GridSpec& grid,
                                     int count) {
  if (kinds.empty()) throw GridError("corpus needs at least one kind");
  for (CaseKind k : kinds)
    if (is_space_time(k))
      throw GridError("kind " + std::string(kind_name(k)) + " needs a space-time grid");
  auto wanted = [&](CaseKind k) { return std::find(kinds.begin(), kinds.end(), k) != kinds.end(); };
  const double L = grid.L();
  const int d = grid.d();
  std::vector<CorpusCase> out;
  auto push = [&](CaseKind kind, std::map<std::string, double> p) {
    char id[64];
    std::snprintf(id, sizeof id, "%02zu-%s", out.size(), std::string(kind_name(kind)).c_str());
    out.push_back({id, kind, std::move(p), grid});
  };
  if (wanted(CaseKind::singular_weight)) {
    push(CaseKind::singular_weight, {{"a", 1.0}});
    if (d > 2) push(CaseKind::singular_weight, {{"a", 2.0}});
  }
  if (wanted(CaseKind::gaussian)) push(CaseKind::gaussian, {{"sigma", 0.125 * L}, {"amplitude", 1.0}});
  if (wanted(CaseKind::bump)) push(CaseKind::bump, {{"radius", 0.375 * L}, {"amplitude", 1.0}});

  Draw draw(seed);
  std::size_t next = 0;
  while (static_cast<int>(out.size()) < count) {
    const CaseKind kind = kinds[next++ % kinds.size()];
    std::map<std::string, double> p;
    switch (kind) {
      case CaseKind::gaussian:
        p["sigma"] = L * draw.uniform(0.1, 0.16);
        p["amplitude"] = draw.uniform(0.5, 2.0);
        draw_center(draw, d, 0.1 * L, p);
        break;
      case CaseKind::bump:
        p["radius"] = L * draw.uniform(0.25, 0.45);
        p["amplitude"] = draw.uniform(0.5, 2.0);
        draw_center(draw, d, 0.1 * L, p);
        break;
      case CaseKind::radial_power_cutoff:
        p["a"] = draw.uniform(0.25, 0.9);
        p["radius"] = L * draw.uniform(0.4, 0.7);
        break;
      case CaseKind::indicator_ball:
        p["radius"] = L * draw.uniform(0.2, 0.5);
        p["amplitude"] = draw.uniform(0.5, 2.0);
        draw_center(draw, d, 0.1 * L, p);
        break;
      case CaseKind::singular_weight:
        p["a"] = draw.uniform(0.5, 1.0);
        break;
      case CaseKind::u_kappa:
        p["kappa"] = L * draw.uniform(1.0 / 16, 1.0 / 8);
        break;
      default:
        break;
    }
    push(kind, std::move(p));
  }
  out.erase(out.begin() + count, out.end());
  return out;
}

std::vector<CorpusCase> build_corpus(std::uint64_t seed, std::span<const CaseKind> kinds,
                                     const SpaceTimeGridSpec& slab, int count) {
  if (kinds.empty()) throw GridError("corpus needs at least one kind");
  for (CaseKind k : kinds)
    if (!is_space_time(k))
      throw GridError("kind " + std::string(kind_name(k)) + " needs a spatial grid");
  const double L = slab.spatial().L();
  const int d = slab.spatial().d();
  const double span = slab.t1() - slab.t0();
  Draw draw(seed ^ 0x5107E5ull);
  std::vector<CorpusCase> out;
  for (int i = 0; i < count; ++i) {
    const CaseKind kind = kinds[static_cast<std::size_t>(i) % kinds.size()];
    std::map<std::string, double> p;
    p["amplitude"] = draw.uniform(0.5, 2.0);
    draw_center(draw, d, 0.1 * L, p);
    if (kind == CaseKind::heat_extension) {
      p["sigma"] = L * draw.uniform(0.08, 0.14);
      p["from"] = slab.t0() - span * draw.uniform(0.05, 0.2);
    } else {
      p["radius"] = L * draw.uniform(0.3, 0.55);
      p["t_center"] = slab.t0() + span * draw.uniform(0.25, 0.75);
      p["t_width"] = span * draw.uniform(0.3, 1.0);
    }
    char id[64];
    std::snprintf(id, sizeof id, "%02d-%s", i, std::string(kind_name(kind)).c_str());
    out.push_back({id, kind, std::move(p), slab});
  }
  return out;
}

GridFunction sample_power_weight(const GridSpec& spec, double a) {
  const SingularNode origin{spec.origin_index(), regularized_power_cell_value(spec.d(), spec.h(), a)};
  return sample(
      spec, [&](const Point& x) { return std::pow(std::sqrt(dist2(x, {0, 0, 0})), -a); },
      std::span<const SingularNode>(&origin, 1));
}

GridFunction sample_u_kappa(const GridSpec& spec, double kappa) {
  return sample(spec, [&](const Point& x) { return u_kappa_profile(std::sqrt(dist2(x, {0, 0, 0})) / kappa); });
}

GridFunction realize(const CorpusCase& c, double lambda) {
  if (is_space_time(c.kind)) throw GridError("case " + c.case_id + " is space-time");
  const GridSpec spec = c.spatial().dilated(lambda);
  auto scaled = [lambda](const Point& x) { return Point{lambda * x[0], lambda * x[1], lambda * x[2]}; };
  if (c.kind == CaseKind::singular_weight || c.kind == CaseKind::radial_power_cutoff) {
    const double a = c.param("a");
    const bool cut = c.kind == CaseKind::radial_power_cutoff;
    const double R = cut ? c.param("radius") : 0.0;
    const SingularNode origin{spec.origin_index(),
                              std::pow(lambda, -a) * regularized_power_cell_value(spec.d(), spec.h(), a)};
    return sample(
        spec,
        [&](const Point& x) {
          const double r = std::sqrt(dist2(scaled(x), {0, 0, 0}));
          return std::pow(r, -a) * (cut ? smooth_cutoff(r / R) : 1.0);
        },
        std::span<const SingularNode>(&origin, 1));
  }
  return sample(spec, [&](const Point& x) { return bounded_value(c, scaled(x)); });
}

SpaceTimeFunction realize_space_time(const CorpusCase& c, double lambda) {
  if (!is_space_time(c.kind)) throw GridError("case " + c.case_id + " is not space-time");
  const auto& slab0 = std::get<SpaceTimeGridSpec>(c.grid);
  const SpaceTimeGridSpec slab = slab0.dilated(lambda);
  const GridSpec& spec = slab.spatial();
  const std::size_t S = spec.size();
  const double L = slab0.spatial().L();
  // spatial cutoff that keeps a zero margin for second derivatives
  std::vector<double> chi(S);
  for (std::size_t i = 0; i < S; ++i) {
    const Point x = spec.point(i);
    chi[i] = smooth_cutoff(lambda * std::sqrt(dist2(x, {0, 0, 0})) / (0.75 * L));
  }
  std::vector<double> v(slab.size());
  if (c.kind == CaseKind::heat_extension) {
    const auto g = sample(spec, [&](const Point& x) {
      return bounded_value(c, Point{lambda * x[0], lambda * x[1], lambda * x[2]});
    });
    const auto u = heat_extension(g, c.param("from") / (lambda * lambda), slab);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = u.values()[k] * chi[k % S];
  } else {
    const double tc = c.param("t_center"), w = c.param("t_width");
    for (int j = 0; j < slab.m(); ++j) {
      const double s = (lambda * lambda * slab.time(j) - tc) / w;
      const double phi = std::exp(-s * s);
      for (std::size_t i = 0; i < S; ++i) {
        const Point x = spec.point(i);
        v[j * S + i] = phi * bounded_value(c, Point{lambda * x[0], lambda * x[1], lambda * x[2]}) * chi[i];
      }
    }
  }
  int margin = (spec.n() + 1) / 2;
  for (int j = 0; j < slab.m(); ++j)
    margin = std::min(margin, detect_margin(spec, std::span<const double>(v).subspan(j * S, S)));
  return SpaceTimeFunction(slab, std::move(v), margin);
}

}  // namespace rieszlab
