#include "rieszlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "rieszlab/corpus.hpp"
#include "rieszlab/heat.hpp"
#include "rieszlab/singular_ops.hpp"

namespace rieszlab {

namespace {

GridFunction as_function(const GridSpec& spec, std::vector<double> v) {
  const int margin = detect_margin(spec, v);
  return GridFunction(spec, std::move(v), margin);
}

GridFunction product(const GridFunction& a, std::span<const double> b) {
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * b[i];
  return as_function(a.spec(), std::move(v));
}

// sum |v|^p h^d
double power_integral(const GridSpec& spec, std::span<const double> v, double p) {
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  return s * spec.cell_volume();
}

double norm_of(const GridSpec& spec, std::span<const double> v, double p) {
  return std::pow(power_integral(spec, v, p), 1.0 / p);
}

std::vector<double> gradient_magnitude(const GridFunction& u) {
  const auto g = gradient(u);
  return magnitude(g);
}

std::vector<double> hessian_magnitude(const GridFunction& u) {
  const auto g = hessian(u);
  return magnitude(g);
}

MorreyResult homogeneous_morrey(const GridFunction& b, double q, double beta) {
  return elliptic_morrey_norm(b, {q, beta, true, RadiusSet::dyadic(b.spec(), CapMode::homogeneous)});
}

void require(bool ok, const std::string& what) {
  if (!ok) throw HarnessError(what);
}

double dist(const Point& a, const Point& b) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

SpaceTimeFunction st_function(const SpaceTimeGridSpec& spec, std::vector<double> v) {
  const GridSpec& g = spec.spatial();
  int margin = (g.n() + 1) / 2;
  for (int j = 0; j < spec.m(); ++j)
    margin = std::min(margin, detect_margin(g, std::span<const double>(v).subspan(j * g.size(), g.size())));
  return SpaceTimeFunction(spec, std::move(v), margin);
}

// Time derivative with the one-sided end slices zeroed.
SpaceTimeFunction interior_time_derivative(const SpaceTimeFunction& u) {
  const auto dt = time_derivative(u);
  std::vector<double> v(dt.values().begin(), dt.values().end());
  const std::size_t S = u.spec().spatial().size();
  const std::size_t m = static_cast<std::size_t>(u.spec().m());
  std::fill(v.begin(), v.begin() + S, 0.0);
  std::fill(v.begin() + (m - 1) * S, v.end(), 0.0);
  return st_function(u.spec(), std::move(v));
}

SpaceTimeFunction hessian_field(const SpaceTimeFunction& u) {
  const auto h = space_time_hessian(u);
  return st_function(u.spec(), magnitude(h));
}

}  // namespace

CaseResult make_case(std::string case_id, int scale_index, double lhs, double rhs) {
  CaseResult r;
  r.case_id = std::move(case_id);
  r.scale_index = scale_index;
  r.lhs = lhs;
  r.rhs = rhs;
  r.ratio = lhs == 0.0 ? 0.0 : lhs / rhs;
  return r;
}

CaseResult ratio_adams(const GridFunction& b, const GridFunction& f, const AdamsParams& params) {
  const int d = b.spec().d();
  require(params.p > 1.0 && params.p < params.q, "exponent window violated: need 1 < p < q");
  require(params.alpha > 0.0 && params.alpha < d, "exponent window violated: need 0 < alpha < d");
  require(b.spec() == f.spec(), "b and f live on different grids");
  const GridFunction pf = riesz_potential(f, {params.alpha});
  const double lhs = lp_norm(product(pf, b.values()), params.p);
  const MorreyResult bn = homogeneous_morrey(b, params.q, params.alpha);
  CaseResult r = make_case("", 0, lhs, bn.value * lp_norm(f, params.p));
  if (bn.cap_limited) r.flags.push_back("cap_limited");
  return r;
}

std::vector<std::size_t> interior_nodes(const GridSpec& spec) {
  std::vector<std::size_t> out;
  const double half = spec.L() / 2.0 * (1.0 + 1e-12);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Point x = spec.point(i);
    bool in = true;
    for (int a = 0; a < spec.d(); ++a) in = in && std::abs(x[a]) <= half;
    if (in) out.push_back(i);
  }
  return out;
}

SharpMaximalResult ratio_sharp_maximal(const GridFunction& g, double alpha, const RadiusSet& radii,
                                       std::span<const std::size_t> nodes) {
  for (double v : g.values()) require(v >= 0.0, "g must be nonnegative (sign-indefinite input)");
  const GridFunction pg = riesz_potential(g, {alpha});
  const GridFunction mg = fractional_maximal(g, {alpha, radii});
  const std::vector<double> sharp = sharp_function_at(pg, radii, nodes);
  SharpMaximalResult out;
  out.result = make_case("", 0, 0.0, 0.0);
  double best = -1.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double m = mg[nodes[k]];
    if (!(m > 0.0)) continue;
    const double q = sharp[k] / m;
    if (q > best) {
      best = q;
      out.argmax_node = nodes[k];
      out.result = make_case("", 0, sharp[k], m);
    }
  }
  return out;
}

MadBracket mad_bracket_check(const GridFunction& u, const RadiusSet& radii, std::span<const std::size_t> nodes,
                             std::size_t pair_budget) {
  const GridSpec& spec = u.spec();
  MadBracket out;
  double scale = 0.0;
  for (double v : u.values()) scale = std::max(scale, std::abs(v));
  const double slack = 1e-12 * std::max(scale, std::numeric_limits<double>::min());
  std::vector<double> vals;
  for (double rho : radii.radii()) {
    const auto offsets = BallStencil::make(spec, rho).offsets();
    for (std::size_t i : nodes) {
      const Node c = spec.unravel(i);
      vals.clear();
      for (const Node& o : offsets) {
        const Node y{c[0] + o[0], c[1] + o[1], c[2] + o[2]};
        if (spec.contains(y)) vals.push_back(u[spec.index(y)]);
      }
      if (vals.size() * vals.size() > pair_budget) continue;
      const BallOscillation b = ball_oscillation(vals);
      ++out.balls;
      const double lower = b.mad - b.pair_mean, upper = b.pair_mean - 2.0 * b.mad;
      out.worst_lower = std::max(out.worst_lower, lower);
      out.worst_upper = std::max(out.worst_upper, upper);
      if (lower > slack || upper > slack) ++out.violations;
    }
  }
  return out;
}

CaseResult ratio_weighted(const GridFunction& b, const GridFunction& u, const WeightedParams& params,
                          WeightedForm form) {
  require(params.p > 1.0 && params.p < params.q, "exponent window violated: need 1 < p < q");
  require(b.spec() == u.spec(), "b and u live on different grids");
  const GridSpec& spec = u.spec();
  const MorreyResult bn = homogeneous_morrey(b, params.q, 1.0);
  std::vector<double> left, right;
  if (form == WeightedForm::gradient) {
    left.assign(u.values().begin(), u.values().end());
    right = gradient_magnitude(u);
  } else {
    left = gradient_magnitude(u);
    right = hessian_magnitude(u);
  }
  for (std::size_t i = 0; i < left.size(); ++i) left[i] *= b[i];
  CaseResult r = make_case("", 0, norm_of(spec, left, params.p), bn.value * norm_of(spec, right, params.p));
  if (bn.cap_limited) r.flags.push_back("cap_limited");
  return r;
}

CaseResult ratio_weighted_truncated(const GridFunction& b, const GridFunction& u, double p,
                                    const TruncatedMorreyParams& tm) {
  require(p > 1.0 && p < tm.p_b, "exponent window violated: need 1 < p < p_b");
  require(b.spec() == u.spec(), "b and u live on different grids");
  const GridSpec& spec = u.spec();
  std::vector<double> bu(u.size());
  for (std::size_t i = 0; i < bu.size(); ++i) bu[i] = b[i] * u[i];
  const double bhat = truncated_morrey(b, tm).value;
  const double du = power_integral(spec, gradient_magnitude(u), p);
  const double uu = power_integral(spec, u.values(), p);
  return make_case("", 0, power_integral(spec, bu, p), std::pow(bhat, p) * (du + std::pow(tm.rho_b, -p) * uu));
}

CaseResult ratio_hardy(const GridFunction& u, double exponent, HardyForm form) {
  const GridSpec& spec = u.spec();
  const int d = spec.d();
  if (form == HardyForm::gradient)
    require(exponent > 1.0 && exponent < d, "exponent window violated: need 1 < p < d");
  else
    require(exponent > 1.0 && exponent < d / 2.0, "exponent window violated: need 1 < r < d/2");
  const double weight_power = form == HardyForm::gradient ? exponent : 2.0 * exponent;
  const GridFunction w = sample_power_weight(spec, weight_power);
  double lhs = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) lhs += w[i] * std::pow(std::abs(u[i]), exponent);
  lhs *= spec.cell_volume();
  const auto rhs_field = form == HardyForm::gradient ? gradient_magnitude(u) : hessian_magnitude(u);
  return make_case("", 0, lhs, power_integral(spec, rhs_field, exponent));
}

double radial_hardy_ratio(int d, double p, const std::function<double(double)>& u,
                          const std::function<double(double)>& du, double r_max, int intervals) {
  const double dr = r_max / intervals;
  double num = 0.0, den = 0.0;
  for (int k = 0; k < intervals; ++k) {
    const double r = (k + 0.5) * dr;
    num += std::pow(std::abs(u(r)), p) * std::pow(r, d - 1 - p);
    den += std::pow(std::abs(du(r)), p) * std::pow(r, d - 1);
  }
  return num / den;
}

double hardy_near_extremal_ratio(int d, double p, double delta, double log_span) {
  require(delta > 0.0, "near-extremal family needs delta > 0");
  const double c = (d - p) / p;
  // w(s) = e^{delta s} v(s); lhs = int |w|^p, rhs = int |w' - c w|^p
  double num = 1.0 / (p * delta);
  double den = std::pow(std::abs(c - delta), p) / (p * delta);
  const int N = 200000;
  const double ds = log_span / N;
  auto w = [&](double s) { return std::exp(delta * s) * (1.0 - smooth_step(s / log_span)); };
  for (int k = 0; k <= N; ++k) {
    const double s = k * ds;
    const double wt = (k == 0 || k == N) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const double e = std::min(ds, 1e-5);
    const double lo = std::max(0.0, s - e), hi = std::min(log_span, s + e);
    const double dw = (w(hi) - w(lo)) / (hi - lo);
    num += wt * ds / 3.0 * std::pow(std::abs(w(s)), p);
    den += wt * ds / 3.0 * std::pow(std::abs(dw - c * w(s)), p);
  }
  return num / den;
}

double near_extremal_profile(int d, double p, double delta, double log_span, double r_outer, double r) {
  const double r_inner = r_outer * std::exp(-log_span);
  const double s = std::log(r / r_inner);
  return std::pow(r / r_inner, -((d - p) / p - delta)) * (1.0 - smooth_step(s / log_span));
}

CaseResult truncated_inclusion(const GridFunction& b, const TruncatedMorreyParams& tm) {
  const GridSpec& spec = b.spec();
  std::vector<double> cut(b.size(), 0.0);
  const double lim = tm.rho_b * tm.rho_b * (1.0 - 1e-9);
  for (std::size_t i = 0; i < cut.size(); ++i) {
    const Point x = spec.point(i);
    if (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] < lim) cut[i] = b[i];
  }
  const double lhs = homogeneous_morrey(as_function(spec, std::move(cut)), tm.p_b, 1.0).value;
  return make_case("", 0, lhs, truncated_morrey(b, tm).value);
}

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "slope fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "slope fit needs positive data");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]) - mx;
    sxy += a * (std::log(y[i]) - my);
    sxx += a * a;
  }
  return sxy / sxx;
}

SweepResult counterexample_sweep(std::span<const double> kappas, double p, int d, int n) {
  require(kappas.size() >= 2, "sweep needs at least two kappa values");
  require(p > 1.0 && p < d, "exponent window violated: need 1 < p < d");
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    require(kappas[i] > 0.0 && kappas[i] <= 0.25, "kappa must lie in (0, 1/4]");
    if (i > 0) require(kappas[i] < kappas[i - 1], "kappa list must be strictly decreasing");
  }
  SweepResult out;
  for (std::size_t k = 0; k < kappas.size(); ++k) {
    const double kappa = kappas[k];
    const GridSpec spec(d, 4.0 * kappa, n);
    if (spec.h() > kappa / 8.0 * (1.0 + 1e-12))
      throw HarnessError("unresolved kappa: grid spacing exceeds kappa / 8 (need n >= 65)");
    const GridFunction u = sample_u_kappa(spec, kappa);
    const GridFunction b = sample_power_weight(spec, 1.0);
    const auto du = gradient_magnitude(u);
    const auto d2u = hessian_magnitude(u);
    std::vector<double> bdu(du.size());
    for (std::size_t i = 0; i < du.size(); ++i) bdu[i] = b[i] * du[i];
    const BallRegion ball{{0.0, 0.0, 0.0}, 4.0 * kappa};
    auto both = [&](std::vector<double> v, std::vector<double>& normalized, std::vector<double>& raw) {
      const GridFunction f = as_function(spec, std::move(v));
      normalized.push_back(lp_norm(f, p, ball));
      raw.push_back(lp_norm(f, p));
    };
    both(bdu, out.norm_bDu, out.raw_bDu);
    both(d2u, out.norm_D2u, out.raw_D2u);
    both(std::vector<double>(u.values().begin(), u.values().end()), out.norm_u, out.raw_u);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double r = dist(spec.point(i), {0.0, 0.0, 0.0});
      if (r > 2.0 * kappa && r < 3.0 * kappa)
        out.annulus_error = std::max(out.annulus_error, std::abs(kappa * du[i] - 1.0));
    }
    out.annulus_bound = std::max(out.annulus_bound, spec.h() / kappa);
    out.kappa.push_back(kappa);
    char id[48];
    std::snprintf(id, sizeof id, "kappa=%.6g", kappa);
    out.cases.push_back(make_case(id, static_cast<int>(k), out.norm_bDu.back(), out.norm_D2u.back()));
  }
  out.slope_bDu = fit_loglog_slope(out.kappa, out.norm_bDu);
  out.slope_D2u = fit_loglog_slope(out.kappa, out.norm_D2u);
  out.raw_slope_bDu = fit_loglog_slope(out.kappa, out.raw_bDu);
  out.raw_slope_D2u = fit_loglog_slope(out.kappa, out.raw_D2u);
  const auto [lo, hi] = std::minmax_element(out.norm_u.begin(), out.norm_u.end());
  out.u_drift = *hi / *lo;
  return out;
}

double trace_eps_exponent(int d, const TraceParams& tp, TraceMode mode) {
  switch (mode) {
    case TraceMode::lr_global:
    case TraceMode::lr_local: {
      const double k = tp.kappa(d);
      return k / (2.0 - k);
    }
    case TraceMode::morrey_mu:
    case TraceMode::gradient_beta:
      return tp.mu / (2.0 - tp.mu);
    default:
      return 0.0;
  }
}

std::vector<CaseResult> ratio_trace(const SpaceTimeFunction& u, int d, const TraceParams& tp,
                                    std::span<const double> eps_list, TraceMode mode,
                                    const TraceRunOptions& options, const std::string& case_id,
                                    int scale_index) {
  const bool lebesgue = mode == TraceMode::lr_global || mode == TraceMode::lr_local;
  const TraceValidity v =
      validate_trace_params(d, tp, lebesgue ? TraceWindow::lebesgue : TraceWindow::morrey);
  if (!v.valid) throw HarnessError("parameter window violated: " + v.clause);
  const int gamma = static_cast<int>(tp.gamma);
  require(gamma == 0 || gamma == 1, "gamma must be 0 or 1");
  const SpaceTimeGridSpec& st = u.spec();
  const GridSpec& spec = st.spatial();
  const auto t0 = st.time_index(0.0);
  require(t0.has_value(), "t = 0 must be a time node of the slab");

  TraceOptions topt;
  topt.r = tp.r;
  const TraceResult tr = trace(u, gamma, options.mollifier_eps, topt);
  const GridFunction g = as_function(spec, magnitude(tr.limit));

  const SpaceTimeFunction dt = interior_time_derivative(u);
  const SpaceTimeFunction d2 = hessian_field(u);
  const double a = trace_eps_exponent(d, tp, mode);

  double lhs = 0.0, A = 0.0, B = 0.0;
  bool eps_free = false;
  std::vector<std::string> flags;
  switch (mode) {
    case TraceMode::lr_global:
      lhs = lp_norm(g, tp.r);
      A = mixed_lpq_norm(st, dt.values(), tp.p, tp.q) + mixed_lpq_norm(st, d2.values(), tp.p, tp.q);
      B = mixed_lpq_norm(st, u.values(), tp.p, tp.q);
      break;
    case TraceMode::lr_local: {
      require(options.rho > 0.0 && options.rho <= 1.0, "local trace needs 0 < rho <= 1");
      std::vector<double> in(g.size(), 0.0);
      const double lim = options.rho * options.rho * (1.0 - 1e-9);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = spec.point(i);
        if (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] < lim) in[i] = g[i];
      }
      lhs = norm_of(spec, in, tp.r);
      const Cylinder cyl{*t0, spec.origin_index(), 2.0 * options.rho};
      A = mixed_lpq_norm(dt, tp.p, tp.q, cyl) + mixed_lpq_norm(d2, tp.p, tp.q, cyl);
      B = mixed_lpq_norm(u, tp.p, tp.q, cyl);
      break;
    }
    case TraceMode::morrey_mu:
    case TraceMode::gradient_beta: {
      const ParabolicMorreyParams pp{tp.p, tp.q, tp.beta, false, parabolic_radii(st, false)};
      const double lhs_beta = mode == TraceMode::gradient_beta ? tp.beta : tp.beta + tp.gamma - tp.mu;
      lhs = elliptic_morrey_norm(g, {tp.r, lhs_beta, false,
                                     RadiusSet::dyadic(spec, CapMode::inhomogeneous)})
                .value;
      A = parabolic_morrey_norm(st, dt.values(), pp, 1, st.m() - 1).value + parabolic_morrey_norm(d2, pp).value;
      B = parabolic_morrey_norm(u, pp).value;
      break;
    }
    case TraceMode::morrey_full: {
      const ParabolicMorreyParams pp{tp.p, tp.q, tp.beta, false, parabolic_radii(st, false)};
      lhs = elliptic_morrey_norm(g, {tp.r, tp.beta + tp.gamma - 2.0, false,
                                     RadiusSet::dyadic(spec, CapMode::inhomogeneous)})
                .value;
      B = e12_norm(u, pp);
      eps_free = true;
      break;
    }
    case TraceMode::morrey_homogeneous: {
      const ParabolicMorreyParams pp{tp.p, tp.q, tp.beta, true, parabolic_radii(st, true)};
      const MorreyResult l = elliptic_morrey_norm(
          g, {tp.r, tp.beta + tp.gamma - 2.0, true, RadiusSet::dyadic(spec, CapMode::homogeneous)});
      const MorreyResult m1 = parabolic_morrey_norm(st, dt.values(), pp, 1, st.m() - 1);
      const MorreyResult m2 = parabolic_morrey_norm(d2, pp);
      lhs = l.value;
      B = m1.value + m2.value;
      if (l.cap_limited || m1.cap_limited || m2.cap_limited) flags.push_back("cap_limited");
      eps_free = true;
      break;
    }
  }
  if (!tr.cauchy) flags.push_back("trace_not_cauchy");

  std::vector<CaseResult> out;
  if (eps_free) {
    out.push_back(make_case(case_id, scale_index, lhs, B));
    out.back().flags = flags;
    return out;
  }
  const double c = (2.0 * tp.kappa(d) - 2.0 * tp.gamma) / (2.0 - tp.kappa(d));
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    const double eps = eps_list[k];
    double rhs = eps * A + std::pow(eps, -a) * B;
    if (mode == TraceMode::lr_local) {
      const double rho = options.rho;
      rhs = eps * A + (eps / (rho * rho) + std::pow(eps, -a) * std::pow(rho, c)) * B;
    }
    char suffix[32];
    std::snprintf(suffix, sizeof suffix, ":e%02zu", k);
    out.push_back(make_case(case_id + suffix, scale_index, lhs, rhs));
    out.back().flags = flags;
  }
  return out;
}

double holder_quotient(const GridFunction& g, double theta, std::size_t max_pairs) {
  const GridSpec& spec = g.spec();
  std::vector<std::size_t> nodes;
  const double R = spec.L() / 2.0;
  for (std::size_t i = 0; i < spec.size(); ++i)
    if (dist(spec.point(i), {0.0, 0.0, 0.0}) < R) nodes.push_back(i);
  const std::size_t N = nodes.size();
  const std::size_t pairs = N * (N - 1) / 2;
  const std::size_t stride = std::max<std::size_t>(1, (pairs + max_pairs - 1) / max_pairs);
  double best = 0.0;
  std::size_t counter = 0;
  for (std::size_t a = 0; a < N; ++a) {
    const Point x = spec.point(nodes[a]);
    for (std::size_t b = a + 1; b < N; ++b, ++counter) {
      if (counter % stride) continue;
      const double r = dist(x, spec.point(nodes[b]));
      best = std::max(best, std::abs(g[nodes[a]] - g[nodes[b]]) / std::pow(r, theta));
    }
  }
  return best;
}

std::vector<CaseResult> ratio_tail(const SpaceTimeFunction& f, double gamma, double beta,
                                   std::span<const double> rhos, const std::string& case_id) {
  const int d = f.spec().spatial().d();
  require(gamma >= 0.0 && gamma < beta, "gamma >= beta: need 0 <= gamma < beta");
  require(beta <= d + 2.0, "beta exceeds d + 2");
  const RadiusSet radii = parabolic_radii(f.spec(), true);
  const double mb = parabolic_fractional_maximal(f, beta, radii, 0, f.spec().spatial().origin_index());
  std::vector<CaseResult> out;
  for (std::size_t k = 0; k < rhos.size(); ++k) {
    const double rho = rhos[k];
    out.push_back(make_case(case_id, static_cast<int>(k), parabolic_tail_potential(f, gamma, rho),
                            std::pow(rho, gamma - beta) * mb));
  }
  return out;
}

VerificationReport estimate_constant(std::string inequality_id, std::vector<CaseResult> cases,
                                     const EstimateOptions& options) {
  VerificationReport rep;
  rep.inequality_id = std::move(inequality_id);
  std::sort(cases.begin(), cases.end(), [](const CaseResult& a, const CaseResult& b) {
    return a.case_id != b.case_id ? a.case_id < b.case_id : a.scale_index < b.scale_index;
  });
  if (cases.empty()) {
    rep.reason = "no cases";
    return rep;
  }
  for (auto& c : cases) {
    if (!(c.rhs > 0.0) || !std::isfinite(c.rhs)) {
      rep.excluded.push_back({c.case_id + "@" + std::to_string(c.scale_index), "zero rhs"});
    } else if (!std::isfinite(c.lhs)) {
      rep.excluded.push_back({c.case_id + "@" + std::to_string(c.scale_index), "non-finite lhs"});
    } else {
      rep.cases.push_back(std::move(c));
    }
  }
  if (rep.cases.empty()) throw HarnessError("all cases are degenerate (zero or non-finite rhs)");

  std::map<int, double> per_scale, drift_scale;
  const std::string& suf = options.drift_suffix;
  for (const auto& c : rep.cases) {
    rep.empirical_constant = std::max(rep.empirical_constant, c.ratio);
    auto [it, fresh] = per_scale.try_emplace(c.scale_index, c.ratio);
    if (!fresh) it->second = std::max(it->second, c.ratio);
    const bool in_drift =
        suf.empty() || (c.case_id.size() >= suf.size() &&
                        c.case_id.compare(c.case_id.size() - suf.size(), suf.size(), suf) == 0);
    if (in_drift) {
      auto [jt, f2] = drift_scale.try_emplace(c.scale_index, c.ratio);
      if (!f2) jt->second = std::max(jt->second, c.ratio);
    }
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& [s, v] : drift_scale) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  rep.scale_drift = drift_scale.empty() ? 0.0 : (lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity());

  std::vector<std::string> why;
  if (!rep.excluded.empty())
    why.push_back(std::to_string(rep.excluded.size()) + " case(s) excluded for zero or non-finite rhs");
  const bool enough_cases = static_cast<int>(rep.cases.size()) >= options.min_cases;
  const bool enough_scales = static_cast<int>(drift_scale.size()) >= options.min_scales;
  if (!enough_cases) why.push_back("fewer than " + std::to_string(options.min_cases) + " usable cases");
  if (!enough_scales) why.push_back("fewer than " + std::to_string(options.min_scales) + " scales");
  const bool finite = std::isfinite(rep.empirical_constant);
  if (!finite) why.push_back("empirical constant is not finite");
  const bool drift_ok = rep.scale_drift <= options.drift_threshold;
  if (!drift_ok) why.push_back("scale drift exceeds threshold");
  rep.pass = enough_cases && enough_scales && finite && drift_ok;
  for (std::size_t i = 0; i < why.size(); ++i) rep.reason += (i ? "; " : "") + why[i];
  return rep;
}

}  // namespace rieszlab
