#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rieszlab/morrey.hpp"

using namespace rieszlab;

namespace {

double norm(const Point& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

double bump(const Point& x, double R) {
  const double r2 = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (R * R);
  return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
}

SpaceTimeFunction make_st(const SpaceTimeGridSpec& st, const std::function<double(double, const Point&)>& f) {
  const GridSpec& g = st.spatial();
  std::vector<double> v(st.size());
  for (int j = 0; j < st.m(); ++j)
    for (std::size_t i = 0; i < g.size(); ++i) v[j * g.size() + i] = f(st.time(j), g.point(i));
  int margin = (g.n() + 1) / 2;
  for (int j = 0; j < st.m(); ++j)
    margin = std::min(margin, detect_margin(g, std::span<const double>(v).subspan(j * g.size(), g.size())));
  return SpaceTimeFunction(st, std::move(v), margin);
}

// Continuum mean of |x|^{-2} over B_rho(a e_1) in R^3, by integrating the
// area of each origin-centered sphere that lies inside the ball.
double mean_inverse_square(double a, double rho) {
  const int N = 200000;
  const double lo = std::max(0.0, a - rho), hi = a + rho;
  double s = 0.0;
  for (int k = 0; k < N; ++k) {
    const double r = lo + (k + 0.5) * (hi - lo) / N;
    double frac;  // fraction of the sphere of radius r inside the ball
    if (a == 0.0) {
      frac = r < rho ? 1.0 : 0.0;
    } else if (r <= rho - a) {
      frac = 1.0;
    } else {
      const double c = std::clamp((r * r + a * a - rho * rho) / (2.0 * a * r), -1.0, 1.0);
      frac = 0.5 * (1.0 - c);
    }
    s += 4.0 * std::numbers::pi * frac * (hi - lo) / N;
  }
  return s / (4.0 / 3.0 * std::numbers::pi * rho * rho * rho);
}

}  // namespace

TEST(MixedNorm, ZeroAndConstant) {
  const SpaceTimeGridSpec st(GridSpec(2, 1.0, 33), 0.0, 1.0, 65);
  const Cylinder cyl{10, st.spatial().origin_index(), 0.5};
  EXPECT_EQ(mixed_lpq_norm(SpaceTimeFunction::zeros(st), 2.0, 3.0, cyl), 0.0);
  const auto one = make_st(st, [](double, const Point&) { return 1.0; });
  const double p = 2.0, q = 3.0;
  const double expected = std::pow(std::numbers::pi * 0.25, 1.0 / p) * std::pow(0.25, 1.0 / q);
  EXPECT_NEAR(mixed_lpq_norm(one, p, q, cyl), expected, 0.05 * expected);
  EXPECT_NEAR(normalized_mixed_norm(one, p, q, cyl), 1.0, 1e-14);
  const auto c = make_st(st, [](double, const Point&) { return -2.5; });
  EXPECT_NEAR(normalized_mixed_norm(c, p, q, cyl), 2.5, 1e-13);
}

TEST(MixedNorm, SeparableFactorsExactly) {
  const SpaceTimeGridSpec st(GridSpec(2, 1.0, 17), 0.0, 1.0, 33);
  auto a = [](double t) { return 1.0 + t * t; };
  auto b = [](const Point& x) { return std::cos(x[0]) + x[1]; };
  const auto g = make_st(st, [&](double t, const Point& x) { return a(t) * b(x); });
  const double p = 1.5, q = 2.5, rho = 0.4;
  const Cylinder cyl{3, st.spatial().index({7, 9, 0}), rho};
  const auto [j0, j1] = cylinder_time_range(st, cyl.t_index, rho);
  double ta = 0.0;
  for (int j = j0; j < j1; ++j) ta += st.tau() * std::pow(a(st.time(j)), q);
  const GridSpec& gs = st.spatial();
  double xb = 0.0;
  const Node c = gs.unravel(cyl.center);
  for (const Node& o : BallStencil::make(gs, rho).offsets()) {
    const Node y{c[0] + o[0], c[1] + o[1], 0};
    if (gs.contains(y)) xb += std::pow(std::abs(b(gs.point(y))), p) * gs.cell_volume();
  }
  const double expected = std::pow(ta, 1.0 / q) * std::pow(xb, 1.0 / p);
  EXPECT_NEAR(mixed_lpq_norm(g, p, q, cyl), expected, 1e-13 * expected);
}

TEST(MixedNorm, IndicatorFractions) {
  const SpaceTimeGridSpec st(GridSpec(2, 2.0, 129), 0.0, 1.0, 129);  // tau = 1/128
  const double rho = 0.5;  // rho^2 / tau = 32 slices
  const Cylinder cyl{0, st.spatial().origin_index(), rho};
  const double p = 2.0, q = 3.0;
  const auto left = make_st(st, [](double, const Point& x) { return x[0] < 0.0 ? 1.0 : 0.0; });
  EXPECT_NEAR(normalized_mixed_norm(left, p, q, cyl), std::pow(0.5, 1.0 / p), 2.0 * st.spatial().h());
  const auto early = make_st(st, [](double t, const Point&) { return t < 0.125 - 1e-9 ? 1.0 : 0.0; });
  EXPECT_NEAR(normalized_mixed_norm(early, p, q, cyl), std::pow(0.5, 1.0 / q), 1e-14);
}

TEST(MixedNorm, EqualExponentsGiveSpaceTimeAverage) {
  const SpaceTimeGridSpec st(GridSpec(2, 1.0, 17), 0.0, 1.0, 17);
  const auto g = make_st(st, [](double t, const Point& x) { return std::sin(3 * t + x[0]) - x[1]; });
  const double p = 2.5, rho = 0.45;
  const Cylinder cyl{2, st.spatial().index({5, 6, 0}), rho};
  const auto [j0, j1] = cylinder_time_range(st, cyl.t_index, rho);
  const GridSpec& gs = st.spatial();
  const Node c = gs.unravel(cyl.center);
  double s = 0.0, count = 0.0;
  for (int j = j0; j < j1; ++j)
    for (const Node& o : BallStencil::make(gs, rho).offsets()) {
      const Node y{c[0] + o[0], c[1] + o[1], 0};
      if (!gs.contains(y)) continue;
      s += std::pow(std::abs(g.values()[j * gs.size() + gs.index(y)]), p);
      count += 1.0;
    }
  EXPECT_NEAR(normalized_mixed_norm(g, p, p, cyl), std::pow(s / count, 1.0 / p), 1e-13);
}

TEST(EllipticMorrey, ConstantAttainsAtUnitRadius) {
  const GridSpec g(2, 4.0, 65);
  const auto c = sample(g, [](const Point&) { return 3.0; });
  const auto radii = RadiusSet::dyadic(g, CapMode::inhomogeneous);
  const auto r = elliptic_morrey_norm(c, {2.0, 0.5, false, radii});
  EXPECT_DOUBLE_EQ(r.value, 3.0);
  EXPECT_EQ(r.argmax_radius, 1.0);
  EXPECT_FALSE(r.cap_limited);
  EXPECT_THROW(elliptic_morrey_norm(c, {2.0, 0.5, false, RadiusSet::dyadic(g, CapMode::homogeneous)}),
               GridError);
}

TEST(EllipticMorrey, TiesGoToSmallestRadiusAndFirstCenter) {
  const GridSpec g(2, 4.0, 33);
  const auto c = sample(g, [](const Point&) { return 1.0; });
  const auto r = elliptic_morrey_norm(c, {1.0, 0.0, true, RadiusSet::dyadic(g, CapMode::homogeneous)});
  EXPECT_EQ(r.argmax_radius, 2.0 * g.h());
  EXPECT_EQ(r.argmax_center, 0u);
}

TEST(EllipticMorrey, InverseDistanceAgainstCenterSweep) {
  // Sweep centers along a ray: sup over a/rho of rho * sqrt(mean |x|^{-2}).
  double sweep = 0.0;
  for (double a = 0.0; a <= 3.0; a += 0.05) sweep = std::max(sweep, std::sqrt(mean_inverse_square(a, 1.0)));
  EXPECT_NEAR(std::sqrt(mean_inverse_square(0.0, 1.0)), std::sqrt(3.0), 1e-4);
  EXPECT_NEAR(sweep, std::sqrt(3.0), 1e-4);

  const GridSpec g(3, 2.0, 33);
  const SingularNode s{g.origin_index(), regularized_power_cell_value(3, g.h(), 1.0)};
  const auto b = sample(g, [](const Point& x) { return 1.0 / norm(x); }, {&s, 1});
  const auto r = elliptic_morrey_norm(b, {2.0, 1.0, true, RadiusSet::dyadic(g, CapMode::homogeneous)});
  EXPECT_LE(r.value, std::sqrt(3.0) * 1.05);
  EXPECT_GT(r.value, std::sqrt(3.0) * 0.8);
  EXPECT_EQ(r.argmax_center, g.origin_index());
}

TEST(EllipticMorrey, InverseSquareIsFinite) {
  const GridSpec g(3, 2.0, 33);
  const SingularNode s{g.origin_index(), regularized_power_cell_value(3, g.h(), 2.0)};
  const auto b = sample(g, [](const Point& x) { return 1.0 / (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); },
                        {&s, 1});
  for (double q : {1.1, 1.4}) {
    const auto r = elliptic_morrey_norm(b, {q, 2.0, true, RadiusSet::dyadic(g, CapMode::homogeneous)});
    EXPECT_TRUE(std::isfinite(r.value));
    // mean of r^{-2q} over B_rho is 3/(3-2q) rho^{-2q}
    EXPECT_LT(r.value, 1.1 * std::pow(3.0 / (3.0 - 2.0 * q), 1.0 / q));
  }
}

TEST(EllipticMorrey, DilationOnMatchedGrids) {
  const GridSpec g(3, 2.0, 33);
  auto f = [](const Point& x) { return bump(x, 0.9) * (1.0 + x[0]); };
  const double beta = 1.2, q = 2.0;
  const auto radii = RadiusSet::dyadic(g, CapMode::homogeneous);
  const double base = elliptic_morrey_norm(sample(g, f), {q, beta, true, radii}).value;
  for (double lambda : {2.0, 4.0}) {
    auto fl = [&](const Point& x) { return f({lambda * x[0], lambda * x[1], lambda * x[2]}); };
    const double v =
        elliptic_morrey_norm(sample(g.dilated(lambda), fl), {q, beta, true, radii.scaled(1.0 / lambda)}).value;
    EXPECT_NEAR(v, std::pow(lambda, -beta) * base, 0.02 * v);
  }
}

TEST(EllipticMorrey, MonotoneInRadiusSet) {
  const GridSpec g(2, 2.0, 33);
  const auto f = sample(g, [](const Point& x) { return bump(x, 0.7) + 0.3 * bump({x[0] - 0.4, x[1], 0}, 0.3); });
  const RadiusSet small({0.25, 0.5}, CapMode::homogeneous);
  const RadiusSet big({0.125, 0.25, 0.375, 0.5, 1.0}, CapMode::homogeneous);
  for (double beta : {0.0, 0.7, 2.0})
    EXPECT_GE(elliptic_morrey_norm(f, {1.5, beta, true, big}).value,
              elliptic_morrey_norm(f, {1.5, beta, true, small}).value);
}

TEST(TruncatedMorrey, ConstantWeight) {
  const GridSpec g(3, 2.0, 33);
  const auto c = sample(g, [](const Point&) { return 2.0; });
  EXPECT_NEAR(truncated_morrey(c, {6.0, 0.7}).value, 1.4, 1e-12);
  EXPECT_THROW(truncated_morrey(c, {6.0, 0.01}), GridError);
}

TEST(TruncatedMorrey, LargeExponentAttainsAtTruncationRadius) {
  const GridSpec g(3, 2.0, 33);
  const auto b = sample(g, [](const Point& x) { return 1.0 + std::sin(2 * x[0]) * std::cos(x[1] - x[2]); });
  const double rho_b = 0.5, p_b = 6.0;
  const auto r = truncated_morrey(b, {p_b, rho_b});
  const double at_rho_b = elliptic_morrey_norm(b, {p_b, 1.0, true, RadiusSet({rho_b}, CapMode::homogeneous)}).value;
  EXPECT_NEAR(r.value, at_rho_b, 1e-12 * at_rho_b);
}

TEST(ParabolicMorrey, ConstantAndForwardIndicator) {
  const SpaceTimeGridSpec st(GridSpec(2, 2.0, 33), -1.0, 1.0, 65);
  const auto radii = parabolic_radii(st, false);
  const auto c = make_st(st, [](double, const Point&) { return 1.5; });
  const auto r = parabolic_morrey_norm(c, {2.0, 3.0, 0.5, false, radii});
  EXPECT_NEAR(r.value, 1.5, 1e-12);
  EXPECT_EQ(r.argmax_radius, 1.0);
  const auto step = make_st(st, [](double t, const Point&) { return t >= -1e-12 ? 1.0 : 0.0; });
  EXPECT_NEAR(parabolic_morrey_norm(step, {2.0, 3.0, 0.0, false, radii}).value, 1.0, 1e-12);

  const auto hom = parabolic_radii(st, true);
  const auto rh = parabolic_morrey_norm(c, {2.0, 3.0, 1.0, true, hom});
  EXPECT_NEAR(rh.value, 1.5 * hom.max(), 1e-12);
  EXPECT_TRUE(rh.cap_limited);
}

TEST(ParabolicMorrey, MatchesBruteForceOverCylinders) {
  const SpaceTimeGridSpec st(GridSpec(2, 1.0, 17), 0.0, 0.5, 17);
  const auto g = make_st(st, [](double t, const Point& x) { return bump(x, 0.8) * (1.0 + 2.0 * t) * (1 + x[0]); });
  const RadiusSet radii({0.25, 0.5}, CapMode::homogeneous);
  const double p = 2.0, q = 3.0, beta = 0.8;
  double brute = 0.0;
  for (double rho : radii.radii())
    for (int j = 0; j < st.m(); ++j)
      for (std::size_t i = 0; i < st.spatial().size(); ++i)
        brute = std::max(brute, std::pow(rho, beta) * normalized_mixed_norm(g, p, q, {j, i, rho}));
  EXPECT_NEAR(parabolic_morrey_norm(g, {p, q, beta, true, radii}).value, brute, 1e-12 * brute);
}

TEST(ParabolicMorrey, ParabolicDilation) {
  const SpaceTimeGridSpec st(GridSpec(2, 2.0, 33), 0.0, 1.0, 33);
  auto u = [](double t, const Point& x) { return bump(x, 1.2) * std::exp(-t) * (1.0 + 0.5 * x[1]); };
  const double beta = 1.3;
  const auto radii = parabolic_radii(st, true);
  const double base = parabolic_morrey_norm(make_st(st, u), {2.0, 3.0, beta, true, radii}).value;
  for (double lambda : {2.0, 4.0}) {
    auto ul = [&](double t, const Point& x) { return u(lambda * lambda * t, {lambda * x[0], lambda * x[1], 0}); };
    const double v = parabolic_morrey_norm(make_st(st.dilated(lambda), ul),
                                           {2.0, 3.0, beta, true, radii.scaled(1.0 / lambda)})
                         .value;
    EXPECT_NEAR(v, std::pow(lambda, -beta) * base, 0.02 * v);
  }
}

TEST(E12, SumOfComponentNorms) {
  const SpaceTimeGridSpec st(GridSpec(2, 1.0, 17), 0.0, 1.0, 17);
  const ParabolicMorreyParams params{2.0, 3.0, 1.0, false, parabolic_radii(st, false)};
  EXPECT_EQ(e12_norm(SpaceTimeFunction::zeros(st), params), 0.0);

  const auto u = make_st(st, [](double t, const Point& x) { return bump(x, 0.8) * (1.0 + t); });
  const auto c = e12_components(u, params);
  double expected = parabolic_morrey_norm(u, params).value;
  for (const auto& g : space_time_gradient(u)) expected += parabolic_morrey_norm(g, params).value;
  for (const auto& h : space_time_hessian(u)) expected += parabolic_morrey_norm(h, params).value;
  const auto dt = time_derivative(u);
  expected += parabolic_morrey_norm(dt.spec(), dt.values(), params, 1, st.m() - 1).value;
  EXPECT_EQ(e12_norm(u, params), expected);
  EXPECT_EQ(c.gradient.size(), 2u);
  EXPECT_EQ(c.hessian.size(), 4u);
  EXPECT_EQ(c.hessian[1], c.hessian[2]);
}

TEST(ParabolicMaximal, ConstantAndIndicator) {
  const SpaceTimeGridSpec st(GridSpec(2, 2.0, 65), 0.0, 2.0, 129);
  const auto radii = RadiusSet::dyadic(st.spatial(), 1.0, CapMode::homogeneous);
  const std::size_t o = st.spatial().origin_index();
  const auto one = make_st(st, [](double, const Point&) { return 1.0; });
  EXPECT_NEAR(parabolic_fractional_maximal(one, 2.0, radii, 0, o), 1.0, 1e-12);
  EXPECT_EQ(parabolic_fractional_maximal(SpaceTimeFunction::zeros(st), 2.0, radii, 0, o), 0.0);

  // f = indicator of C_R(0) with R = 1/2; brute force over a fine radius scan.
  const double R = 0.5, beta = 3.0;
  const auto ind = make_st(st, [&](double t, const Point& x) { return t < R * R - 1e-12 && norm(x) < R ? 1.0 : 0.0; });
  const double grid_value = parabolic_fractional_maximal(ind, beta, radii, 0, o);
  double scan = 0.0;
  for (double rho = 0.1; rho <= 1.0; rho += 0.01) {
    const double frac = std::min(1.0, std::pow(R / rho, 4.0));
    scan = std::max(scan, std::pow(rho, beta) * frac);
  }
  EXPECT_NEAR(scan, std::pow(R, beta), 1e-3);
  EXPECT_LE(grid_value, scan * 1.05);
  EXPECT_GE(grid_value, scan * 0.8);
}

TEST(TraceParams, WindowAndExponents) {
  const auto v = validate_trace_params(3, {2, 4, 2, 2, 1, 1.5});
  EXPECT_TRUE(v.valid) << v.clause;
  EXPECT_DOUBLE_EQ(v.kappa, 1.5);
  EXPECT_DOUBLE_EQ(v.eps_exponent, -3.0);

  for (double q : {3.0, 4.0, 6.0}) {
    TraceParams tp{2.0, q, 2.0, 1.5, 1.0, 0.0};
    tp.mu = tp.kappa(3);
    EXPECT_DOUBLE_EQ(tp.mu, 1.0 + 2.0 / q);
    const auto w = validate_trace_params(3, tp);
    ASSERT_TRUE(w.valid) << w.clause;
    EXPECT_NEAR(w.eps_exponent, -(q + 2.0) / (q - 2.0), 1e-12);
  }

  // d/p + 2/q = 1.5 + 1 = 2.5 is not below 2 - gamma + d/r = 2.5
  EXPECT_EQ(validate_trace_params(3, {2, 2, 2, 1.5, 1, 1.9}).clause, "upper window");
  EXPECT_EQ(validate_trace_params(3, {2, 4, 2, 0.5, 1, 1.5}).clause, "lower window");
  EXPECT_EQ(validate_trace_params(3, {2, 4, 2, 2, 1, 2.0}).clause, "mu < 2");
  EXPECT_EQ(validate_trace_params(3, {2, 4, 2, 2, 1, 1.2}).clause, "mu >= kappa");
  EXPECT_EQ(validate_trace_params(3, {2, 4, 1.5, 2, 1, 1.5}).clause, "r >= p");
  EXPECT_EQ(validate_trace_params(3, {2, 4, 2, 2, 0.5, 1.5}).clause, "gamma in {0, 1}");
  const auto lr = validate_trace_params(2, {2, 4, 2, 0, 1, 0}, TraceWindow::lebesgue);
  EXPECT_TRUE(lr.valid);
  EXPECT_DOUBLE_EQ(lr.eps_exponent, -1.5 / 0.5);
}
