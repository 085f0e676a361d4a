#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "rieszlab/heat.hpp"

using namespace rieszlab;

namespace {

constexpr double kPi = std::numbers::pi;

double norm2(const Point& x) { return x[0] * x[0] + x[1] * x[1] + x[2] * x[2]; }

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

// Closed-form Gaussian of variance v per coordinate, evolved for time s.
double evolved_gaussian(int d, double v, double s, const Point& x) {
  const double w = v + 2.0 * s;
  return std::pow(v / w, d / 2.0) * std::exp(-norm2(x) / (2.0 * w));
}

// (1 - |y|^2)^4 on |y| < 1 with y = (x - c)/a, and its Laplacian.
double poly_bump(double r2) { return r2 < 1.0 ? std::pow(1.0 - r2, 4) : 0.0; }
double poly_bump_laplacian(int d, double r2, double a) {
  if (r2 >= 1.0) return 0.0;
  const double w = 1.0 - r2;
  return (48.0 * w * w * r2 - 8.0 * d * w * w * w) / (a * a);
}

// u = phi(t) psi(x) with compact support inside the slab; returns
// max |R f - u| / max |u| for f = -(d/dt + Laplacian) u.
double representation_residual(int n, int m) {
  const SpaceTimeGridSpec st(GridSpec(2, 2.0, n), 0.0, 1.0, m);
  const double a = 1.0, tc = 0.45, ta = 0.35;
  auto psi = [&](const Point& x) { return poly_bump(norm2(x) / (a * a)); };
  auto phi = [&](double t) { return poly_bump((t - tc) * (t - tc) / (ta * ta)); };
  auto dphi = [&](double t) {
    const double y = (t - tc) / ta;
    return y * y < 1.0 ? -8.0 * y * std::pow(1.0 - y * y, 3) / ta : 0.0;
  };
  const auto u = make_st(st, [&](double t, const Point& x) { return phi(t) * psi(x); });
  const auto f = make_st(st, [&](double t, const Point& x) {
    return -(dphi(t) * psi(x) + phi(t) * poly_bump_laplacian(2, norm2(x) / (a * a), a));
  });
  const auto Rf = representation_R(f);
  double err = 0.0, top = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    err = std::max(err, std::abs(Rf.values()[i] - u.values()[i]));
    top = std::max(top, std::abs(u.values()[i]));
  }
  return err / top;
}

}  // namespace

TEST(HeatKernel, PlugInValues) {
  EXPECT_DOUBLE_EQ(heat_kernel(3, {1.0}, 1.0, {0, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(heat_kernel(2, {0.0}, 0.25, {0, 0, 0}), 4.0);
  double prev = heat_kernel(3, {0.0}, 0.5, {0, 0, 0});
  for (int k = 1; k < 20; ++k) {
    const double v = heat_kernel(3, {0.0}, 0.5, {0.2 * k, 0, 0});
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_THROW(heat_kernel(2, {0.0}, 0.0, {0, 0, 0}), GridError);
}

TEST(HeatKernel, NormMatchesGaussianIntegral) {
  // int exp(-s|x|^2/(8t)) dx = (8 pi t / s)^{d/2}
  for (int d : {2, 3})
    for (double gamma : {0.0, 1.0})
      for (double s : {1.0, 2.0, 3.5})
        for (double t : {0.01, 1.0, 7.0}) {
          const double expected =
              std::pow(std::pow(t, -s * (d + gamma) / 2.0) * std::pow(8.0 * kPi * t / s, d / 2.0), 1.0 / s);
          EXPECT_NEAR(kernel_norm(d, {gamma, s}, t) / expected, 1.0, 1e-9) << d << " " << gamma << " " << s;
        }
}

TEST(HeatKernel, NormExponentFits) {
  std::vector<double> ts;
  for (int k = 0; k <= 24; ++k) ts.push_back(std::pow(10.0, -2.0 + k / 6.0));
  EXPECT_NEAR(kernel_norm_exponent(3, {1.0, 1.0}, ts), -0.5, 1e-3);
  EXPECT_NEAR(kernel_norm_exponent(2, {0.0, 1.0}, ts), 0.0, 1e-3);
  EXPECT_NEAR(kernel_norm_exponent(3, {0.0, 2.0}, ts), -0.75, 1e-3);
  const std::vector<double> narrow{1.0, 2.0, 5.0};
  EXPECT_THROW(kernel_norm_exponent(3, {0.0, 1.0}, narrow), GridError);
}

TEST(HeatKernel, DriftDominationConstant) {
  const double c = drift_domination_constant();
  EXPECT_LE(c, std::sqrt(4.0 / std::exp(1.0)) + 1e-9);
  EXPECT_GE(c, std::sqrt(4.0 / std::exp(1.0)) - 1e-9);
}

TEST(Representation, ZeroInput) {
  const SpaceTimeGridSpec st(GridSpec(2, 1.0, 17), 0.0, 1.0, 16);
  const auto r = representation_R(SpaceTimeFunction::zeros(st));
  for (double v : r.values()) EXPECT_EQ(v, 0.0);
}

TEST(Representation, RejectsSupportReachingSlabEnd) {
  const SpaceTimeGridSpec st(GridSpec(2, 1.0, 17), 0.0, 1.0, 16);
  const auto one = make_st(st, [](double, const Point&) { return 1.0; });
  EXPECT_THROW(representation_R(one), GridError);
}

TEST(Representation, InvertsBackwardHeatOperatorUnderRefinement) {
  const double coarse = representation_residual(33, 64);
  const double fine = representation_residual(65, 128);
  EXPECT_LT(coarse, 5e-2);
  EXPECT_LT(fine, coarse / 1.9);
}

TEST(Representation, GaussianPulseMatchesClosedForm) {
  // f = G_v(x) phi(t) with a smooth pulse phi. The spatial factor evolves in
  // closed form, v / (v + 2s) at the origin in d = 2; the remaining s
  // integral is done by a fine midpoint rule.
  const double v = 0.05, tc = 0.375, ta = 0.15;
  auto phi = [&](double t) { return poly_bump((t - tc) * (t - tc) / (ta * ta)); };
  const SpaceTimeGridSpec st(GridSpec(2, 2.0, 65), 0.0, 1.0, 257);
  const auto f = make_st(st, [&](double t, const Point& x) { return phi(t) * std::exp(-norm2(x) / (2.0 * v)); });
  const auto Rf = representation_R(f);
  const auto& g = st.spatial();
  for (int j : {0, 32, 64, 96}) {
    const double t = st.time(j);
    const int K = 2000000;
    double expected = 0.0;
    for (int k = 0; k < K; ++k) {
      const double s = (k + 0.5) / K;
      expected += phi(t + s) * v / (v + 2.0 * s) / K;
    }
    EXPECT_NEAR(Rf.slice_values(j)[g.origin_index()] / expected, 1.0, 1e-3) << j;
  }
}

TEST(HeatExtension, GaussianVarianceGrowsLinearly) {
  const GridSpec g(2, 3.0, 97);
  const double v = 0.0625;
  const auto g0 = sample(g, [&](const Point& x) { return std::exp(-norm2(x) / (2.0 * v)); });
  const SpaceTimeGridSpec st(g, -0.1, 0.0, 11);
  const auto u = heat_extension(g0, -0.1, st);
  double err = 0.0;
  for (int j = 0; j < st.m(); ++j)
    for (std::size_t i = 0; i < g.size(); ++i)
      err = std::max(err, std::abs(u.slice_values(j)[i] - evolved_gaussian(2, v, st.time(j) + 0.1, g.point(i))));
  EXPECT_LT(err, 1e-10);
}

TEST(HeatExtension, MassIsConserved) {
  const GridSpec g(2, 3.0, 65);
  const auto g0 = sample(g, [&](const Point& x) {
    const double r2 = norm2(x);
    return r2 < 0.5 ? std::exp(-1.0 / (1.0 - 2.0 * r2)) : 0.0;
  });
  const SpaceTimeGridSpec st(g, 0.0, 0.1, 9);
  const auto u = heat_extension(g0, 0.0, st);
  const double m0 = lp_norm(g0, 1.0);
  for (int j = 0; j < st.m(); ++j) {
    double m = 0.0;
    for (double x : u.slice_values(j)) m += x;
    EXPECT_NEAR(m * g.cell_volume() / m0, 1.0, 1e-6);
  }
  EXPECT_THROW(heat_extension(g0, 0.05, st), GridError);
}

TEST(Mollifier, ExactOnConstantsAndLinears) {
  const SpaceTimeGridSpec st(GridSpec(2, 2.0, 33), -0.5, 0.5, 65);
  const double eps = 0.3;
  const auto c = make_st(st, [](double, const Point&) { return 2.5; });
  const auto lin = make_st(st, [](double t, const Point& x) { return 1.0 + 3.0 * x[0] - 2.0 * x[1] + 5.0 * t; });
  const auto mc = mollify_slice(c, eps, 32);
  const auto ml = mollify_slice(lin, eps, 32);
  const auto& g = st.spatial();
  for (int a = 10; a <= 22; ++a)
    for (int b = 10; b <= 22; ++b) {
      const std::size_t i = g.index({a, b, 0});
      EXPECT_NEAR(mc[i], 2.5, 1e-13);
      EXPECT_NEAR(ml[i], lin.slice_values(32)[i], 1e-13);
    }
  const auto stencil = MollifierStencil::make(st, eps);
  double sum = 0.0;
  for (double w : stencil.weights) sum += w;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_THROW(MollifierStencil::make(st, 0.1), GridError);
}

TEST(Mollifier, TimeStepIsMonotoneAndMatchesDirectSum) {
  const SpaceTimeGridSpec st(GridSpec(2, 1.0, 17), -0.5, 0.5, 129);
  const double eps = 0.25;
  const auto step = make_st(st, [](double t, const Point&) { return t >= 0.0 ? 1.0 : 0.0; });
  const auto u = mollify(step, eps);
  const auto& g = st.spatial();
  const std::size_t o = g.origin_index();
  // direct oracle: weight of all stencil entries whose source slice has t >= 0
  double prev = -1.0;
  for (int j = 0; j < st.m(); ++j) {
    double num = 0.0, den = 0.0;
    for (int kt = -20; kt <= 20; ++kt)
      for (int a = -8; a <= 8; ++a)
        for (int b = -8; b <= 8; ++b) {
          const double w = mollifier_profile(kt * st.tau() / (eps * eps), {a * g.h() / eps, b * g.h() / eps, 0});
          den += w;
          const int src = j - kt;
          if (src >= 0 && src < st.m() && st.time(src) >= 0.0) num += w;
        }
    EXPECT_NEAR(u.slice_values(j)[o], num / den, 1e-13);
    if (st.time(j) + eps * eps <= st.t1()) EXPECT_GE(u.slice_values(j)[o], prev - 1e-15);
    prev = u.slice_values(j)[o];
    if (st.time(j) < -eps * eps) EXPECT_EQ(u.slice_values(j)[o], 0.0);
    if (st.time(j) >= eps * eps && st.time(j) + eps * eps <= st.t1()) EXPECT_NEAR(u.slice_values(j)[o], 1.0, 1e-14);
  }
}

// Largest |a_i - b(x_i)| over nodes of B_{L/2}(0).
double inner_error(const GridFunction& a, const std::function<double(const Point&)>& b) {
  const GridSpec& spec = a.spec();
  const double R2 = spec.L() * spec.L() / 4.0;
  double err = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Point x = spec.point(i);
    if (norm2(x) < R2) err = std::max(err, std::abs(a[i] - b(x)));
  }
  return err;
}

const std::vector<double> kDyadicEps{0.5, 0.25, 0.125};

TEST(Trace, TimeIndependentRecoversSlice) {
  const SpaceTimeGridSpec st(GridSpec(2, 2.0, 65), -0.25, 0.24609375, 128);
  // compact, so the mollified slice keeps a zero margin for the gradient
  const double R = 1.2;
  auto g = [&](const Point& x) { return poly_bump(norm2(x) / (R * R)); };
  auto dg = [&](const Point& x, int a) {
    const double r2 = norm2(x) / (R * R);
    return r2 < 1.0 ? -8.0 * x[a] / (R * R) * std::pow(1.0 - r2, 3) : 0.0;
  };
  const auto u = make_st(st, [&](double, const Point& x) { return g(x); });
  const auto tr = trace(u, 0, kDyadicEps);
  EXPECT_LT(inner_error(tr.limit[0], g), 1e-3);
  EXPECT_LT(inner_error(tr.limit[0], g), inner_error(tr.last[0], g) / 10.0);
  EXPECT_TRUE(tr.cauchy);
  ASSERT_EQ(tr.increments.size(), 2u);

  // peak of |Dg| is at |x| = R / sqrt(7)
  const double peak = 8.0 / (R * std::sqrt(7.0)) * std::pow(6.0 / 7.0, 3);
  const auto tr1 = trace(u, 1, kDyadicEps);
  ASSERT_EQ(tr1.last.size(), 2u);
  EXPECT_LT(inner_error(tr1.limit[0], [&](const Point& x) { return dg(x, 0); }), 1e-2 * peak);
  EXPECT_LT(inner_error(tr1.limit[1], [&](const Point& x) { return dg(x, 1); }), 1e-2 * peak);
  EXPECT_TRUE(tr1.cauchy);
}

TEST(Trace, HeatExtensionOfGaussian) {
  const SpaceTimeGridSpec st(GridSpec(2, 2.0, 129), -0.25, -0.25 + 511.0 / 1024, 512);
  const double v = 0.16;
  const auto& spec = st.spatial();
  const auto g0 = sample(spec, [&](const Point& x) { return std::exp(-norm2(x) / (2.0 * v)); });
  const auto u = heat_extension(g0, -0.25, st);
  const std::vector<double> eps{0.25, 0.125, 0.0625};
  const auto tr = trace(u, 0, eps);
  const double peak = evolved_gaussian(2, v, 0.25, {0, 0, 0});
  const double err = inner_error(tr.limit[0], [&](const Point& x) { return evolved_gaussian(2, v, 0.25, x); });
  EXPECT_LT(err / peak, 1e-3);
  EXPECT_TRUE(tr.cauchy);
}

TEST(Trace, RejectsBadInputs) {
  const SpaceTimeGridSpec st(GridSpec(2, 2.0, 33), 0.0, 1.0, 65);
  const auto u = SpaceTimeFunction::zeros(st);
  const std::vector<double> eps{0.5, 0.25};
  EXPECT_THROW(trace(u, 0, eps), GridError);  // t = 0 is the first slice
  const SpaceTimeGridSpec mid(GridSpec(2, 2.0, 33), -0.5, 0.5, 65);
  const auto w = SpaceTimeFunction::zeros(mid);
  EXPECT_THROW(trace(w, 2, eps), GridError);
  const std::vector<double> up{0.25, 0.5};
  EXPECT_THROW(trace(w, 0, up), GridError);
}

TEST(TailPotential, AnnularCylinderHasClosedForm) {
  // d = 2, gamma = 0, f = 1 on C_{2 rho}: the integral over C_{2 rho} \ C_rho
  // of s^{-2} exp(-|y|^2/(8s)) equals 8 pi ln 4 for every rho.
  const double rho = 0.5, tau = 1.0 / 512;
  const int m = 512;
  const SpaceTimeGridSpec st(GridSpec(2, 1.25, 161), tau / 2, tau / 2 + (m - 1) * tau, m);
  const auto f = make_st(st, [&](double t, const Point& y) {
    return (t < 4 * rho * rho && norm2(y) < 4 * rho * rho * (1 - 1e-9)) ? 1.0 : 0.0;
  });
  const double value = parabolic_tail_potential(f, 0.0, rho);
  EXPECT_NEAR(value / (8.0 * kPi * std::log(4.0)), 1.0, 2e-2);
  EXPECT_EQ(parabolic_tail_potential(SpaceTimeFunction::zeros(st), 0.0, rho), 0.0);
  const auto neg = make_st(st, [](double, const Point&) { return -1.0; });
  EXPECT_THROW(parabolic_tail_potential(neg, 0.0, rho), GridError);
}

TEST(TailPotential, PowerProfileScalesLikeRhoToGammaMinusBeta) {
  // The pixelized cylinder boundary makes the sum first order in h, so the
  // slope is checked after eliminating that term between two resolutions.
  const double gamma = 0.0, beta = 3.0;
  std::vector<double> slopes;
  for (int res : {1, 2}) {
    const int m = 128 * res;
    const double tau = 1.0 / m;
    const SpaceTimeGridSpec st(GridSpec(2, 2.0, 64 * res + 1), tau / 2, tau / 2 + (m - 1) * tau, m);
    const auto f = make_st(st, [&](double t, const Point& y) { return std::pow(t + norm2(y), -beta / 2); });
    const double a = parabolic_tail_potential(f, gamma, 0.125);
    const double b = parabolic_tail_potential(f, gamma, 0.25);
    slopes.push_back(std::log2(b / a));
  }
  EXPECT_LT(std::abs(slopes[1] - (gamma - beta)), std::abs(slopes[0] - (gamma - beta)));
  EXPECT_NEAR(2.0 * slopes[1] - slopes[0], gamma - beta, 0.05);
}
