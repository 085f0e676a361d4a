#pragma once

// Heat-kernel machinery: the weighted Gaussian kernel P_gamma, its L_s norm
// power law, the backward heat potential R, parabolic mollification, time
// traces and forward heat extensions.

#include <span>
#include <vector>

#include "rieszlab/grid.hpp"

namespace rieszlab {

struct HeatKernelParams {
  double gamma;
  double s = 1.0;  // Lebesgue exponent for norm queries
};

// t^{-(d+gamma)/2} exp(-|x|^2 / (8t)); t must be positive.
double heat_kernel(int d, const HeatKernelParams& params, double t, const Point& x);

// Closed-form slope of log ||P_gamma(t, .)||_{L_s} against log t.
double kernel_norm_slope(int d, const HeatKernelParams& params);

// ||P_gamma(t, .)||_{L_s} by composite Simpson quadrature in the radius.
double kernel_norm(int d, const HeatKernelParams& params, double t);

// Least-squares slope of log ||P_gamma(t, .)||_{L_s} against log t over
// t_grid, which must span at least two decades.
double kernel_norm_exponent(int d, const HeatKernelParams& params, std::span<const double> t_grid);

// max over a fine grid of z exp(-z^2/8); the closed form is sqrt(4/e).
double drift_domination_constant(int samples = 2000001, double z_max = 40.0);

// Rf(t, x) = (4 pi)^{-d/2} int_0^inf s^{-d/2} int exp(-|x-y|^2/(4s)) f(t+s, y) dy ds,
// with f linear between time nodes and zero after the slab. The s integral
// uses 64 log-spaced nodes per decade above tau/4 and a midpoint cell below.
SpaceTimeFunction representation_R(const SpaceTimeFunction& f);

// u(t) = Gaussian of variance 2(t - from) applied to g, for every slab time;
// computed spectrally on a box padded by 10 sqrt(t1 - from) so that wrap-
// around stays below 1e-10.
SpaceTimeFunction heat_extension(const GridFunction& g, double from, const SpaceTimeGridSpec& slab);

// zeta(t, x) = c exp(-1 / (1 - t^2 - |x|^4)) on t^2 + |x|^4 < 1.
double mollifier_profile(double t, const Point& x);

struct MollifierStencil {
  double eps = 0.0;
  int time_radius = 0;   // |k_t| <= time_radius
  std::vector<int> time_offsets;
  std::vector<Node> space_offsets;
  std::vector<double> weights;  // sums to 1

  static MollifierStencil make(const SpaceTimeGridSpec& spec, double eps);
  // sum of w k_1^2 h^2; the stencil is symmetric under axis permutations
  double second_moment(const GridSpec& spec) const;
};

// u * zeta_eps at every node, or at a single time slice.
SpaceTimeFunction mollify(const SpaceTimeFunction& u, double eps);
GridFunction mollify_slice(const SpaceTimeFunction& u, double eps, int t_index);

// Dyadic scales 2^{-k}, k >= 2, that satisfy the resolution bound
// eps >= max(2h, 2 sqrt(tau)), largest first.
std::vector<double> default_eps_sequence(const SpaceTimeGridSpec& spec, int count = 4);

struct TraceResult {
  std::vector<double> eps;
  // D^gamma u^(eps)(0, .) at the smallest eps; one component for gamma = 0,
  // d components for gamma = 1.
  std::vector<GridFunction> last;
  // Extrapolation of the last two iterates in the stencil second moment,
  // which removes the leading (m2 / 2) Laplacian term of the error.
  std::vector<GridFunction> limit;
  // Normalized L_r(B) distances between consecutive iterates.
  std::vector<double> increments;
  bool cauchy = true;  // increments non-increasing
};

struct TraceOptions {
  double r = 2.0;
  BallRegion ball{{0.0, 0.0, 0.0}, 0.0};  // radius 0: B_{L/2}(0)
};

TraceResult trace(const SpaceTimeFunction& u, int gamma, std::span<const double> eps_sequence,
                  const TraceOptions& options = {});

// Kernel of the tail potential: s^{-(d + 2 - gamma)/2} exp(-|y|^2 / (8s)),
// i.e. heat_kernel with gamma replaced by 2 - gamma.
double tail_kernel(int d, double gamma, double s, const Point& y);

// Integral of tail_kernel * f over slab nodes outside C_rho = [0, rho^2) x B_rho,
// with f constant on the time cell [t_j - tau/2, t_j + tau/2] of each node and
// the kernel integrated over that cell. Time nodes must be positive and
// rho^2 >= tau.
double parabolic_tail_potential(const SpaceTimeFunction& f, double gamma, double rho);

}  // namespace rieszlab
