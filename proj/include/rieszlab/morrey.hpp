#pragma once

// Elliptic and parabolic Morrey norms, mixed L_{p,q} norms on forward
// cylinders C_rho(t, x) = [t, t + rho^2) x B_rho(x), and the exponent window
// checks for trace estimates.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rieszlab/grid.hpp"

namespace rieszlab {

struct MorreyResult {
  double value = 0.0;
  std::size_t argmax_center = 0;  // spatial node index
  int argmax_time = -1;           // time node index (parabolic only)
  double argmax_radius = 0.0;
  bool cap_limited = false;       // homogeneous and attained at the largest radius
};

struct EllipticMorreyParams {
  double q;
  double beta;
  bool homogeneous;
  RadiusSet radii;
};

// max over radii and node-centered balls of rho^beta * (mean_B |f|^q)^{1/q}.
// Ties go to the smaller radius, then to the lower node index.
MorreyResult elliptic_morrey_norm(const GridSpec& spec, std::span<const double> f,
                                  const EllipticMorreyParams& params);
MorreyResult elliptic_morrey_norm(const GridFunction& f, const EllipticMorreyParams& params);

struct TruncatedMorreyParams {
  double p_b;
  double rho_b;
};

// Radii {2h, 4h, ...} below rho_b, plus rho_b itself.
RadiusSet truncated_radii(const GridSpec& spec, double rho_b);
MorreyResult truncated_morrey(const GridFunction& b, const TruncatedMorreyParams& params);

struct Cylinder {
  int t_index;        // anchor time node
  std::size_t center; // spatial node index
  double rho;
};

// Time nodes t_j with t_j - t in [0, rho^2), clipped to the slab: [first, last).
std::pair<int, int> cylinder_time_range(const SpaceTimeGridSpec& spec, int t_index, double rho);

// Unnormalized: (sum_j tau (sum_{B} |g|^p h^d)^{q/p})^{1/q} over the discrete cylinder.
double mixed_lpq_norm(const SpaceTimeFunction& g, double p, double q, const Cylinder& cyl);
// Divided by the same quantity for the indicator of the cylinder.
double normalized_mixed_norm(const SpaceTimeFunction& g, double p, double q, const Cylinder& cyl);
// Unnormalized over the whole slab for raw values laid out like a SpaceTimeFunction.
double mixed_lpq_norm(const SpaceTimeGridSpec& spec, std::span<const double> g, double p, double q);

struct ParabolicMorreyParams {
  double p;
  double q;
  double beta;
  bool homogeneous;
  RadiusSet radii;
};

// Default radii: dyadic up to 1 (inhomogeneous) or min(L/2, sqrt(t1 - t0)).
RadiusSet parabolic_radii(const SpaceTimeGridSpec& spec, bool homogeneous);

// Time slices [time_lo, time_hi) are the only ones read; by default the slab.
MorreyResult parabolic_morrey_norm(const SpaceTimeGridSpec& spec, std::span<const double> g,
                                   const ParabolicMorreyParams& params, int time_lo = 0,
                                   int time_hi = -1);
MorreyResult parabolic_morrey_norm(const SpaceTimeFunction& g, const ParabolicMorreyParams& params);

struct E12Components {
  double u = 0.0;
  std::vector<double> gradient;  // per D_i u
  std::vector<double> hessian;   // row-major D_ij u
  double time_derivative = 0.0;  // over interior time nodes only
  double total() const;
};

E12Components e12_components(const SpaceTimeFunction& u, const ParabolicMorreyParams& params);
double e12_norm(const SpaceTimeFunction& u, const ParabolicMorreyParams& params);

// Spatial derivatives of every time slice.
std::vector<SpaceTimeFunction> space_time_gradient(const SpaceTimeFunction& u);
std::vector<SpaceTimeFunction> space_time_hessian(const SpaceTimeFunction& u);
std::vector<double> magnitude(std::span<const SpaceTimeFunction> components);

// max over radii of rho^beta * mean of |f| over C_rho(at).
double parabolic_fractional_maximal(const SpaceTimeFunction& f, double beta, const RadiusSet& radii,
                                    int t_index, std::size_t center);

struct TraceParams {
  double p, q, r, beta, gamma, mu;
  double kappa(int d) const { return gamma + d / p + 2.0 / q - d / r; }
};

enum class TraceWindow {
  morrey,    // 2 - gamma < beta <= d/p + 2/q < 2 - gamma + d/r, kappa <= mu < 2, r >= p
  lebesgue,  // kappa < 2, r >= p
};

struct TraceValidity {
  bool valid = false;
  std::string clause;         // first violated clause, empty when valid
  double kappa = 0.0;
  double eps_exponent = 0.0;  // -mu/(2 - mu) (morrey) or -kappa/(2 - kappa) (lebesgue)
};

TraceValidity validate_trace_params(int d, const TraceParams& tp,
                                    TraceWindow window = TraceWindow::morrey);

}  // namespace rieszlab
