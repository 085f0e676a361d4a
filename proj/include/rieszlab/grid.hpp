#pragma once

// Uniform box grids, sampled functions, quadrature, finite differences and
// discrete balls. Functions vanish outside the box; region averages divide by
// the number of grid nodes inside the region, so a ball that pokes out of the
// box averages over its intersection with the grid.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace rieszlab {

class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Point = std::array<double, 3>;  // unused trailing coordinates are zero
using Node = std::array<int, 3>;

class GridSpec {
 public:
  GridSpec(int d, double L, int n);

  int d() const { return d_; }
  double L() const { return L_; }
  int n() const { return n_; }
  double h() const { return h_; }
  double cell_volume() const { return cell_volume_; }
  std::size_t size() const { return size_; }
  int center() const { return (n_ - 1) / 2; }

  double coord(int i) const { return -L_ + i * h_; }
  Point point(const Node& node) const;
  Point point(std::size_t index) const { return point(unravel(index)); }
  Node unravel(std::size_t index) const;
  std::size_t index(const Node& node) const;
  std::size_t origin_index() const;
  bool contains(const Node& node) const;

  // Same node count on the box [-L/lambda, L/lambda]^d.
  GridSpec dilated(double lambda) const { return GridSpec(d_, L_ / lambda, n_); }

  bool operator==(const GridSpec& other) const {
    return d_ == other.d_ && L_ == other.L_ && n_ == other.n_;
  }

 private:
  int d_;
  double L_;
  int n_;
  double h_;
  double cell_volume_;
  std::size_t size_;
};

class GridFunction {
 public:
  GridFunction(GridSpec spec, std::vector<double> values, int support_margin);
  static GridFunction zeros(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  int support_margin() const { return support_margin_; }

 private:
  GridSpec spec_;
  std::vector<double> values_;
  int support_margin_;
};

// Largest m such that every node within m layers of the boundary is zero.
int detect_margin(const GridSpec& spec, std::span<const double> values);

class SpaceTimeGridSpec {
 public:
  SpaceTimeGridSpec(GridSpec spatial, double t0, double t1, int m);

  const GridSpec& spatial() const { return spatial_; }
  double t0() const { return t0_; }
  double t1() const { return t1_; }
  int m() const { return m_; }
  double tau() const { return tau_; }
  double time(int j) const { return t0_ + j * tau_; }
  std::size_t size() const { return static_cast<std::size_t>(m_) * spatial_.size(); }

  // Index of the time node equal to t (within 1e-9 tau), if any.
  std::optional<int> time_index(double t) const;

  // Parabolic dilation: space by 1/lambda, time by 1/lambda^2.
  SpaceTimeGridSpec dilated(double lambda) const {
    return SpaceTimeGridSpec(spatial_.dilated(lambda), t0_ / (lambda * lambda),
                             t1_ / (lambda * lambda), m_);
  }

 private:
  GridSpec spatial_;
  double t0_, t1_;
  int m_;
  double tau_;
};

class SpaceTimeFunction {
 public:
  SpaceTimeFunction(SpaceTimeGridSpec spec, std::vector<double> values, int support_margin,
                    bool one_sided_time_ends = false);
  static SpaceTimeFunction zeros(const SpaceTimeGridSpec& spec);

  const SpaceTimeGridSpec& spec() const { return spec_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> slice_values(int j) const;
  GridFunction slice(int j) const;
  std::size_t size() const { return values_.size(); }
  int support_margin() const { return support_margin_; }
  // Set on outputs of time_derivative: the first and last slabs hold
  // one-sided differences.
  bool one_sided_time_ends() const { return one_sided_time_ends_; }

 private:
  SpaceTimeGridSpec spec_;
  std::vector<double> values_;
  int support_margin_;
  bool one_sided_time_ends_;
};

enum class CapMode { inhomogeneous, homogeneous };

class RadiusSet {
 public:
  RadiusSet(std::vector<double> radii, CapMode mode);

  // {2h, 4h, ...} up to min(cap, L/2); the endpoint min(cap, L/2) is appended
  // when it is not already a member.
  static RadiusSet dyadic(const GridSpec& spec, double cap, CapMode mode);
  // Default caps: 1 for inhomogeneous, L/2 for homogeneous.
  static RadiusSet dyadic(const GridSpec& spec, CapMode mode);

  std::span<const double> radii() const { return radii_; }
  CapMode mode() const { return mode_; }
  double max() const { return radii_.back(); }
  double min() const { return radii_.front(); }

  RadiusSet scaled(double factor) const;
  // Validates min >= h and max <= L for the given grid.
  void check_against(const GridSpec& spec) const;

 private:
  std::vector<double> radii_;
  CapMode mode_;
};

// Discrete ball: integer offsets k with |k| h < rho, stored as runs along the
// last (fastest) axis.
struct BallStencil {
  struct Run {
    int outer0;     // offset along axis 0 (d = 3) or 0
    int outer1;     // offset along the second-to-last axis
    int half_width; // run covers [-w, w] along the last axis
  };
  int d = 0;
  double radius = 0.0;
  std::vector<Run> runs;
  std::size_t count = 0;
  int max_half_width = 0;

  static BallStencil make(const GridSpec& spec, double rho);
  std::vector<Node> offsets() const;
};

// Sum of values over the ball centered at every node (zero extension).
std::vector<double> ball_sums(const GridSpec& spec, std::span<const double> values,
                              const BallStencil& stencil);
// Number of grid nodes in the ball centered at every node.
std::vector<double> ball_counts(const GridSpec& spec, const BallStencil& stencil);

// Cell average of |x|^{-s} over the ball of volume h^d, used as the value at
// the singular node. Requires 0 <= s < d.
double regularized_power_cell_value(int d, double h, double s);

struct SingularNode {
  std::size_t index;
  double value;
};

using ScalarField = std::function<double(const Point&)>;

// Samples f at every node. Declared singular nodes take the supplied value;
// any other non-finite value is an error naming the node.
GridFunction sample(const GridSpec& spec, const ScalarField& f,
                    std::span<const SingularNode> singular = {});

struct BallRegion {
  Point center;
  double radius;
};
struct BoxRegion {
  Point lo;
  Point hi;
};
using Region = std::variant<std::monostate, BallRegion, BoxRegion>;

// Unnormalized over the whole grid; the normalized average over a region.
double lp_norm(const GridFunction& u, double p, const Region& region = {});

// (mean over grid nodes of B_rho(center) of |u|^q)^{1/q}
double ball_average_norm(const GridFunction& u, const Node& center, double rho, double q);

std::vector<GridFunction> gradient(const GridFunction& u);
// Row-major d x d; entry (i, j) at i * d + j. Symmetric by construction.
std::vector<GridFunction> hessian(const GridFunction& u);

SpaceTimeFunction time_derivative(const SpaceTimeFunction& u);

// Pointwise Euclidean magnitude of a vector/matrix field.
std::vector<double> magnitude(std::span<const GridFunction> components);

}  // namespace rieszlab
