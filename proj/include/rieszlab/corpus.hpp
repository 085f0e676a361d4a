#pragma once

// Seeded test-function corpora. Every case is a closed-form recipe, so it can
// be sampled on any grid and on its parabolic or elliptic dilations.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rieszlab/grid.hpp"

namespace rieszlab {

enum class CaseKind {
  gaussian,             // Gaussian with a smooth cutoff at 4 sigma
  bump,                 // exp(-1 / (1 - |x - c|^2 / R^2))
  radial_power_cutoff,  // |x|^{-a} chi(|x| / R)
  indicator_ball,       // 1 on B_R(c)
  singular_weight,      // |x|^{-a} on the whole box
  u_kappa,              // f(|x| / kappa) with the annular profile below
  heat_extension,       // heat flow of a Gaussian, cut off in space
  separable_spacetime,  // phi(t) psi(x)
};

std::string_view kind_name(CaseKind kind);
CaseKind parse_kind(std::string_view name);
bool is_space_time(CaseKind kind);
std::vector<CaseKind> elliptic_kinds();
std::vector<CaseKind> space_time_kinds();

struct CorpusCase {
  std::string case_id;
  CaseKind kind;
  std::map<std::string, double> parameters;
  std::variant<GridSpec, SpaceTimeGridSpec> grid;

  double param(const std::string& key) const;
  const GridSpec& spatial() const;
};

// Deterministic in (seed, kinds, grid, count). Elliptic corpora start with the
// fixed representatives whose kind is requested: |x|^{-1}, |x|^{-2}, a
// centered Gaussian and a centered bump.
std::vector<CorpusCase> build_corpus(std::uint64_t seed, std::span<const CaseKind> kinds,
                                     const GridSpec& grid, int count = 20);
std::vector<CorpusCase> build_corpus(std::uint64_t seed, std::span<const CaseKind> kinds,
                                     const SpaceTimeGridSpec& slab, int count = 10);

// Smooth, 0 for t <= 1, equal to t on [2, 3], 0 for t >= 3.75.
double u_kappa_profile(double t);
double smooth_step(double x);  // 0 for x <= 0, 1 for x >= 1, C-infinity
double smooth_cutoff(double r);  // 1 for r <= 1/2, 0 for r >= 1

// Exponent of the origin singularity, or 0 for bounded kinds.
double singular_exponent(const CorpusCase& c);

// x -> u(lambda x) sampled on the grid dilated by lambda; singular origins
// take lambda^{-a} times the cell value of |x|^{-a} on that grid.
GridFunction realize(const CorpusCase& c, double lambda = 1.0);
// (t, x) -> u(lambda^2 t, lambda x) on the parabolically dilated slab.
SpaceTimeFunction realize_space_time(const CorpusCase& c, double lambda = 1.0);

GridFunction sample_u_kappa(const GridSpec& spec, double kappa);
// |x|^{-a} with the origin cell regularized.
GridFunction sample_power_weight(const GridSpec& spec, double a);

}  // namespace rieszlab
