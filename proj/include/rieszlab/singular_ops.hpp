#pragma once

// Riesz potential, fractional maximal function and sharp function on a grid.

#include <cstdint>
#include <span>
#include <vector>

#include "rieszlab/grid.hpp"

namespace rieszlab {

struct RieszParams {
  double alpha;
};

enum class ConvolutionBackend { fft, direct };

// h^d * sum_j K(x_i - x_j) f_j with K(x) = |x|^{alpha - d}; the origin cell
// carries the cell average of K.
GridFunction riesz_potential(const GridFunction& f, const RieszParams& params,
                             ConvolutionBackend backend = ConvolutionBackend::fft);

struct MaximalParams {
  double beta;
  RadiusSet radii;
};

// max over radii of rho^beta * mean_{B_rho(x)} |g|
GridFunction fractional_maximal(const GridFunction& g, const MaximalParams& params);

inline constexpr std::uint64_t kSharpSeed = 0x5EED;
inline constexpr std::size_t kDefaultPairBudget = 4096u * 4096u;

struct BallOscillation {
  double pair_mean;  // mean of |v_i - v_j| over all ordered pairs
  double mad;        // mean of |v_i - mean(v)|
};

// Exact, from the sorted values.
BallOscillation ball_oscillation(std::span<const double> values);

// Sup over radii of the pairwise mean oscillation on B_rho(x), for every node.
// Balls with more than pair_budget ordered pairs are estimated from
// pair_budget uniformly drawn pairs; the draw is seeded from kSharpSeed, the
// node and the radius index.
GridFunction sharp_function(const GridFunction& u, const RadiusSet& radii,
                            std::size_t pair_budget = kDefaultPairBudget);

// Same, restricted to the listed nodes.
std::vector<double> sharp_function_at(const GridFunction& u, const RadiusSet& radii,
                                      std::span<const std::size_t> nodes,
                                      std::size_t pair_budget = kDefaultPairBudget);

}  // namespace rieszlab
