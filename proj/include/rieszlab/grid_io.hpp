#pragma once

// Flat binary dumps (little-endian float64, row-major, axis order t, x1..xd)
// with a JSON sidecar holding the grid fields.

#include <filesystem>

#include "rieszlab/grid.hpp"

namespace rieszlab {

// Writes <stem>.bin and <stem>.json.
void save(const GridFunction& u, const std::filesystem::path& stem);
void save(const SpaceTimeFunction& u, const std::filesystem::path& stem);

GridFunction load_grid_function(const std::filesystem::path& stem);
SpaceTimeFunction load_space_time_function(const std::filesystem::path& stem);

}  // namespace rieszlab
