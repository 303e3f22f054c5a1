#pragma once

#include "tunnelkit/grid.hpp"

#include <vector>

namespace tunnelkit {

/// First-order fast marching for |grad d| = f on a regular grid.
///
/// `initial` holds the frozen source values (NaN marks an unknown node). The
/// slowness used across a grid edge is the mean of its two end values, which
/// keeps the scheme monotone and makes it second order along grid-aligned rays.
std::vector<double> solve_eikonal(const GridSpec& grid, const std::vector<double>& slowness,
                                  const std::vector<double>& initial);

}  // namespace tunnelkit
