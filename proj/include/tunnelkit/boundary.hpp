#pragma once

#include "tunnelkit/potential.hpp"

#include <vector>

namespace tunnelkit {

/// Closed polyline approximating the level set {V = E} around one well.
/// The first vertex is not repeated at the end.
struct WellBoundary {
  double energy = 0.0;
  std::vector<Vec2> polyline;

  bool contains(const Vec2& p) const;
  double distance_to(const Vec2& p) const;
  double max_residual(const PotentialModel& model) const;
  bool is_simple() const;
};

struct ContourOptions {
  int resolution = 128;      // marching-squares cells per box side
  double tol_contour = 1e-10;
};

/// Level set {V = E} enclosing `well.center`, by marching squares with every
/// vertex refined along its grid edge to |V - E| <= tol_contour.
/// Throws EnergyAboveBarrier when the loop merges with the mirror well.
WellBoundary well_boundary(const PotentialModel& model, const WellData& well, double E,
                           const ContourOptions& opts = {});

/// Point where the ray center + r*dir first meets {V = E} (r > 0), refined to
/// |V - E| <= tol. Returns r.
double boundary_radius(const PotentialModel& model, const Vec2& center, const Vec2& dir,
                       double E, double tol = 1e-13);

}  // namespace tunnelkit
