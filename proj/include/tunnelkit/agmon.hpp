#pragma once

#include "tunnelkit/boundary.hpp"
#include "tunnelkit/grid.hpp"
#include "tunnelkit/potential.hpp"

#include <vector>

namespace tunnelkit {

struct AgmonOptions {
  /// The source band is {E < V <= E + w}, w = band_factor dx max|grad V| on the
  /// boundary plus lambda_max^2 (band_factor dx)^2.
  double band_factor = 4.0;
  int min_band_nodes = 8;
  ContourOptions contour;
};

/// Agmon length from x down to {V <= E} along the steepest-descent line of V,
/// i.e. the 1-D integral of sqrt(V - E). Used for the source band, where the
/// descent line and the geodesic agree to leading order. Optionally returns the
/// foot point on {V = E}.
double descent_action(const PotentialModel& model, const Vec2& x, double E, Vec2* foot = nullptr);

/// Agmon distance at E = 0 near a minimum, from the Taylor solution
/// phi = phi2 + phi3 + phi4 of |grad phi|^2 = V (principal coordinates).
double local_agmon_zero(const PotentialModel& model, const WellData& well, const Vec2& x);
/// Gradient of the same Taylor phase, in x coordinates.
Vec2 local_agmon_zero_gradient(const PotentialModel& model, const WellData& well, const Vec2& x);

/// d_E(x) = Agmon distance from the well's {V <= E} component, by fast
/// marching seeded on a thin band around the boundary. Nodes inside the
/// well's own component are tagged Inside with d = 0.
/// Throws GridTooCoarse if the band has fewer than min_band_nodes nodes.
ScalarField2D agmon_distance(const PotentialModel& model, double E, const WellData& well,
                             const GridSpec& grid, const AgmonOptions& opts = {});

/// Distance from the union of both wells' components.
ScalarField2D agmon_distance(const PotentialModel& model, double E, const WellData& left,
                             const WellData& right, const GridSpec& grid,
                             const AgmonOptions& opts = {});

struct S0Result {
  double S0 = 0.0;
  Vec2 xE = Vec2::Zero();  // argmin on the symmetry axis
  ScalarField2D left_field;
};

/// S0(E) = min over the axis of d_{E,L} + d_{E,R} = 2 min d_{E,L} on x1 = 0.
/// The grid needs a node column on x1 = 0.
S0Result s0_between_wells(const PotentialModel& model, double E, const WellData& left,
                          const GridSpec& grid, const AgmonOptions& opts = {});

/// Largest | |grad d|^2 - (V - E)+ | over Outside nodes whose one-sided
/// (upwind) differences stay in Outside nodes, divided by the grid spacing.
double eikonal_residual_constant(const ScalarField2D& field, const PotentialModel& model,
                                 double E);

}  // namespace tunnelkit
