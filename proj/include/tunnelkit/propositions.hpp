#pragma once

#include "tunnelkit/chart.hpp"
#include "tunnelkit/grid.hpp"
#include "tunnelkit/potential.hpp"

#include <vector>

namespace tunnelkit {

struct Prop1Options {
  // Tube points with s1 mu <= dist(x, dU_E) <= min(s2 mu, band_c mu^{1/2}), mu = sqrt(E).
  double s1 = 0.5;
  double s2 = 2.0;
  double band_c = 1.0;
  int levels = 8;         // distance levels across the band; one K per level
  int per_ray = 24;       // samples per ray inside the band
  double min_r2 = 0.95;   // below this the fit raises PoorFit
};

struct Prop1Sample {
  Vec2 x = Vec2::Zero();
  double level = 0.0;   // dist(x, dU_E)
  double d = 0.0;       // d_E(x)
  double z = 0.0;       // (y1 - y1(x))^2 in principal coordinates
  double defect = 0.0;  // d_E(x) - F_y^E(x)
  double K_hat = 0.0;   // -defect / z
};

struct Prop1Report {
  std::vector<Prop1Sample> samples;
  std::vector<double> level_K;  // least-squares K through the origin per level
  double r2 = 0.0;              // pooled over levels
  double K_min = 0.0;
  double max_defect = 0.0;      // largest d_E - F (should stay <= tolerance)
  double central_error = 0.0;   // max |F - d_E| on the central path against the field
  double field_tolerance = 0.0; // 2 x interpolation error of the field there
};

/// d_E - F_y^E on the tube of `chart`, with d_E from the boundary rays (exact
/// along each ray, away from caustics) and F_y^E from the sheet of the torus
/// whose umbilic is y. Fits d_E - F = -K (y1 - y1(x))^2 level by level.
/// With a field, also compares the central path against the eikonal solution.
/// Throws PoorFit if the pooled R^2 is below min_r2.
Prop1Report prop1_defect_fit(const ActionChart& chart, const SheetChart& sheet,
                             const ScalarField2D* field = nullptr, const Prop1Options& opts = {});

struct Prop2Result {
  double lhs = 0.0;       // d_E(x) - d_0(x)
  double rhs = 0.0;       // sum iota'_j log(z'_j / y'_j)
  double residual = 0.0;  // lhs - rhs
  Vec2 partial = Vec2::Zero();  // the minimizing split (E1, E2)
};

/// Separable potentials only: d_E(x) = min over E1 + E2 = E of the 1-D actions
/// sum_j int sqrt(V_j - E_j) from the turning point, d_0 the same at E_j = 0.
/// The right side uses the harmonic hyperbolic coordinates of each factor.
/// Throws NotSeparable for cross terms.
Prop2Result prop2_separable_check(const PotentialModel& model, const WellData& well, double E,
                                  const Vec2& x);

struct Prop2Fit {
  std::vector<double> energies;
  std::vector<Prop2Result> results;
  double exponent = 0.0;  // slope of log|residual| against log mu
  double rhs_scale_min = 0.0, rhs_scale_max = 0.0;  // rhs / (mu^2 log(1/mu))
};

Prop2Fit prop2_exponent_fit(const PotentialModel& model, const WellData& well,
                            const std::vector<double>& energies, const Vec2& x);

struct Prop3Options {
  std::vector<double> deltas{0.01, 0.005, 0.0025};
  std::vector<double> fractions{0.6, 0.7, 0.8, 0.9};  // along the half geodesic
  double epsilon = 0.1;       // samples stay this far (in fraction) from the far end
  double ratio_tolerance = 0.25;
};

struct Prop3Point {
  Vec2 x = Vec2::Zero();
  double fraction = 0.0;
  double d = 0.0;              // d_E(x, N)
  double dd_dE = 0.0;          // central first difference
  double transit = 0.0;        // int ds / (2 sqrt(V - E)) from N to x
  std::vector<double> second;  // second differences, one per delta
  double ratio = 0.0;
};

struct Prop3Report {
  std::vector<Prop3Point> points;
  double level = 0.0;  // N = {d_E = level}
  int minimizing_intervals = 0;
  bool smooth = false;
};

/// Distance d_{E'}(x, N) to the fixed curve N = {d_E = d_E(x0) / 2} for x on
/// the minimal geodesic, E' on a five-point stencil around E. Rays leave N
/// along its normal. The ratio of successive second-difference changes under
/// stencil halving should approach 4. Throws NonSmooth if a ratio is off by more
/// than ratio_tolerance relative.
Prop3Report prop3_smoothness_check(const PotentialModel& model, const WellData& left, double E,
                                   const Prop3Options& opts = {});

}  // namespace tunnelkit
