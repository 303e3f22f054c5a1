#pragma once

#include "tunnelkit/potential.hpp"

#include <limits>
#include <vector>

namespace tunnelkit {

struct PathSample {
  double t = 0.0;
  Vec2 x = Vec2::Zero();
  Vec2 xi = Vec2::Zero();
  double action = 0.0;  // cumulative integral of xi . dx
  // Variation along the launch family and the transversal Jacobian
  // J = det(dx/dt, dx/dtheta) = cross(2 xi, dx).
  Vec2 dx = Vec2::Zero();
  Vec2 dxi = Vec2::Zero();
  double J = 0.0;
  double Jdot = 0.0;
};

enum class StopReason { TimeLimit, Axis, Reentry, Caustic, Escape };

/// Sampled bicharacteristic of q = xi^2 - V at q = -E.
struct GeodesicPath {
  double energy = 0.0;
  Vec2 source = Vec2::Zero();
  std::vector<PathSample> samples;
  StopReason stop = StopReason::TimeLimit;

  const PathSample& back() const { return samples.back(); }
};

struct FlowOptions {
  double t_max = 5.0;
  double step = 1e-3;
  double tol_shell = 1e-6;
  bool stop_at_axis = false;      // stop on x1 = 0, landing exactly on it
  bool stop_at_caustic = false;   // stop when J changes sign
  bool stop_on_reentry = true;    // stop when the path turns back into {V <= E}
  double initial_action = 0.0;
  double max_radius = std::numeric_limits<double>::infinity();  // stop when |x| exceeds it
};

/// Integrates x' = 2 xi, xi' = grad V together with the variational equations
/// dx' = 2 dxi, dxi' = Hess V dx, using the fourth-order Yoshida composition of
/// velocity Verlet. Throws ShellDrift when | |xi|^2 - (V - E) | exceeds
/// tol_shell (1 + t).
GeodesicPath instanton_flow(const PotentialModel& model, const Vec2& x0, const Vec2& xi0, double E,
                            const FlowOptions& opts, const Vec2& dx0 = Vec2::Zero(),
                            const Vec2& dxi0 = Vec2::Zero());

/// Launch data for one member of a family of bicharacteristics.
struct LaunchPoint {
  double theta = 0.0;
  Vec2 x = Vec2::Zero();
  Vec2 xi = Vec2::Zero();
  Vec2 dx = Vec2::Zero();   // d x / d theta
  Vec2 dxi = Vec2::Zero();  // d xi / d theta
  double action = 0.0;
};

/// E > 0: the boundary point c + r(theta) (cos theta, sin theta) of {V = E}
/// with xi = 0. E = 0: a point on the well's unstable manifold at radius eps
/// (principal coordinates eps (cos, sin) of the direction) with xi = grad phi.
LaunchPoint launch_point(const PotentialModel& model, const WellData& well, double E, double theta,
                         double eps = 1e-3);

/// Shoots from a launch point.
GeodesicPath shoot(const PotentialModel& model, const WellData& well, double E,
                   const LaunchPoint& launch, const FlowOptions& opts);

/// Mirrors a half path ending on x1 = 0 into the full symmetric path.
GeodesicPath mirror_extend(const GeodesicPath& half);

struct MinimalGeodesicOptions {
  int scan = 64;
  double arc = 1.4;  // launch angles within +-arc of the direction towards the axis
  FlowOptions flow{.t_max = 12.0, .step = 1e-3, .tol_shell = 1e-6, .stop_at_axis = true};
};

struct GeodesicCandidate {
  double theta = 0.0;
  double action = 0.0;  // full action, twice the half action
  Vec2 crossing = Vec2::Zero();
};

struct MinimalGeodesic {
  GeodesicPath half;  // from the left boundary to the axis
  GeodesicPath full;  // mirrored through the axis
  double action = 0.0;
  double theta = 0.0;
  std::vector<GeodesicCandidate> candidates;  // every root of xi2 at the axis
  bool multiple_minima = false;
  int minimizing_intervals = 0;  // candidates within tol_action of the minimum
};

/// Upsilon_E: shoots from the left well's boundary (or unstable manifold at
/// E = 0), finds launch angles whose shot meets the axis with xi2 = 0, and
/// keeps the least action (ties: smallest |x2| at the axis). Shots are cut at
/// radius 4 |center| unless opts.flow.max_radius is finite.
/// Throws NoCrossing if no shot reaches the axis.
MinimalGeodesic minimal_geodesic(const PotentialModel& model, const WellData& left, double E,
                                 double tol_action_rel = 1e-3,
                                 const MinimalGeodesicOptions& opts = {});

}  // namespace tunnelkit
