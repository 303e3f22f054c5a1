#pragma once

#include "tunnelkit/flow.hpp"
#include "tunnelkit/potential.hpp"

#include <optional>
#include <vector>

namespace tunnelkit {

struct ChartOptions {
  int fan_size = 41;             // rays in the fan (odd: the middle one is central)
  double fan_halfwidth = 0.3;    // launch-angle half width of the fan
  double caustic_fraction = 0.1; // J below this fraction of its running max ends validity
  FlowOptions flow{.t_max = 4.0, .step = 1e-3, .tol_shell = 1e-6, .stop_at_axis = true};
};

/// Characteristic coordinates (theta, t) of a point reached by the boundary
/// family, with the action there.
struct FootPoint {
  double theta = 0.0;
  double t = 0.0;
  Vec2 y = Vec2::Zero();  // launch point on {V = E}
  Vec2 x = Vec2::Zero();  // reached point
  Vec2 xi = Vec2::Zero();
  double action = 0.0;
  double J = 0.0;
  bool converged = false;
};

/// Fan of bicharacteristics launched from {V = E} around the boundary point
/// y = launch_point(theta_c). F_y^E on the tube is the action along the rays,
/// J the transversal Jacobian from the variational equations.
class ActionChart {
 public:
  ActionChart(const PotentialModel& model, const WellData& well, double E, double theta_c,
              const ChartOptions& opts = {});

  double energy() const { return E_; }
  double theta_center() const { return theta_c_; }
  Vec2 source() const { return central().samples.front().x; }
  const GeodesicPath& central() const { return fan_[fan_.size() / 2]; }
  const std::vector<GeodesicPath>& fan() const { return fan_; }
  const std::vector<double>& thetas() const { return thetas_; }
  /// Sample count along each ray before J falls below caustic_fraction of its max
  /// (or changes sign).
  const std::vector<std::size_t>& valid_length() const { return valid_; }
  bool caustic_inside() const { return caustic_; }

  /// Solves x(theta, t) = x by Newton iteration on the launch angle and time.
  FootPoint foot_point(const Vec2& x) const;
  /// Ray through theta integrated to time t.
  PathSample ray(double theta, double t) const;
  /// Orthogonal projection of x onto the central path.
  Vec2 project_central(const Vec2& x) const;

  const PotentialModel& model() const { return *model_; }
  const WellData& well() const { return well_; }

 private:
  const PotentialModel* model_;
  WellData well_;
  double E_;
  double theta_c_;
  ChartOptions opts_;
  std::vector<double> thetas_;
  std::vector<GeodesicPath> fan_;
  std::vector<std::size_t> valid_;
  bool caustic_ = false;
};

/// The decaying sheet of the torus whose umbilic is y: the flow-out of the two
/// caustic lines y + s e_j (principal directions pointing away from the well)
/// with xi = sqrt(V - E) e_j and F the line integral of sqrt(V - E). For a
/// separable potential these lines are the true caustics and F is exact.
class SheetChart {
 public:
  SheetChart(const PotentialModel& model, const WellData& well, const Vec2& y, double E,
             const FlowOptions& flow = {.t_max = 6.0, .step = 1e-3, .tol_shell = 1e-6});

  /// Direction of caustic line j (0: along e1, 1: along e2), pointing outward.
  Vec2 line_direction(int j) const { return dir_[j]; }
  /// Action from y along caustic line j to parameter s.
  double line_action(int j, double s) const;
  /// Ray leaving line j at parameter s, integrated to time t.
  PathSample ray(int j, double s, double t) const;

  struct Value {
    double F = 0.0;
    Vec2 xi = Vec2::Zero();
    int line = -1;
    double s = 0.0;
    double t = 0.0;
    bool converged = false;
  };
  /// F_y^E(x) by Newton iteration on (s, t) in whichever family reaches x.
  Value evaluate(const Vec2& x) const;

  /// Where caustic line j meets x1 = 0, if it does.
  std::optional<double> axis_parameter(int j) const;

  const Vec2& umbilic() const { return y_; }

 private:
  const PotentialModel* model_;
  WellData well_;
  Vec2 y_;
  double E_;
  FlowOptions flow_;
  Vec2 dir_[2];
  std::vector<std::vector<PathSample>> table_[2];  // coarse rays for initial guesses
  std::vector<double> table_s_[2];
};

}  // namespace tunnelkit
