#include "tunnelkit/flow.hpp"

#include "tunnelkit/agmon.hpp"
#include "tunnelkit/boundary.hpp"
#include "tunnelkit/error.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace tunnelkit {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

struct State {
  Vec2 x, xi;
  double action;
  Vec2 dx, dxi;
};

// One fourth-order Yoshida step built from three velocity-Verlet substeps.
State yoshida_step(const PotentialModel& model, const State& s0, double dt) {
  static const double cbrt2 = std::cbrt(2.0);
  static const double w1 = 1.0 / (2.0 - cbrt2);
  static const double w0 = -cbrt2 / (2.0 - cbrt2);
  State s = s0;
  for (double w : {w1, w0, w1}) {
    const double h = w * dt;
    s.xi += 0.5 * h * model.gradient(s.x);
    s.dxi += 0.5 * h * (model.hessian(s.x) * s.dx);
    s.action += 2.0 * s.xi.squaredNorm() * h;  // xi is constant across the drift
    s.x += 2.0 * h * s.xi;
    s.dx += 2.0 * h * s.dxi;
    s.xi += 0.5 * h * model.gradient(s.x);
    s.dxi += 0.5 * h * (model.hessian(s.x) * s.dx);
  }
  return s;
}

PathSample sample(const PotentialModel& model, const State& s, double t) {
  PathSample p;
  p.t = t;
  p.x = s.x;
  p.xi = s.xi;
  p.action = s.action;
  p.dx = s.dx;
  p.dxi = s.dxi;
  p.J = cross(2.0 * s.xi, s.dx);
  p.Jdot = cross(2.0 * model.gradient(s.x), s.dx) + cross(2.0 * s.xi, 2.0 * s.dxi);
  return p;
}

}  // namespace

GeodesicPath instanton_flow(const PotentialModel& model, const Vec2& x0, const Vec2& xi0, double E,
                            const FlowOptions& opts, const Vec2& dx0, const Vec2& dxi0) {
  GeodesicPath path;
  path.energy = E;
  path.source = x0;
  State s{x0, xi0, opts.initial_action, dx0, dxi0};
  double t = 0.0;
  path.samples.push_back(sample(model, s, t));
  const double side = x0.x();
  int J_sign = 0;

  while (t < opts.t_max * (1 - 1e-15)) {
    const double dt = std::min(opts.step, opts.t_max - t);
    State next = yoshida_step(model, s, dt);
    double t_next = t + dt;

    if (next.x.norm() > opts.max_radius) {
      path.samples.push_back(sample(model, next, t_next));
      path.stop = StopReason::Escape;
      return path;
    }

    const double drift = std::abs(next.xi.squaredNorm() - (model.value(next.x) - E));
    if (drift > opts.tol_shell * (1.0 + t_next))
      throw Error(ErrorKind::ShellDrift, "on-shell defect " + std::to_string(drift) + " at t = " +
                                             std::to_string(t_next));

    if (opts.stop_at_axis && side != 0.0 && next.x.x() * side <= 0.0) {
      // Land on x1 = 0 by re-stepping from s with a Newton-corrected step.
      double tau = dt * s.x.x() / (s.x.x() - next.x.x());
      State land = yoshida_step(model, s, tau);
      for (int it = 0; it < 8; ++it) {
        const double vel = 2.0 * land.xi.x();
        if (vel == 0.0) break;
        const double corr = land.x.x() / vel;
        tau -= corr;
        land = yoshida_step(model, s, tau);
        if (std::abs(corr) < 1e-16) break;
      }
      path.samples.push_back(sample(model, land, t + tau));
      path.stop = StopReason::Axis;
      return path;
    }

    if (opts.stop_on_reentry && next.xi.dot(s.xi) < 0.0) {
      path.samples.push_back(sample(model, next, t_next));
      path.stop = StopReason::Reentry;
      return path;
    }

    const PathSample p = sample(model, next, t_next);
    path.samples.push_back(p);
    if (opts.stop_at_caustic) {
      const int sg = p.J > 0 ? 1 : (p.J < 0 ? -1 : 0);
      if (J_sign == 0) J_sign = sg;
      else if (sg != 0 && sg != J_sign) {
        path.stop = StopReason::Caustic;
        return path;
      }
    }
    s = next;
    t = t_next;
  }
  path.stop = StopReason::TimeLimit;
  return path;
}

LaunchPoint launch_point(const PotentialModel& model, const WellData& well, double E, double theta,
                         double eps) {
  LaunchPoint lp;
  lp.theta = theta;
  const Vec2 e(std::cos(theta), std::sin(theta));
  const Vec2 eperp(-std::sin(theta), std::cos(theta));
  if (E > 1e-14) {
    const double r = boundary_radius(model, well.center, e, E);
    lp.x = well.center + r * e;
    const Vec2 g = model.gradient(lp.x);
    const double dr = -r * g.dot(eperp) / g.dot(e);
    lp.dx = dr * e + r * eperp;
    return lp;
  }
  lp.x = well.center + eps * e;
  lp.xi = local_agmon_zero_gradient(model, well, lp.x);
  lp.action = local_agmon_zero(model, well, lp.x);
  lp.dx = eps * eperp;
  const double d = 1e-6 * eps;
  lp.dxi = (local_agmon_zero_gradient(model, well, lp.x + d * lp.dx) -
            local_agmon_zero_gradient(model, well, lp.x - d * lp.dx)) /
           (2.0 * d);
  return lp;
}

GeodesicPath shoot(const PotentialModel& model, const WellData& well, double E,
                   const LaunchPoint& launch, const FlowOptions& opts) {
  (void)well;
  FlowOptions o = opts;
  o.initial_action = launch.action;
  return instanton_flow(model, launch.x, launch.xi, E, o, launch.dx, launch.dxi);
}

GeodesicPath mirror_extend(const GeodesicPath& half) {
  GeodesicPath full = half;
  const PathSample end = half.back();
  for (auto it = half.samples.rbegin() + 1; it != half.samples.rend(); ++it) {
    PathSample p = *it;
    p.t = 2.0 * end.t - it->t;
    p.x = mirror(it->x);
    p.xi = Vec2(it->xi.x(), -it->xi.y());
    p.action = 2.0 * end.action - it->action;
    p.dx = Vec2(-it->dx.x(), it->dx.y());
    p.dxi = Vec2(it->dxi.x(), -it->dxi.y());
    p.Jdot = -it->Jdot;
    full.samples.push_back(p);
  }
  return full;
}

MinimalGeodesic minimal_geodesic(const PotentialModel& model, const WellData& left, double E,
                                 double tol_action_rel, const MinimalGeodesicOptions& opts) {
  const double theta0 = left.center.x() < 0 ? 0.0 : M_PI;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  FlowOptions flow = opts.flow;
  if (!std::isfinite(flow.max_radius)) flow.max_radius = 4.0 * left.center.norm();
  auto miss = [&](double theta, GeodesicPath* out = nullptr) {
    GeodesicPath p = shoot(model, left, E, launch_point(model, left, E, theta), flow);
    if (p.stop != StopReason::Axis) return nan;
    const double xi2 = p.back().xi.y();
    if (out) *out = std::move(p);
    return xi2;
  };

  std::vector<double> thetas, g;
  for (int k = 0; k <= opts.scan; ++k) {
    thetas.push_back(theta0 - opts.arc + 2.0 * opts.arc * k / opts.scan);
    g.push_back(miss(thetas.back()));
  }
  std::vector<double> roots;
  for (int k = 0; k <= opts.scan; ++k) {
    if (g[k] == 0.0) roots.push_back(thetas[k]);
    if (k == opts.scan || std::isnan(g[k]) || std::isnan(g[k + 1])) continue;
    if (g[k] == 0.0 || g[k + 1] == 0.0 || (g[k] > 0) == (g[k + 1] > 0)) continue;
    boost::uintmax_t iters = 100;
    auto [lo, hi] = boost::math::tools::toms748_solve(
        [&](double th) { return miss(th); }, thetas[k], thetas[k + 1], g[k], g[k + 1],
        boost::math::tools::eps_tolerance<double>(50), iters);
    roots.push_back(0.5 * (lo + hi));
  }
  bool any_crossing = std::any_of(g.begin(), g.end(), [](double v) { return !std::isnan(v); });
  if (!any_crossing || roots.empty())
    throw Error(ErrorKind::NoCrossing, "no shot from the left well meets the axis with xi2 = 0");

  MinimalGeodesic result;
  std::vector<GeodesicPath> paths;
  for (double th : roots) {
    GeodesicPath p;
    miss(th, &p);
    result.candidates.push_back({th, 2.0 * p.back().action, p.back().x});
    paths.push_back(std::move(p));
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : result.candidates) best = std::min(best, c.action);
  const double tol = tol_action_rel * best;
  std::size_t pick = 0;
  bool have = false;
  for (std::size_t k = 0; k < result.candidates.size(); ++k) {
    const auto& c = result.candidates[k];
    if (c.action > best + tol) continue;
    ++result.minimizing_intervals;
    if (!have || std::abs(c.crossing.y()) < std::abs(result.candidates[pick].crossing.y())) {
      pick = k;
      have = true;
    }
  }
  result.multiple_minima = result.minimizing_intervals > 1;
  result.half = paths[pick];
  result.full = mirror_extend(result.half);
  result.action = result.candidates[pick].action;
  result.theta = result.candidates[pick].theta;
  return result;
}

}  // namespace tunnelkit
