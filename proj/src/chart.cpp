#include "tunnelkit/chart.hpp"

#include "tunnelkit/error.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace tunnelkit {

namespace {

// Newton iteration for a point x(p, t) = target of a two-parameter ray family.
// `eval(p, t)` returns the ray sample at time t; its dx field is dx/dp.
template <class Eval>
bool newton_hit(const Eval& eval, const Vec2& target, double& p, double& t, double p_min,
                PathSample& out) {
  for (int it = 0; it < 40; ++it) {
    out = eval(p, t);
    const Vec2 r = out.x - target;
    if (r.norm() < 1e-12) return true;
    Mat2 A;
    A.col(0) = out.dx;
    A.col(1) = 2.0 * out.xi;
    const double det = A.determinant();
    if (std::abs(det) < 1e-300) return false;
    Vec2 step = A.fullPivLu().solve(-r);
    // Damp large steps; the family is only mildly nonlinear near the tube.
    double damp = 1.0;
    while (damp > 1e-3 && (p + damp * step(0) < p_min || t + damp * step(1) < 0.0)) damp *= 0.5;
    p += damp * step(0);
    t += damp * step(1);
  }
  out = eval(p, t);
  return (out.x - target).norm() < 1e-10;
}

}  // namespace

ActionChart::ActionChart(const PotentialModel& model, const WellData& well, double E,
                         double theta_c, const ChartOptions& opts)
    : model_(&model), well_(well), E_(E), theta_c_(theta_c), opts_(opts) {
  const int n = std::max(3, opts.fan_size | 1);
  for (int k = 0; k < n; ++k) {
    const double th = theta_c + opts.fan_halfwidth * (2.0 * k / (n - 1) - 1.0);
    thetas_.push_back(th);
    fan_.push_back(shoot(model, well, E, launch_point(model, well, E, th), opts.flow));
  }
  for (const auto& path : fan_) {
    double jmax = 0.0;
    std::size_t len = path.samples.size();
    for (std::size_t k = 1; k < path.samples.size(); ++k) {
      const double J = path.samples[k].J;
      const double ja = std::abs(J);
      if (k > 1 && (J > 0) != (path.samples[k - 1].J > 0) && path.samples[k - 1].J != 0.0) {
        caustic_ = true;
        len = k;
        break;
      }
      jmax = std::max(jmax, ja);
      if (ja < opts.caustic_fraction * jmax) {
        len = k;
        break;
      }
    }
    valid_.push_back(len);
  }
}

PathSample ActionChart::ray(double theta, double t) const {
  FlowOptions o = opts_.flow;
  o.t_max = t;
  o.stop_at_axis = false;
  o.stop_on_reentry = false;
  o.stop_at_caustic = false;
  if (t <= 0.0) {
    const LaunchPoint lp = launch_point(*model_, well_, E_, theta);
    PathSample s;
    s.x = lp.x;
    s.xi = lp.xi;
    s.dx = lp.dx;
    s.dxi = lp.dxi;
    s.action = lp.action;
    return s;
  }
  return shoot(*model_, well_, E_, launch_point(*model_, well_, E_, theta), o).back();
}

FootPoint ActionChart::foot_point(const Vec2& x) const {
  // Initial guess: nearest stored sample of the fan.
  double best = std::numeric_limits<double>::infinity();
  double th = theta_c_, t = 0.0;
  for (std::size_t k = 0; k < fan_.size(); ++k)
    for (const auto& s : fan_[k].samples) {
      const double d = (s.x - x).squaredNorm();
      if (d < best) {
        best = d;
        th = thetas_[k];
        t = s.t;
      }
    }
  PathSample out;
  FootPoint fp;
  fp.converged = newton_hit([&](double p, double tt) { return ray(p, tt); }, x, th, t,
                            -std::numeric_limits<double>::infinity(), out);
  fp.theta = th;
  fp.t = t;
  fp.y = launch_point(*model_, well_, E_, th).x;
  fp.x = out.x;
  fp.xi = out.xi;
  fp.action = out.action;
  fp.J = out.J;
  return fp;
}

Vec2 ActionChart::project_central(const Vec2& x) const {
  const auto& s = central().samples;
  Vec2 best = s.front().x;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const Vec2 a = s[k].x, b = s[k + 1].x;
    const Vec2 ab = b - a;
    const double L2 = ab.squaredNorm();
    const double u = L2 > 0 ? std::clamp((x - a).dot(ab) / L2, 0.0, 1.0) : 0.0;
    const Vec2 p = a + u * ab;
    const double d = (p - x).squaredNorm();
    if (d < bd) {
      bd = d;
      best = p;
    }
  }
  return best;
}

SheetChart::SheetChart(const PotentialModel& model, const WellData& well, const Vec2& y, double E,
                       const FlowOptions& flow)
    : model_(&model), well_(well), y_(y), E_(E), flow_(flow) {
  flow_.stop_at_axis = false;
  flow_.stop_on_reentry = false;
  flow_.stop_at_caustic = false;
  const Vec2 u = well.to_principal(y);
  for (int j = 0; j < 2; ++j) {
    const double sg = u(j) >= 0 ? 1.0 : -1.0;
    dir_[j] = sg * well.axes.col(j);
  }
  // Coarse table of rays for Newton starting values.
  for (int j = 0; j < 2; ++j) {
    FlowOptions o = flow_;
    o.t_max = std::min(flow_.t_max, 3.0);
    for (double s = 1e-3; s < 2.0; s *= 1.25) {
      const Vec2 x0 = y_ + s * dir_[j];
      if (model.value(x0) <= E_) continue;
      if (x0.x() * well.center.x() <= 0.0) break;  // the line left the half plane
      const auto p = instanton_flow(model, x0, std::sqrt(model.value(x0) - E_) * dir_[j], E_, o);
      std::vector<PathSample> dec;
      for (std::size_t k = 0; k < p.samples.size(); k += 20) dec.push_back(p.samples[k]);
      table_[j].push_back(std::move(dec));
      table_s_[j].push_back(s);
    }
  }
}

double SheetChart::line_action(int j, double s) const {
  if (s <= 0.0) return 0.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(
      [&](double sig) { return std::sqrt(std::max(model_->value(y_ + sig * dir_[j]) - E_, 0.0)); },
      0.0, s);
}

PathSample SheetChart::ray(int j, double s, double t) const {
  const Vec2 d = dir_[j];
  const Vec2 x0 = y_ + s * d;
  const double v = std::max(model_->value(x0) - E_, 1e-300);
  const Vec2 xi0 = std::sqrt(v) * d;
  const Vec2 dxi0 = model_->gradient(x0).dot(d) / (2.0 * std::sqrt(v)) * d;
  FlowOptions o = flow_;
  o.initial_action = line_action(j, s);
  if (t <= 0.0) {
    PathSample p;
    p.x = x0;
    p.xi = xi0;
    p.dx = d;
    p.dxi = dxi0;
    p.action = o.initial_action;
    return p;
  }
  o.t_max = t;
  return instanton_flow(*model_, x0, xi0, E_, o, d, dxi0).back();
}

SheetChart::Value SheetChart::evaluate(const Vec2& x) const {
  Value best;
  for (int j = 0; j < 2; ++j) {
    double bd = std::numeric_limits<double>::infinity();
    double s = 0.0, t = 0.0;
    for (std::size_t k = 0; k < table_[j].size(); ++k)
      for (const auto& smp : table_[j][k]) {
        const double d = (smp.x - x).squaredNorm();
        if (d < bd) {
          bd = d;
          s = table_s_[j][k];
          t = smp.t;
        }
      }
    if (!std::isfinite(bd)) continue;
    PathSample out;
    const bool ok = newton_hit([&](double p, double tt) { return ray(j, p, tt); }, x, s, t, 0.0, out);
    if (!ok || s < 0.0 || t < 0.0) continue;
    if (!best.converged || out.action < best.F) {
      best = {out.action, out.xi, j, s, t, true};
    }
  }
  return best;
}

std::optional<double> SheetChart::axis_parameter(int j) const {
  const double dx1 = dir_[j].x();
  if (std::abs(dx1) < 1e-14) return std::nullopt;
  const double s = -y_.x() / dx1;
  if (s <= 0.0) return std::nullopt;
  return s;
}

}  // namespace tunnelkit
