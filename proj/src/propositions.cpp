#include "tunnelkit/propositions.hpp"

#include "tunnelkit/boundary.hpp"
#include "tunnelkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

namespace tunnelkit {

Prop1Report prop1_defect_fit(const ActionChart& chart, const SheetChart& sheet,
                             const ScalarField2D* field, const Prop1Options& opts) {
  if (chart.caustic_inside())
    throw Error(ErrorKind::CausticReached, "the boundary fan meets a caustic inside the tube");
  const WellData& well = chart.well();
  const double mu = std::sqrt(chart.energy());
  const double lo = opts.s1 * mu;
  const double hi = std::min(opts.s2 * mu, opts.band_c * std::sqrt(mu));
  const WellBoundary boundary = well_boundary(chart.model(), well, chart.energy());
  const double y1 = well.to_principal(sheet.umbilic()).x();

  Prop1Report rep;
  rep.max_defect = -std::numeric_limits<double>::infinity();
  const auto& fan = chart.fan();
  for (std::size_t k = 0; k < fan.size(); ++k) {
    const auto& s = fan[k].samples;
    const double y1x = well.to_principal(s.front().x).x();
    const std::size_t n = chart.valid_length()[k];
    // Index range of the ray inside the distance band.
    std::size_t a = n, b = n;
    for (std::size_t i = 0; i < n; ++i) {
      const double dist = boundary.distance_to(s[i].x);
      if (a == n && dist >= lo) a = i;
      if (dist > hi) {
        b = i;
        break;
      }
    }
    if (a >= b) continue;
    const std::size_t stride = std::max<std::size_t>(1, (b - a) / opts.per_ray);
    for (std::size_t i = a; i < b; i += stride) {
      const auto v = sheet.evaluate(s[i].x);
      if (!v.converged) continue;
      Prop1Sample p;
      p.x = s[i].x;
      p.level = boundary.distance_to(s[i].x);
      p.d = s[i].action;
      p.z = (y1 - y1x) * (y1 - y1x);
      p.defect = s[i].action - v.F;
      p.K_hat = p.z > 1e-14 ? -p.defect / p.z : 0.0;
      rep.samples.push_back(p);
      rep.max_defect = std::max(rep.max_defect, p.defect);
    }
  }
  if (rep.samples.empty()) throw Error(ErrorKind::PoorFit, "no tube samples inside the band");

  // One K per action level, least squares through the origin; R^2 pooled.
  const int L = std::max(1, opts.levels);
  std::vector<double> szz(L, 0.0), szd(L, 0.0);
  auto bin = [&](double level) {
    return std::clamp(static_cast<int>((level - lo) / (hi - lo) * L), 0, L - 1);
  };
  for (const auto& p : rep.samples) {
    szz[bin(p.level)] += p.z * p.z;
    szd[bin(p.level)] += -p.defect * p.z;
  }
  rep.level_K.resize(L);
  for (int b = 0; b < L; ++b) rep.level_K[b] = szz[b] > 0 ? szd[b] / szz[b] : 0.0;
  double mean = 0.0;
  for (const auto& p : rep.samples) mean += p.defect;
  mean /= rep.samples.size();
  double ss_res = 0.0, ss_tot = 0.0;
  rep.K_min = std::numeric_limits<double>::infinity();
  for (const auto& p : rep.samples) {
    const double r = p.defect + rep.level_K[bin(p.level)] * p.z;
    ss_res += r * r;
    ss_tot += (p.defect - mean) * (p.defect - mean);
    if (p.z > 1e-14) rep.K_min = std::min(rep.K_min, p.K_hat);
  }
  rep.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;

  if (field) {
    for (const auto& s : chart.central().samples) {
      if (boundary.distance_to(s.x) > hi) break;
      rep.central_error = std::max(rep.central_error, std::abs(s.action - field->interpolate(s.x)));
      rep.field_tolerance = std::max(rep.field_tolerance, 2.0 * field->interpolation_error(s.x));
    }
  }
  if (rep.r2 < opts.min_r2)
    throw Error(ErrorKind::PoorFit, "quadratic defect law fits with R^2 = " + std::to_string(rep.r2));
  return rep;
}

namespace {

// One factor V_j of a separable potential, measured from the well.
struct Factor {
  const PotentialModel* model;
  Vec2 center;
  int j;
  double v0;
  double operator()(double s) const {
    Vec2 x = center;
    x(j) = s;
    return model->value(x) - v0;
  }
};

// Integral of sqrt(f - e) from the turning point between the well and x to x.
double factor_action(const Factor& f, double x, double e) {
  const double c = f.center(f.j);
  if (std::abs(x - c) < 1e-15) return 0.0;
  double a = c;
  if (e > 0.0) {
    if (f(x) <= e) return 0.0;
    boost::uintmax_t it = 100;
    auto [l, r] = boost::math::tools::toms748_solve([&](double s) { return f(s) - e; }, c, x,
                                                    -e, f(x) - e,
                                                    boost::math::tools::eps_tolerance<double>(52), it);
    a = 0.5 * (l + r);
  }
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([&](double s) { return std::sqrt(std::max(f(s) - e, 0.0)); },
                      std::min(a, x), std::max(a, x));
}

}  // namespace

Prop2Result prop2_separable_check(const PotentialModel& model, const WellData& well, double E,
                                  const Vec2& x) {
  if (!model.is_separable())
    throw Error(ErrorKind::NotSeparable, "the potential has cross terms");
  const double v0 = model.value(well.center);
  const Factor f[2] = {{&model, well.center, 0, v0}, {&model, well.center, 1, v0}};
  const double lam[2] = {std::sqrt(0.5 * well.hessian(0, 0)), std::sqrt(0.5 * well.hessian(1, 1))};
  auto total = [&](double E1, bool with_zero) {
    const double e[2] = {E1, E - E1};
    double s = 0.0;
    for (int j = 0; j < 2; ++j)
      s += factor_action(f[j], x(j), e[j]) - (with_zero ? factor_action(f[j], x(j), 0.0) : 0.0);
    return s;
  };
  Prop2Result r;
  if (E <= 0.0) return r;
  const double lo = std::max(0.0, E - f[1](x(1))), hi = std::min(E, f[0](x(0)));
  if (lo > hi) throw Error(ErrorKind::ValidationError, "x lies inside U_E");
  boost::uintmax_t it = 200;
  const auto best = boost::math::tools::brent_find_minima([&](double E1) { return total(E1, false); },
                                                           lo, hi, 40, it);
  const double e[2] = {best.first, E - best.first};
  r.partial = Vec2(e[0], e[1]);
  r.lhs = total(best.first, true);
  for (int j = 0; j < 2; ++j) {
    if (e[j] <= 0.0) continue;
    const double u = std::abs(x(j) - well.center(j));
    const double iota = e[j] / (2.0 * lam[j]);
    const double z = (lam[j] * u - std::sqrt(std::max(lam[j] * lam[j] * u * u - e[j], 0.0))) /
                     std::sqrt(2.0 * lam[j]);
    r.rhs += iota * std::log(z / std::sqrt(iota));
  }
  r.residual = r.lhs - r.rhs;
  return r;
}

Prop2Fit prop2_exponent_fit(const PotentialModel& model, const WellData& well,
                            const std::vector<double>& energies, const Vec2& x) {
  Prop2Fit fit;
  fit.energies = energies;
  fit.rhs_scale_min = std::numeric_limits<double>::infinity();
  fit.rhs_scale_max = -fit.rhs_scale_min;
  std::vector<double> lx, ly;
  for (double E : energies) {
    const Prop2Result r = prop2_separable_check(model, well, E, x);
    fit.results.push_back(r);
    const double mu = std::sqrt(E);
    lx.push_back(std::log(mu));
    ly.push_back(std::log(std::abs(r.residual)));
    const double scale = r.rhs / (mu * mu * std::log(1.0 / mu));
    fit.rhs_scale_min = std::min(fit.rhs_scale_min, scale);
    fit.rhs_scale_max = std::max(fit.rhs_scale_max, scale);
  }
  const double n = lx.size();
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  fit.exponent = sxx > 0 ? sxy / sxx : 0.0;
  return fit;
}

namespace {

// Advances from a sample until the action equals `level` exactly (Newton on the
// last partial step; dA/dt = 2 |xi|^2).
PathSample at_action(const PotentialModel& model, const GeodesicPath& path, double level) {
  const auto& s = path.samples;
  std::size_t k = 0;
  while (k + 1 < s.size() && s[k + 1].action < level) ++k;
  if (k + 1 >= s.size()) throw Error(ErrorKind::ValidationError, "path ends below the action level");
  FlowOptions o;
  o.stop_on_reentry = false;
  o.initial_action = s[k].action;
  double tau = (level - s[k].action) / (2.0 * s[k].xi.squaredNorm());
  PathSample p = s[k];
  for (int it = 0; it < 20 && tau > 0.0; ++it) {
    o.t_max = tau;
    o.step = tau;
    p = instanton_flow(model, s[k].x, s[k].xi, path.energy, o, s[k].dx, s[k].dxi).back();
    const double corr = (p.action - level) / (2.0 * p.xi.squaredNorm());
    tau -= corr;
    if (std::abs(corr) < 1e-17) break;
  }
  p.t = s[k].t + tau;
  return p;
}

struct LevelCurve {
  const PotentialModel* model;
  const WellData* well;
  double E, level;
  FlowOptions flow;
  // Point of N on the boundary ray theta and the unit normal there.
  std::pair<Vec2, Vec2> operator()(double theta) const {
    const GeodesicPath p = shoot(*model, *well, E, launch_point(*model, *well, E, theta), flow);
    const PathSample q = at_action(*model, p, level);
    return {q.x, q.xi.normalized()};
  }
};

// d_{E'}(x, N): the ray leaving N along its normal that passes through x, by
// Newton on (theta, t). Returns the action and the time of flight.
std::pair<double, double> distance_to_level(const LevelCurve& N, double Ep, const Vec2& x,
                                            double& theta, double t_guess) {
  const PotentialModel& model = *N.model;
  FlowOptions o;
  o.stop_on_reentry = false;
  o.tol_shell = 1e-6;
  auto ray = [&](double th, double t) {
    const double eps = 1e-6;
    auto [n0, nu0] = N(th);
    auto [np, nup] = N(th + eps);
    auto [nm, num] = N(th - eps);
    auto xi_of = [&](const Vec2& n, const Vec2& nu) { return std::sqrt(model.value(n) - Ep) * nu; };
    const Vec2 dx0 = (np - nm) / (2 * eps);
    const Vec2 dxi0 = (xi_of(np, nup) - xi_of(nm, num)) / (2 * eps);
    o.t_max = t;
    return instanton_flow(model, n0, xi_of(n0, nu0), Ep, o, dx0, dxi0).back();
  };
  double t = t_guess;
  PathSample p;
  for (int it = 0; it < 30; ++it) {
    p = ray(theta, t);
    const Vec2 r = p.x - x;
    if (r.norm() < 1e-13) break;
    Mat2 A;
    A.col(0) = p.dx;
    A.col(1) = 2.0 * p.xi;
    const Vec2 step = A.fullPivLu().solve(-r);
    theta += step(0);
    t += step(1);
  }
  return {p.action, p.t};
}

}  // namespace

Prop3Report prop3_smoothness_check(const PotentialModel& model, const WellData& left, double E,
                                   const Prop3Options& opts) {
  const MinimalGeodesic mg = minimal_geodesic(model, left, E);
  Prop3Report rep;
  rep.minimizing_intervals = mg.minimizing_intervals;
  const double dx0 = mg.half.back().action;
  rep.level = 0.5 * dx0;
  FlowOptions flow;
  flow.t_max = mg.half.back().t;
  flow.stop_on_reentry = false;
  const LevelCurve N{&model, &left, E, rep.level, flow};
  const double t_level = at_action(model, mg.half, rep.level).t;

  rep.smooth = true;
  for (double f : opts.fractions) {
    if (f > 1.0 - opts.epsilon || f * dx0 <= rep.level) continue;
    Prop3Point pt;
    pt.fraction = f;
    const PathSample target = at_action(model, mg.half, f * dx0);
    pt.x = target.x;
    const double t_guess = target.t - t_level;
    auto d_at = [&](double Ep) {
      double th = mg.theta;
      return distance_to_level(N, Ep, pt.x, th, t_guess);
    };
    const auto [d0, transit] = d_at(E);
    pt.d = d0;
    pt.transit = transit;
    for (double delta : opts.deltas) {
      const double dp = d_at(E + delta).first, dm = d_at(E - delta).first;
      pt.second.push_back((dp - 2.0 * d0 + dm) / (delta * delta));
      if (delta == opts.deltas.back()) pt.dd_dE = (dp - dm) / (2.0 * delta);
    }
    if (pt.second.size() >= 3) {
      const std::size_t m = pt.second.size();
      pt.ratio = (pt.second[m - 3] - pt.second[m - 2]) / (pt.second[m - 2] - pt.second[m - 1]);
      if (std::abs(pt.ratio - 4.0) > opts.ratio_tolerance * 4.0) rep.smooth = false;
    }
    rep.points.push_back(std::move(pt));
  }
  if (!rep.smooth) {
    std::string msg = "second-difference ratios:";
    for (const auto& p : rep.points) msg += " " + std::to_string(p.ratio);
    throw Error(ErrorKind::NonSmooth, msg);
  }
  return rep;
}

}  // namespace tunnelkit
