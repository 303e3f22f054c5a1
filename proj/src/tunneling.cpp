#include "tunnelkit/tunneling.hpp"

#include "tunnelkit/boundary.hpp"
#include "tunnelkit/error.hpp"
#include "tunnelkit/reference.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>

namespace tunnelkit {

AxisTrace::AxisTrace(const QuasiModeWKB& q)
    : model_(&q.chart().model()), E_(q.chart().energy()), h_(q.h()),
      center_x1_(q.chart().well().center.x()) {
  const auto trace = q.axis_trace();
  if (trace.size() < 4)
    throw Error(ErrorKind::CoverageGap, "fewer than four rays of the fan reach the axis");
  std::vector<double> x2, F, xi2, dxi2, log_a, dlog;
  for (const auto& s : trace) {
    if (!x2.empty() && s.x2 <= x2.back())
      throw Error(ErrorKind::CausticReached, "fan rays cross before the axis");
    x2.push_back(s.x2);
    F.push_back(s.F);
    xi2.push_back(s.xi.y());
    dxi2.push_back(s.dxi2_dtheta / s.dx2_dtheta);
    log_a.push_back(s.log_a);
    dlog.push_back(s.dlog_a_dt);
  }
  lo_ = x2.front();
  hi_ = x2.back();
  sign1_ = trace.front().xi.x() >= 0 ? 1.0 : -1.0;
  std::vector<double> x2b = x2, x2c = x2, x2d = x2, xi2b = xi2;
  F_.emplace(std::move(x2), std::move(F), std::move(xi2));
  xi2_.emplace(std::move(x2b), std::move(xi2b), std::move(dxi2));
  log_a_.emplace(std::move(x2c), std::move(log_a));
  dlog_a_dt_.emplace(std::move(x2d), std::move(dlog));
}

double AxisTrace::xi1(double x2) const {
  const double q = xi2(x2);
  return sign1_ * std::sqrt(std::max(model_->value({0.0, x2}) - E_ - q * q, 0.0));
}

double AxisTrace::dlog_a_dx1(double x2) const {
  // Along the ray: d log a / dt = 2 xi . grad log a.
  const double x1dot = 2.0 * xi1(x2);
  return ((*dlog_a_dt_)(x2) - 2.0 * xi2(x2) * log_a_->prime(x2)) / x1dot;
}

namespace {

double normal_sign(const AxisTrace& first, const AxisTrace& second) {
  return second.center_x1() > first.center_x1() ? 1.0 : -1.0;
}

}  // namespace

HerringResult herring_splitting(const AxisTrace& first, const AxisTrace& second, double h,
                                const HerringOptions& opts) {
  const double lo = std::max(first.lo(), second.lo()), hi = std::min(first.hi(), second.hi());
  if (!(lo < hi)) throw Error(ErrorKind::CoverageGap, "the two traces do not overlap on the axis");
  const double n1 = normal_sign(first, second);
  // Work with the exponent relative to the peak to keep the scan in range.
  auto log_mag = [&](double x2) { return first.log_u(x2) + second.log_u(x2); };
  auto integrand = [&](double x2, double shift) {
    return 4.0 * h * h * std::exp(log_mag(x2) - shift) * n1 * second.dlog_u_dx1(x2);
  };
  HerringResult r;
  std::vector<double> xs(opts.scan + 1), ls(opts.scan + 1);
  std::size_t peak = 0;
  for (int k = 0; k <= opts.scan; ++k) {
    xs[k] = k == opts.scan ? hi : lo + (hi - lo) * k / opts.scan;
    ls[k] = log_mag(xs[k]) + std::log(std::abs(second.dlog_u_dx1(xs[k])));
    if (ls[k] > ls[peak]) peak = k;
  }
  r.peak_x2 = xs[peak];
  if (opts.sigma) {
    r.sigma_lo = std::max(lo, opts.sigma->first);
    r.sigma_hi = std::min(hi, opts.sigma->second);
  } else {
    const double cut = ls[peak] + std::log(opts.threshold);
    std::size_t a = peak, b = peak;
    while (a > 0 && ls[a - 1] >= cut) --a;
    while (b < xs.size() - 1 && ls[b + 1] >= cut) ++b;
    if (a == 0 || b == xs.size() - 1)
      throw Error(ErrorKind::CoverageGap, "the integrand is still above threshold at the end of the fan");
    r.sigma_lo = xs[a - 1];
    r.sigma_hi = xs[b + 1];
  }
  const double shift = log_mag(r.peak_x2);
  const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double x2) { return integrand(x2, shift); }, r.sigma_lo, r.sigma_hi, 15, 1e-12);
  r.delta = I * std::exp(shift);
  return r;
}

StationaryPhaseResult stationary_phase_splitting(const AxisTrace& first, const AxisTrace& second,
                                                 double h, double sigma_lo, double sigma_hi,
                                                 double tol_hess) {
  auto g = [&](double x2) { return first.xi2(x2) + second.xi2(x2); };
  const double ga = g(sigma_lo), gb = g(sigma_hi);
  if (ga == 0.0 || gb == 0.0 || (ga > 0) == (gb > 0))
    throw Error(ErrorKind::NoCriticalPoint, "F_1 + F_2 has no stationary point in sigma");
  boost::uintmax_t it = 100;
  auto [a, b] = boost::math::tools::toms748_solve(g, sigma_lo, sigma_hi, ga, gb,
                                                  boost::math::tools::eps_tolerance<double>(52), it);
  StationaryPhaseResult r;
  r.x2 = 0.5 * (a + b);
  r.F1 = first.F(r.x2);
  r.F2 = second.F(r.x2);
  r.phase = r.F1 + r.F2;
  r.hessian = first.dxi2(r.x2) + second.dxi2(r.x2);
  if (std::abs(r.hessian) < tol_hess)
    throw Error(ErrorKind::DegenerateCriticalPoint, "second derivative of the phase vanishes");
  const double amp = std::exp(first.log_a(r.x2) + second.log_a(r.x2));
  r.delta = 4.0 * h * h * amp * normal_sign(first, second) * second.dlog_u_dx1(r.x2) *
            std::sqrt(2.0 * M_PI * h / r.hessian) * std::exp(-r.phase / h);
  return r;
}

TunnelCycle tunnel_shot(const PotentialModel& model, const Vec2& y, double E, double S0,
                        const CycleOptions& opts) {
  TunnelCycle c;
  c.y_L = y;
  c.path = instanton_flow(model, y, Vec2::Zero(), E, opts.flow);
  if (c.path.stop != StopReason::Axis)
    throw Error(ErrorKind::NoCrossing, "the shot from the umbilic does not reach the axis");
  const PathSample& end = c.path.back();
  c.mismatch = 2.0 * std::abs(end.xi.y()) / end.xi.norm();
  c.action = 2.0 * end.action;
  c.y_R = mirror(y);
  c.is_cycle = c.mismatch <= opts.tol_cycle;
  c.minimal = c.is_cycle && std::abs(c.action - S0) <= opts.tol_action_rel * S0;
  return c;
}

std::vector<TunnelCycle> find_tunnel_cycles(const PotentialModel& model, const WellData& left,
                                            const TorusState& state, double E,
                                            const CycleOptions& opts) {
  const MinimalGeodesic mg = minimal_geodesic(model, left, E, opts.tol_action_rel);
  CycleOptions o = opts;
  if (!std::isfinite(o.flow.max_radius)) o.flow.max_radius = 4.0 * left.center.norm();
  std::vector<TunnelCycle> out;
  for (const Vec2& u : state.umbilics) {
    const Vec2 world = left.from_principal(u);
    // Inner umbilics face the axis.
    if (std::abs(world.x()) >= std::abs(left.center.x())) continue;
    const Vec2 dir = (world - left.center).normalized();
    const Vec2 y = left.center + boundary_radius(model, left.center, dir, E) * dir;
    try {
      TunnelCycle c = tunnel_shot(model, y, E, mg.action, o);
      c.source = "umbilic";
      out.push_back(std::move(c));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoCrossing) throw;
    }
  }
  TunnelCycle axis = tunnel_shot(model, mg.half.samples.front().x, E, mg.action, o);
  axis.source = "axis";
  out.push_back(std::move(axis));
  return out;
}

namespace {

struct RayDistance {
  double d = 0.0;
  double t = 0.0;
};

// d_E(x) from the boundary family around the minimal geodesic.
RayDistance ray_distance(const PotentialModel& model, const WellData& left, double E,
                         const Vec2& x) {
  const MinimalGeodesic mg = minimal_geodesic(model, left, E);
  ChartOptions co;
  co.fan_size = 11;
  const ActionChart chart(model, left, E, mg.theta, co);
  const FootPoint fp = chart.foot_point(x);
  if (!fp.converged) throw Error(ErrorKind::NoConvergence, "foot point of x_bar did not converge");
  return {fp.action, fp.t};
}

}  // namespace

CorrespondenceDefect correspondence_defect(const PotentialModel& model, const WellData& left,
                                           const Vec2& umbilic, double E, double E_prime) {
  const SheetChart sheet(model, left, umbilic, E);
  int line = -1;
  double s = 0.0;
  for (int j = 0; j < 2; ++j) {
    const auto p = sheet.axis_parameter(j);
    if (p && (line < 0 || std::abs(sheet.line_direction(j).x()) >
                              std::abs(sheet.line_direction(line).x()))) {
      line = j;
      s = *p;
    }
  }
  if (line < 0) throw Error(ErrorKind::NoCriticalPoint, "no caustic line of the umbilic meets the axis");
  CorrespondenceDefect c;
  c.x_bar = umbilic + s * sheet.line_direction(line);
  c.x_bar.x() = 0.0;
  c.F = sheet.line_action(line, s);
  const RayDistance dE = ray_distance(model, left, E, c.x_bar);
  c.d_E = dE.d;
  c.transit = dE.t;
  c.d_Ep = E_prime == E ? dE.d : ray_distance(model, left, E_prime, c.x_bar).d;
  c.S0_Ep = minimal_geodesic(model, left, E_prime).action;
  c.terms[0] = 2.0 * (c.F - c.d_E);
  c.terms[1] = 2.0 * (c.d_E - c.d_Ep);
  c.terms[2] = 2.0 * c.d_Ep - c.S0_Ep;
  c.total = c.terms[0] + c.terms[1] + c.terms[2];
  return c;
}

namespace {

double state_energy(const NormalForm* nf, const WellData& well, const Index2& alpha, double h) {
  const TorusState st = make_state(well, alpha, h);
  return nf ? nf->energy(st.iota, h) : st.energy;
}

}  // namespace

SplittingEstimate splitting_estimate(const PotentialModel& model, const WellData& left,
                                     const WellData& right, const Index2& alpha, double h,
                                     const SeriesOptions& opts) {
  SplittingEstimate est;
  est.alpha = alpha;
  est.h = h;
  std::optional<NormalForm> nf;
  try {
    nf = birkhoff_quartic(model, left, opts.birkhoff);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ResonanceError) throw;
    est.flags.push_back("linear-energy");
  }
  const NormalForm* pnf = nf ? &*nf : nullptr;
  est.E_center = state_energy(pnf, left, alpha, h);
  Index2 match = alpha;
  est.E_chart = est.E_center;
  if (alpha[1] > 0) {
    est.E_chart = est.E_center - 2.0 * h * left.lambda2 * alpha[1];
    match = {alpha[0], 0};
    est.flags.push_back("transverse-adiabatic");
  }
  try {
    if (est.E_chart >= barrier_height(model, right))
      throw Error(ErrorKind::EnergyAboveBarrier, "state energy above the barrier");
    const MinimalGeodesic mg = minimal_geodesic(model, left, est.E_chart);
    if (mg.multiple_minima) est.flags.push_back("multiple-minima");
    est.S0 = mg.action;
    est.x_E = mg.half.back().x;
    ChartOptions co = opts.chart;
    for (int attempt = 0;; ++attempt) {
      try {
        const ActionChart cl(model, left, est.E_chart, mg.theta, co);
        const ActionChart cr(model, right, est.E_chart, M_PI - mg.theta, co);
        const QuasiModeWKB ql(cl, match, h, opts.quasimode), qr(cr, match, h, opts.quasimode);
        const AxisTrace tl(ql), tr(qr);
        const HerringResult hr = herring_splitting(tl, tr, h, opts.herring);
        const StationaryPhaseResult sp =
            stationary_phase_splitting(tl, tr, h, hr.sigma_lo, hr.sigma_hi);
        est.delta_herring = hr.delta;
        est.delta_stationary = sp.delta;
        est.S_L = sp.F1;
        est.S_R = sp.F2;
        est.transport_residual = std::max(ql.transport_residual(), qr.transport_residual());
        if (est.transport_residual > opts.tol_transport) est.flags.push_back("transport");
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::CoverageGap || attempt >= 3) throw;
        co.fan_halfwidth *= 1.5;
        est.flags.push_back("fan-widened");
      }
    }
  } catch (const Error& e) {
    est.error = to_string(e.kind());
    if (e.kind() == ErrorKind::CausticReached) est.flags.push_back("caustic");
    return est;
  }
  if (opts.with_reference) {
    // Doublet index: rank of the state among the well's levels.
    int rank = 0;
    const int top = alpha[0] + alpha[1] + 2;
    for (int a = 0; a <= top; ++a)
      for (int b = 0; a + b <= top; ++b)
        if (Index2{a, b} != alpha && state_energy(pnf, left, {a, b}, h) < est.E_center) ++rank;
    try {
      ReferenceOptions ro = opts.reference;
      ro.E_max = est.E_center;
      est.delta_reference = doublet_splitting(model, opts.box_lo, opts.box_hi, opts.ref_n1,
                                              opts.ref_n2, h, rank, ro)
                                .delta;
    } catch (const Error& e) {
      est.flags.push_back("reference-" + std::string(to_string(e.kind())));
    }
  }
  return est;
}

std::vector<SplittingEstimate> spectral_tunnel_series(const PotentialModel& model, double h,
                                                      double E0, const Vec2& well_seed,
                                                      const SeriesOptions& opts) {
  const auto [left, right] = find_wells(model, well_seed);
  std::vector<SplittingEstimate> rows;
  for (const TorusState& st : spectral_series(left, h, E0))
    rows.push_back(splitting_estimate(model, left, right, st.alpha, h, opts));
  return rows;
}

}  // namespace tunnelkit
