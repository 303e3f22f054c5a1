#include "tunnelkit/quasimode.hpp"

#include "tunnelkit/error.hpp"

#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/special_functions/hermite.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>

namespace tunnelkit {

double log_hermite_function(const WellData& well, const Index2& alpha, double h, const Vec2& x,
                            int* sign) {
  const Vec2 u = well.to_principal(x);
  const double lam[2] = {well.lambda1, well.lambda2};
  double s = 0.0;
  int sg = 1;
  for (int j = 0; j < 2; ++j) {
    const int n = alpha[j];
    const double q = std::sqrt(lam[j] / h) * u(j);
    const double H = boost::math::hermite(n, q);
    if (H < 0) sg = -sg;
    s += 0.25 * std::log(lam[j] / (M_PI * h)) -
         0.5 * (n * std::log(2.0) + std::log(boost::math::factorial<double>(n))) +
         std::log(std::abs(H)) - 0.5 * q * q;
  }
  if (sign) *sign = sg;
  return s;
}

double harmonic_match(const WellData& well, const Index2& alpha, double h, double theta,
                      double radius) {
  const PotentialModel harm = harmonic_model(well);
  const WellData wh = analyze_well(harm, well.center, well.side);
  const double lam[2] = {wh.lambda1, wh.lambda2};
  const double E = h * (lam[0] * (2 * alpha[0] + 1) + lam[1] * (2 * alpha[1] + 1));
  const LaunchPoint lp = launch_point(harm, wh, E, theta);
  const Vec2 u0 = wh.to_principal(lp.x);
  // The harmonic flow from rest is u_j(t) = u_j(0) cosh(2 lambda_j t).
  auto rho = [&](double t) {
    double s = 0.0;
    for (int j = 0; j < 2; ++j) {
      const double c = std::cosh(2 * lam[j] * t);
      s += lam[j] * u0(j) * u0(j) * c * c;
    }
    return s / h - radius;
  };
  double hi = 0.5;
  while (rho(hi) < 0) hi *= 2;
  boost::uintmax_t it = 100;
  auto [a, b] = boost::math::tools::toms748_solve(rho, 0.0, hi, boost::math::tools::eps_tolerance<double>(50), it);
  FlowOptions o;
  o.t_max = 0.5 * (a + b);
  o.stop_on_reentry = false;
  o.tol_shell = 1e-6 * (1.0 + radius * h);
  const PathSample s = shoot(harm, wh, E, lp, o).back();
  return log_hermite_function(wh, alpha, h, s.x) + s.action / h + 0.5 * std::log(std::abs(s.J));
}

QuasiModeWKB::QuasiModeWKB(const ActionChart& chart, const Index2& alpha, double h,
                           const QuasiModeOptions& opts)
    : chart_(chart), alpha_(alpha), h_(h) {
  if (chart.caustic_inside())
    throw Error(ErrorKind::CausticReached, "the chart meets a caustic inside the tube");
  for (double th : chart.thetas()) {
    const double l1 = harmonic_match(chart.well(), alpha, h, th, opts.match_radius);
    if (!opts.richardson) {
      log_c_.push_back(l1);
      continue;
    }
    const double l2 = harmonic_match(chart.well(), alpha, h, th, 4.0 * opts.match_radius);
    log_c_.push_back((4.0 * l2 - l1) / 3.0);
  }
}

double QuasiModeWKB::log_amplitude(std::size_t k, std::size_t i) const {
  return log_c_[k] - 0.5 * std::log(std::abs(chart_.fan()[k].samples[i].J));
}

double QuasiModeWKB::log_value(std::size_t k, std::size_t i) const {
  return log_amplitude(k, i) - chart_.fan()[k].samples[i].action / h_;
}

std::vector<AxisSample> QuasiModeWKB::axis_trace() const {
  std::vector<AxisSample> out;
  const auto& fan = chart_.fan();
  for (std::size_t k = 0; k < fan.size(); ++k) {
    if (fan[k].stop != StopReason::Axis) continue;
    const PathSample& s = fan[k].back();
    const Vec2 xdot = 2.0 * s.xi;
    const Vec2 xidot = chart_.model().gradient(s.x);
    AxisSample a;
    a.theta = chart_.thetas()[k];
    a.x2 = s.x.y();
    a.F = s.action;
    a.xi = s.xi;
    a.dx2_dtheta = s.dx.y() - xdot.y() / xdot.x() * s.dx.x();
    a.dxi2_dtheta = s.dxi.y() - xidot.y() / xdot.x() * s.dx.x();
    a.log_a = log_c_[k] - 0.5 * std::log(std::abs(s.J));
    a.dlog_a_dt = -0.5 * s.Jdot / s.J;
    out.push_back(a);
  }
  std::sort(out.begin(), out.end(), [](const AxisSample& p, const AxisSample& q) { return p.x2 < q.x2; });
  return out;
}

double QuasiModeWKB::transport_residual() const {
  const auto& fan = chart_.fan();
  double worst = 0.0, amax = 0.0;
  std::vector<std::pair<double, double>> rows;  // (residual, a)
  for (std::size_t k = 0; k < fan.size(); ++k) {
    const auto& s = fan[k].samples;
    const std::size_t n = chart_.valid_length()[k];
    for (std::size_t i = std::max<std::size_t>(2, n / 10); i + 2 < n; i += 5) {
      const double a = std::exp(log_amplitude(k, i));
      const double ap = std::exp(log_amplitude(k, i + 1)), am = std::exp(log_amplitude(k, i - 1));
      const double dadt = (ap - am) / (s[i + 1].t - s[i - 1].t);
      Mat2 X, P;
      X.col(0) = s[i].dx;
      X.col(1) = 2.0 * s[i].xi;
      P.col(0) = s[i].dxi;
      P.col(1) = chart_.model().gradient(s[i].x);
      const double lapF = (P * X.inverse()).trace();
      rows.emplace_back(std::abs(dadt + a * lapF), a);
      amax = std::max(amax, a);
    }
  }
  for (const auto& [r, a] : rows) worst = std::max(worst, r);
  return amax > 0 ? worst / amax : 0.0;
}

}  // namespace tunnelkit
