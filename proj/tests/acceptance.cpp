// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "tunnelkit/agmon.hpp"
#include "tunnelkit/eikonal.hpp"
#include "tunnelkit/error.hpp"
#include "tunnelkit/flow.hpp"
#include "tunnelkit/propositions.hpp"
#include "tunnelkit/reference.hpp"
#include "tunnelkit/tunneling.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace tunnelkit;

namespace {

PotentialModel quartic() {
  return PotentialModel({{0.25, 4, 0}, {-0.5, 2, 0}, {0.25, 0, 0}, {1.0, 0, 2}});
}

double v1(double x) { return 0.25 * (x * x - 1) * (x * x - 1); }

// Zero-energy Agmon distance between the wells along the axis.
double s0_oracle() {
  boost::math::quadrature::tanh_sinh<double> ts;
  return 2.0 * ts.integrate([](double x) { return std::sqrt(v1(x)); }, 0.0, 1.0);
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Residuals of every reference eigenpair computed along the way.
std::vector<double> g_residuals;

Outcome ebk_harmonic() {
  PotentialModel v({{1.0, 2, 0}, {2.0, 0, 2}});
  const double h = 0.05;
  const WellData w = analyze_well(v, {0.0, 0.0}, Side::Left);
  auto states = spectral_series(w, h, 0.6);
  std::vector<double> ebk;
  for (const auto& s : states) ebk.push_back(s.energy);
  std::sort(ebk.begin(), ebk.end());
  if (ebk.size() < 9) return {false, "fewer than 9 EBK levels below 0.6"};
  ReferenceOptions o;
  o.E_max = 0.6;
  const auto op = assemble(v, cell_grid({-1.5, -1.5}, {1.5, 1.5}, 256, 256), h, AxisCondition::Full, o);
  const auto ev = lowest_eigenpairs(op, 9, o);
  double worst = 0.0;
  for (int i = 0; i < 9; ++i) {
    worst = std::max(worst, std::abs(ebk[i] / ev[i].value - 1.0));
    g_residuals.push_back(ev[i].residual);
  }
  std::ostringstream s;
  s << "max relative |E_ebk - E_ref| over 9 levels = " << worst << " (bound 1e-3)";
  return {worst <= 1e-3, s.str()};
}

Outcome agmon_exponent() {
  const auto v = quartic();
  const std::vector<double> hs = {0.1, 0.08, 0.06, 0.05, 0.04};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double h : hs) {
    const auto d = doublet_splitting(v, {-2.2, -1.6}, {2.2, 1.6}, 64, 48, h);
    g_residuals.push_back(d.residual_sym);
    g_residuals.push_back(d.residual_anti);
    const double x = 1.0 / h, y = -std::log(d.delta);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(hs.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double S0 = s0_oracle();
  const double rel = std::abs(slope / S0 - 1.0);
  std::ostringstream s;
  s << "slope of -log delta vs 1/h = " << slope << ", S0 = " << S0 << ", rel. error " << rel
    << " (bound 0.10)";
  return {rel <= 0.10, s.str()};
}

Outcome herring_consistency() {
  const auto v = quartic();
  const auto [l, r] = find_wells(v, {0.8, 0.1});
  const double h = 0.05;
  SeriesOptions o;
  o.with_reference = true;
  const auto e = splitting_estimate(v, l, r, {0, 0}, h, o);
  if (!e.ok()) return {false, "estimate failed: " + e.error};
  if (!e.delta_reference) return {false, "no reference splitting"};
  const double lh = -h * std::log(std::abs(e.delta_herring));
  const double lr = -h * std::log(std::abs(*e.delta_reference));
  const double rel = std::abs(lh / lr - 1.0);
  const double ratio = e.delta_stationary / e.delta_herring;
  std::ostringstream s;
  s << "-h log: Herring " << lh << ", reference " << lr << ", rel. " << rel
    << " (bound 0.05); stationary/Herring = " << ratio << " (range [0.8, 1.25])";
  return {rel <= 0.05 && ratio >= 0.8 && ratio <= 1.25, s.str()};
}

Outcome prop1() {
  const auto v = quartic();
  const auto [l, r] = find_wells(v, {0.8, 0.1});
  const double E1 = 0.025, E2 = 0.025, E = E1 + E2;  // near-square torus
  const Vec2 y(-std::sqrt(1 - 2 * std::sqrt(E1)), std::sqrt(E2));
  ChartOptions co;
  co.fan_halfwidth = 0.1;
  co.fan_size = 21;
  const ActionChart chart(v, l, E, std::atan2(y.y(), y.x() - l.center.x()), co);
  const SheetChart sheet(v, l, y, E);
  const GridSpec g = GridSpec::covering({-2.0, -1.5}, {2.0, 1.5}, 257, 193);
  const auto field = agmon_distance(v, E, l, g);
  const auto rep = prop1_defect_fit(chart, sheet, &field);
  std::ostringstream s;
  s << "R2 = " << rep.r2 << " (bound 0.99), min K = " << rep.K_min << " over "
    << rep.samples.size() << " samples";
  return {rep.r2 >= 0.99 && rep.K_min > 0.0, s.str()};
}

Outcome prop2() {
  const auto v = quartic();
  const auto [l, r] = find_wells(v, {0.8, 0.1});
  const auto fit = prop2_exponent_fit(v, l, {0.01, 0.02, 0.04}, {-0.7, 0.3});
  std::ostringstream s;
  s << "residual exponent = " << fit.exponent << " (bound 1.7)";
  return {fit.exponent >= 1.7, s.str()};
}

Outcome prop3() {
  const auto v = quartic();
  const auto [l, r] = find_wells(v, {0.8, 0.1});
  const auto rep = prop3_smoothness_check(v, l, 0.05, Prop3Options{});
  double worst = 0.0;
  for (const auto& p : rep.points) worst = std::max(worst, std::abs(p.ratio - 4.0));
  std::ostringstream s;
  s << "max |ratio - 4| = " << worst << " over " << rep.points.size()
    << " points (bound 1), minimizing intervals = " << rep.minimizing_intervals;
  return {!rep.points.empty() && worst <= 1.0 && rep.minimizing_intervals == 1, s.str()};
}

Outcome tunnel_cycles() {
  const auto v = quartic();
  const auto [l, r] = find_wells(v, {0.8, 0.1});
  const double tol_fit = 1e-6;
  bool pass = true;
  std::ostringstream s;
  // Axis shot of the ground state.
  {
    const double h = 0.02;
    const auto st = make_state(l, {0, 0}, h);
    const auto cyc = find_tunnel_cycles(v, l, st, st.energy);
    // Axis action between the inner turning points, where V1 = E.
    const double a = std::sqrt(1.0 - 2.0 * std::sqrt(st.energy));
    boost::math::quadrature::tanh_sinh<double> ts;
    const double S0 =
        2.0 * ts.integrate([&](double x) { return std::sqrt(std::max(v1(x) - st.energy, 0.0)); }, 0.0, a);
    const auto& ax = cyc.back();
    const auto d = correspondence_defect(v, l, ax.y_L, st.energy, st.energy);
    const bool ok = ax.source == "axis" && ax.is_cycle && ax.minimal && ax.mismatch <= 1e-6 &&
                    std::abs(ax.action - S0) <= 1e-3 * S0 && std::abs(d.total) <= tol_fit;
    pass = pass && ok;
    s << "axis: mismatch " << ax.mismatch << ", |S - S0|/S0 " << std::abs(ax.action - S0) / S0
      << ", defect " << d.total << (ax.minimal ? ", minimal" : ", not minimal");
  }
  // Off-axis umbilic of alpha = (1, 0) along the h-ladder.
  double prev = std::numeric_limits<double>::infinity();
  s << "; off-axis defects";
  for (double h : {0.04, 0.02, 0.01}) {
    const auto st = make_state(l, {1, 0}, h);
    const auto cyc = find_tunnel_cycles(v, l, st, st.energy);
    Vec2 y = cyc.front().y_L;
    for (const auto& c : cyc)
      if (c.source == "umbilic" && c.y_L.y() > 0) y = c.y_L;
    const double total = std::abs(correspondence_defect(v, l, y, st.energy, st.energy).total);
    pass = pass && total < prev;
    prev = total;
    s << " " << total;
  }
  return {pass, s.str()};
}

double flat_disk_error(int n) {
  const double r = 0.5;
  const GridSpec g = GridSpec::covering({-2, -2}, {2, 2}, n, n);
  std::vector<double> f(g.size(), 1.0), init(g.size(), std::numeric_limits<double>::quiet_NaN());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (g.node(i, j).norm() <= r + g.spacing.x())
        init[g.index(i, j)] = std::max(g.node(i, j).norm() - r, 0.0);
  const auto d = solve_eikonal(g, f, init);
  double err = 0.0, scale = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double exact = std::max(g.node(i, j).norm() - r, 0.0);
      err = std::max(err, std::abs(d[g.index(i, j)] - exact));
      scale = std::max(scale, exact);
    }
  return err / scale;
}

Outcome hygiene() {
  const auto v = quartic();
  const auto [l, r] = find_wells(v, {0.8, 0.1});
  std::ostringstream s;
  bool pass = true;

  const double e256 = flat_disk_error(256), e512 = flat_disk_error(512);
  pass = pass && e256 <= 0.02 && e256 / e512 >= 1.8;
  s << "flat-metric error " << e256 << ", refinement gain " << e256 / e512;

  FlowOptions fo;
  fo.t_max = 5.0;
  fo.step = 1e-3;
  fo.stop_on_reentry = false;
  const double E = 0.05;
  const auto p = shoot(v, r, E, launch_point(v, r, E, M_PI), fo);
  double drift = 0.0;
  for (const auto& q : p.samples) drift = std::max(drift, std::abs(q.xi.squaredNorm() - v.value(q.x) + E));
  pass = pass && drift <= 1e-8 && std::abs(p.back().t - 5.0) <= 1e-9;
  s << "; q drift " << drift;

  const double tol_eig = ReferenceOptions{}.tol_eig;
  double res = 0.0;
  for (double x : g_residuals) res = std::max(res, x);
  pass = pass && !g_residuals.empty() && res <= tol_eig;
  s << "; max eigen-residual " << res << " of " << g_residuals.size();

  const GridSpec g = GridSpec::covering({-2.0, -1.5}, {2.0, 1.5}, 257, 193);
  const auto f1 = agmon_distance(v, E, l, r, g);
  const auto f2 = agmon_distance(v, E, l, r, g);
  const auto d1 = doublet_splitting(v, {-2.2, -1.6}, {2.2, 1.6}, 64, 48, 0.1);
  const auto d2 = doublet_splitting(v, {-2.2, -1.6}, {2.2, 1.6}, 64, 48, 0.1);
  const auto s1 = splitting_estimate(v, l, r, {0, 0}, 0.05);
  const auto s2 = splitting_estimate(v, l, r, {0, 0}, 0.05);
  const bool same = f1.values == f2.values && d1.E_sym == d2.E_sym && d1.E_anti == d2.E_anti &&
                    s1.delta_herring == s2.delta_herring &&
                    s1.delta_stationary == s2.delta_stationary && s1.S0 == s2.S0;
  pass = pass && same;
  s << "; repeated runs " << (same ? "identical" : "differ");
  return {pass, s.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"EBK energies of the harmonic well", ebk_harmonic},
      {"Agmon exponent of the doublet splitting", agmon_exponent},
      {"Herring splitting against the reference", herring_consistency},
      {"quadratic defect law of the torus sheet", prop1},
      {"separable singular part of d_E", prop2},
      {"smoothness of d_E'(x, N) in E'", prop3},
      {"tunnel cycles and correspondence defect", tunnel_cycles},
      {"numerical hygiene", hygiene}};
  int failed = 0, k = 0;
  for (const auto& [name, check] : criteria) {
    ++k;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", k, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", k - failed, k);
  return failed ? 1 : 0;
}
