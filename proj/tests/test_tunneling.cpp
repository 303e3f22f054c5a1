#include <doctest.h>

#include "tunnelkit/agmon.hpp"
#include "tunnelkit/error.hpp"
#include "tunnelkit/reference.hpp"
#include "tunnelkit/tunneling.hpp"

#include "oracles.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>

using namespace tunnelkit;

namespace {

PotentialModel quartic() {
  return PotentialModel({{0.25, 4, 0}, {-0.5, 2, 0}, {0.25, 0, 0}, {1.0, 0, 2}});
}

double v1(double x) { return 0.25 * (x * x - 1) * (x * x - 1); }

double state_energy(const PotentialModel& v, const WellData& w, const Index2& alpha, double h) {
  std::vector<TorusState> s{make_state(w, alpha, h)};
  apply_normal_form(birkhoff_quartic(v, w), s);
  return s[0].energy_quartic;
}

struct Pair {
  ActionChart left, right;
};

Pair charts(const PotentialModel& v, const WellData& l, const WellData& r, double E,
            double halfwidth = 0.3) {
  const auto mg = minimal_geodesic(v, l, E);
  ChartOptions co;
  co.fan_halfwidth = halfwidth;
  return {ActionChart(v, l, E, mg.theta, co), ActionChart(v, r, E, M_PI - mg.theta, co)};
}

}  // namespace

TEST_CASE("tunnel cycles of the separable double well") {
  auto v = quartic();
  auto [l, r] = find_wells(v, {0.8, 0.1});
  const double h = 0.02;
  const auto st = make_state(l, {1, 0}, h);
  const double E = st.energy;
  const auto cycles = find_tunnel_cycles(v, l, st, E);
  const double S0 = minimal_geodesic(v, l, E).action;

  SUBCASE("the axis shot is a minimal cycle") {
    const auto& ax = cycles.back();
    REQUIRE(ax.source == "axis");
    CHECK(ax.mismatch <= 1e-6);
    CHECK(ax.is_cycle);
    CHECK(ax.minimal);
    CHECK(std::abs(ax.action - S0) <= 1e-3 * S0);
    CHECK(std::abs(v.value(ax.y_L) - E) <= 1e-8);
  }

  SUBCASE("off-axis umbilic shots follow the factorized 1-D flows") {
    boost::math::quadrature::tanh_sinh<double> ts;
    int seen = 0;
    for (const auto& c : cycles) {
      if (c.source != "umbilic") continue;
      ++seen;
      const Vec2 y = c.y_L;
      const double E1 = v1(y.x());
      // Time of flight in x1 from the turning point to the axis, then the
      // harmonic x2 motion over that time.
      const double T = ts.integrate(
          [&](double x) { return 0.5 / std::sqrt(std::max(v1(x) - E1, 1e-300)); }, y.x(), 0.0);
      const double xi1 = std::sqrt(v1(0.0) - E1);
      const double xi2 = y.y() * std::sinh(2.0 * T);
      const double mismatch = 2.0 * std::abs(xi2) / std::hypot(xi1, xi2);
      CHECK(c.mismatch == doctest::Approx(mismatch).epsilon(1e-6));
      CHECK(c.path.back().t == doctest::Approx(T).epsilon(1e-6));
      CHECK_FALSE(c.is_cycle);
    }
    CHECK(seen == 2);
  }

  SUBCASE("shooting from the mirrored umbilic gives the same mismatch") {
    for (const auto& c : cycles) {
      const auto m = tunnel_shot(v, mirror(c.y_L), E, S0);
      CHECK(std::abs(m.mismatch - c.mismatch) <= 1e-10);
      CHECK(std::abs(m.action - c.action) <= 1e-10 * c.action);
    }
  }
}

TEST_CASE("correspondence defect") {
  auto v = quartic();
  auto [l, r] = find_wells(v, {0.8, 0.1});

  SUBCASE("collapses on the axis cycle") {
    for (double h : {0.04, 0.02, 0.01}) {
      const auto st = make_state(l, {1, 0}, h);
      const auto cyc = find_tunnel_cycles(v, l, st, st.energy);
      const auto d = correspondence_defect(v, l, cyc.back().y_L, st.energy, st.energy);
      for (double t : d.terms) CHECK(std::abs(t) <= 1e-8);
      CHECK(std::abs(d.total) <= 1e-8);
    }
  }

  SUBCASE("decreases along the h-ladder for alpha = (1, 0)") {
    double prev = std::numeric_limits<double>::infinity();
    for (double h : {0.04, 0.02, 0.01}) {
      const auto st = make_state(l, {1, 0}, h);
      const auto cyc = find_tunnel_cycles(v, l, st, st.energy);
      Vec2 y = cyc.front().y_L;
      for (const auto& c : cyc)
        if (c.source == "umbilic" && c.y_L.y() > 0) y = c.y_L;
      const auto d = correspondence_defect(v, l, y, st.energy, st.energy);
      MESSAGE("h " << h << ": total " << d.total);
      CHECK(std::abs(d.total - (d.terms[0] + d.terms[1] + d.terms[2])) <= 1e-12);
      CHECK(std::abs(d.total) < prev);
      prev = std::abs(d.total);
    }
  }

  SUBCASE("energy term matches the first-order Taylor estimate") {
    const double h = 0.02, dE = 0.002;
    const auto st = make_state(l, {1, 0}, h);
    const auto cyc = find_tunnel_cycles(v, l, st, st.energy);
    const auto d = correspondence_defect(v, l, cyc.front().y_L, st.energy, st.energy + dE);
    // d d_E / d E = -transit.
    CHECK(d.terms[1] == doctest::Approx(2.0 * dE * d.transit).epsilon(0.05));
  }
}

TEST_CASE("WKB quasimode") {
  auto v = quartic();
  auto [l, r] = find_wells(v, {0.8, 0.1});

  SUBCASE("harmonic well: equals the Hermite function away from the well") {
    // V = (x1 + 3)^2 + x2^2, a single harmonic well off the axis.
    PotentialModel hv({{1.0, 2, 0}, {6.0, 1, 0}, {9.0, 0, 0}, {1.0, 0, 2}});
    const auto w = analyze_well(hv, {-3.0, 0.0}, Side::Left);
    const double h = 0.05;
    ChartOptions co;
    co.fan_halfwidth = 0.1;
    co.fan_size = 11;
    co.flow.stop_at_axis = false;
    co.flow.t_max = 2.0;
    const ActionChart ch(hv, w, 2.0 * h, 0.0, co);
    const QuasiModeWKB q(ch, {0, 0}, h);
    const std::size_t kc = ch.fan().size() / 2;
    const auto& s = ch.central().samples;
    for (std::size_t i = 1; i < s.size(); i += 50) {
      const double rho = (s[i].x - w.center).squaredNorm() / h;
      if (rho < 25) continue;
      // The leading-order WKB error of a Gaussian is 1 / (4 rho).
      CHECK(std::abs(q.log_value(kc, i) - log_hermite_function(w, {0, 0}, h, s[i].x)) <=
            0.3 / rho);
    }
  }

  SUBCASE("separable reduction along the axis of the tube") {
    const double h = 0.05;
    const double E = state_energy(v, l, {0, 0}, h), E1 = E - h;
    const double xt = -std::sqrt(1 - 2 * std::sqrt(E1));
    const auto mg = minimal_geodesic(v, l, E);
    ChartOptions co;
    co.fan_halfwidth = 0.1;
    co.fan_size = 11;
    const ActionChart ch(v, l, E, mg.theta, co);
    const QuasiModeWKB q(ch, {0, 0}, h);
    // 1-D decaying WKB solution at E1 normalized against the harmonic ground
    // state, times the transverse Gaussian at x2 = 0.
    const double log_c = -0.25 * std::log(M_PI) - 0.5 * std::log(2.0) - 0.25;
    boost::math::quadrature::tanh_sinh<double> ts;
    const std::size_t kc = ch.fan().size() / 2;
    const auto& s = ch.central().samples;
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); i += 10) {
      const double x = s[i].x.x();
      if (x - xt < 2.0 * std::sqrt(h)) continue;
      const double I = ts.integrate([&](double z) { return std::sqrt(std::max(v1(z) - E1, 0.0)); }, xt, x);
      const double wkb = log_c - 0.25 * std::log(v1(x) - E1) - I / h - 0.25 * std::log(M_PI * h);
      worst = std::max(worst, std::abs(q.log_value(kc, i) - wkb));
    }
    MESSAGE("max |log u - log u_1D| = " << worst);
    CHECK(worst <= 0.05);
  }

  SUBCASE("phase and amplitude separate under h -> 2h") {
    const double h = 0.05;
    const double E = state_energy(v, l, {0, 0}, h);
    const auto mg = minimal_geodesic(v, l, E);
    const ActionChart ch(v, l, E, mg.theta);
    const QuasiModeWKB q1(ch, {0, 0}, h), q2(ch, {0, 0}, 2 * h);
    for (std::size_t k = 0; k < ch.fan().size(); k += 10) {
      const auto& s = ch.fan()[k].samples;
      const double ref = q1.log_value(k, 1) - q2.log_value(k, 1) + s[1].action / (2 * h);
      for (std::size_t i = 1; i < ch.valid_length()[k]; i += 97) {
        const double d = q1.log_value(k, i) - q2.log_value(k, i) + s[i].action / (2 * h);
        CHECK(std::abs(d - ref) <= 1e-9 * (1 + std::abs(ref)));
      }
    }
  }

  SUBCASE("transport equation and positivity") {
    for (double h : {0.08, 0.04, 0.02}) {
      const double E = state_energy(v, l, {0, 0}, h);
      const auto p = charts(v, l, r, E);
      const QuasiModeWKB q(p.left, {0, 0}, h);
      CHECK(q.transport_residual() <= 1e-3);
      for (std::size_t k = 0; k < p.left.fan().size(); ++k)
        for (std::size_t i = 1; i < p.left.valid_length()[k]; i += 50)
          CHECK(std::isfinite(q.log_amplitude(k, i)));
    }
  }
}

TEST_CASE("Herring splitting of the ground doublet") {
  auto v = quartic();
  auto [l, r] = find_wells(v, {0.8, 0.1});
  const double h = 0.05;
  const double E = state_energy(v, l, {0, 0}, h);
  const auto p = charts(v, l, r, E);
  const QuasiModeWKB ql(p.left, {0, 0}, h), qr(p.right, {0, 0}, h);
  const AxisTrace tl(ql), tr(qr);
  const auto hr = herring_splitting(tl, tr, h);

  SUBCASE("against the reference eigensolver") {
    const auto ref = doublet_splitting(v, {-2.2, -1.6}, {2.2, 1.6}, 64, 48, h);
    MESSAGE("Herring " << hr.delta << ", reference " << ref.delta);
    CHECK(hr.delta > 0.0);
    CHECK(hr.delta / ref.delta <= 2.0);
    CHECK(ref.delta / hr.delta <= 2.0);
    CHECK(std::abs(std::log(hr.delta) / std::log(ref.delta) - 1.0) <= 0.05);
  }

  SUBCASE("the integrand concentrates at the critical point") {
    HerringOptions o;
    o.sigma = std::make_pair(hr.peak_x2 + 0.5, hr.sigma_hi);
    const auto cut = herring_splitting(tl, tr, h, o);
    CHECK(std::abs(cut.delta) * 10.0 <= std::abs(hr.delta));
  }

  SUBCASE("swapping the wells changes nothing") {
    const auto sw = herring_splitting(tr, tl, h);
    CHECK(std::abs(sw.delta / hr.delta - 1.0) <= 1e-10);
  }

  SUBCASE("symmetric critical point") {
    const auto sp = stationary_phase_splitting(tl, tr, h, hr.sigma_lo, hr.sigma_hi);
    CHECK(std::abs(sp.x2) <= 1e-8);
    CHECK(std::abs(hr.peak_x2) <= 1e-2);
    CHECK((sp.delta > 0) == (hr.delta > 0));
    // Same point from the fast-marching S0 minimizer.
    const GridSpec g = GridSpec::covering({-2.0, -1.5}, {2.0, 1.5}, 257, 193);
    const auto s0 = s0_between_wells(v, E, l, g);
    CHECK(std::abs(s0.xE.y() - sp.x2) <= 2.0 * g.spacing.y());
  }
}

TEST_CASE("stationary phase agrees with Herring to O(h)") {
  auto v = quartic();
  auto [l, r] = find_wells(v, {0.8, 0.1});
  double C = 0.0;
  for (double h : {0.08, 0.04, 0.02}) {
    const double E = state_energy(v, l, {0, 0}, h);
    const auto p = charts(v, l, r, E);
    const QuasiModeWKB ql(p.left, {0, 0}, h), qr(p.right, {0, 0}, h);
    const AxisTrace tl(ql), tr(qr);
    const auto hr = herring_splitting(tl, tr, h);
    const auto sp = stationary_phase_splitting(tl, tr, h, hr.sigma_lo, hr.sigma_hi);
    C = std::max(C, std::abs(sp.delta / hr.delta - 1.0) / h);
  }
  MESSAGE("fitted C = " << C);
  CHECK(C <= 1.0);
}

TEST_CASE("spectral tunnel series") {
  auto v = quartic();
  auto [l, r] = find_wells(v, {0.8, 0.1});
  const double h = 0.05;
  const auto rows = spectral_tunnel_series(v, h, 0.3, {0.8, 0.1});
  int finite = 0;
  for (const auto& row : rows)
    if (row.ok() && std::isfinite(row.S0) && row.delta_herring > 0) ++finite;
  CHECK(finite >= 6);

  SUBCASE("S0 is nonincreasing along alpha-ladders") {
    for (const auto& a : rows)
      for (const auto& b : rows) {
        if (!a.ok() || !b.ok()) continue;
        const bool ladder1 = a.alpha[1] == b.alpha[1] && a.alpha[0] < b.alpha[0];
        const bool ladder2 = a.alpha[0] == b.alpha[0] && a.alpha[1] < b.alpha[1];
        if (ladder1 || ladder2) CHECK(b.S0 <= a.S0 + 1e-12);
      }
  }

  SUBCASE("ground row equals the standalone estimate") {
    const auto g = splitting_estimate(v, l, r, {0, 0}, h);
    REQUIRE(rows.front().alpha == Index2{0, 0});
    CHECK(rows.front().delta_herring == g.delta_herring);
    CHECK(rows.front().delta_stationary == g.delta_stationary);
    CHECK(rows.front().S0 == g.S0);
  }

  SUBCASE("states above the barrier are flagged, not thrown") {
    for (const auto& row : rows)
      if (row.E_chart >= 0.25) CHECK_FALSE(row.ok());
  }
}
