#include <doctest.h>

#include "tunnelkit/agmon.hpp"
#include "tunnelkit/eikonal.hpp"
#include "tunnelkit/error.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <random>

using namespace tunnelkit;

namespace {

PotentialModel quartic() {
  return PotentialModel({{0.25, 4, 0}, {-0.5, 2, 0}, {0.25, 0, 0}, {1.0, 0, 2}});
}

GridSpec quartic_grid(int cells) {
  return GridSpec::covering({-2.0, -1.5}, {2.0, 1.5}, cells + 1, cells * 3 / 4 + 1);
}

// Flat metric outside a disk of radius r: exact distance |x| - r.
double flat_disk_error(int n) {
  const double r = 0.5;
  const GridSpec g = GridSpec::covering({-2, -2}, {2, 2}, n, n);
  std::vector<double> f(g.size(), 1.0), init(g.size(), std::numeric_limits<double>::quiet_NaN());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (g.node(i, j).norm() <= r + g.spacing.x()) init[g.index(i, j)] = std::max(g.node(i, j).norm() - r, 0.0);
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

}  // namespace

TEST_CASE("flat metric fast marching error and refinement") {
  const double e256 = flat_disk_error(256);
  const double e512 = flat_disk_error(512);
  MESSAGE("flat-metric error 256: " << e256 << ", 512: " << e512);
  CHECK(e256 <= 0.02);
  CHECK(e256 / e512 >= 1.8);
}

TEST_CASE("descent action matches the 1-D integral on the axis") {
  auto v = quartic();
  const double E = 0.05;
  const double xt = std::sqrt(1 + 2 * std::sqrt(E));  // outer turning point
  boost::math::quadrature::tanh_sinh<double> ts;
  const double x = xt + 0.05;
  const double exact = ts.integrate([&](double s) { return std::sqrt(std::max(v.value({s, 0}) - E, 0.0)); }, xt, x);
  CHECK(descent_action(v, {x, 0.0}, E) == doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("local zero-energy Agmon distance solves the eikonal equation") {
  auto v = quartic();
  auto [l, r] = find_wells(v, {0.8, 0.1});
  const Vec2 x = r.center + Vec2(0.03, -0.02);
  const double e = 1e-6;
  const Vec2 g((local_agmon_zero(v, r, x + Vec2(e, 0)) - local_agmon_zero(v, r, x - Vec2(e, 0))) / (2 * e),
               (local_agmon_zero(v, r, x + Vec2(0, e)) - local_agmon_zero(v, r, x - Vec2(0, e))) / (2 * e));
  CHECK(std::abs(g.squaredNorm() - v.value(x)) <= 1e-7);
}

TEST_CASE("Agmon distance on the axis matches 1-D quadrature") {
  auto v = quartic();
  auto [l, r] = find_wells(v, {0.8, 0.1});
  const double E = 0.05;
  const GridSpec g = quartic_grid(512);
  auto field = agmon_distance(v, E, l, g);
  const double xt = -std::sqrt(1 - 2 * std::sqrt(E));  // inner turning point of the left well
  boost::math::quadrature::tanh_sinh<double> ts;
  const int j0 = (g.n2 - 1) / 2;
  for (int i = 0; i < g.n1; i += 16) {
    const double x1 = g.node(i, j0).x();
    if (x1 <= xt + 0.1 || x1 > 0.8) continue;
    const double exact = ts.integrate([&](double s) { return std::sqrt(std::max(v.value({s, 0}) - E, 0.0)); }, xt, x1);
    CHECK(field.at(i, j0) == doctest::Approx(exact).epsilon(0.01));
  }
  MESSAGE("eikonal residual constant: " << eikonal_residual_constant(field, v, E));
}

TEST_CASE("S0 at zero energy and monotonicity in E") {
  auto v = quartic();
  auto [l, r] = find_wells(v, {0.8, 0.1});
  const GridSpec g = quartic_grid(512);
  auto s0 = s0_between_wells(v, 0.0, l, g);
  CHECK(s0.S0 == doctest::Approx(2.0 / 3.0).epsilon(0.01));
  CHECK(std::abs(s0.xE.x()) == 0.0);
  CHECK(std::abs(s0.xE.y()) < g.spacing.y());
  double prev = s0.S0;
  ScalarField2D prev_field = s0.left_field;
  for (double E : {0.02, 0.04, 0.06, 0.08, 0.1}) {
    auto s = s0_between_wells(v, E, l, g);
    CHECK(s.S0 < prev);
    prev = s.S0;
    for (std::size_t k = 0; k < g.size(); ++k)
      if (s.left_field.mask[k] == NodeTag::Outside && prev_field.mask[k] == NodeTag::Outside)
        CHECK_MESSAGE(s.left_field.values[k] <= prev_field.values[k] + 1e-12, "node " << k);
    prev_field = s.left_field;
  }
}

TEST_CASE("mirror symmetry and triangle inequality") {
  auto v = quartic();
  auto [l, r] = find_wells(v, {0.8, 0.1});
  const GridSpec g = quartic_grid(256);
  const double E = 0.05;
  auto dl = agmon_distance(v, E, l, g);
  auto dr = agmon_distance(v, E, r, g);
  double worst = 0.0;
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i) worst = std::max(worst, std::abs(dl.at(g.n1 - 1 - i, j) - dr.at(i, j)));
  CHECK(worst <= 1e-12);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u1(-1.8, 1.8), u2(-1.3, 1.3);
  for (int k = 0; k < 200; ++k) {
    const Vec2 a(u1(rng), u2(rng)), b(u1(rng), u2(rng));
    // Metric length of the straight segment, midpoint rule.
    double len = 0.0;
    const int m = 400;
    for (int q = 0; q < m; ++q) {
      const Vec2 p = a + (q + 0.5) / m * (b - a);
      len += std::sqrt(std::max(v.value(p) - E, 0.0)) * (b - a).norm() / m;
    }
    // First-order scheme: the field overestimates oblique distances by O(dx).
    const double tol = dl.interpolation_error(a) + dl.interpolation_error(b) + 0.5 * g.max_spacing();
    CHECK(dl.interpolate(a) <= dl.interpolate(b) + len + tol);
  }
}

TEST_CASE("too coarse a grid is rejected") {
  auto v = quartic();
  auto [l, r] = find_wells(v, {0.8, 0.1});
  // A grid that never comes near the left well cannot hold its band.
  const GridSpec g = GridSpec::covering({0.2, -1.5}, {2.0, 1.5}, 32, 32);
  try {
    agmon_distance(v, 0.05, l, g);
    FAIL("expected GridTooCoarse");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GridTooCoarse);
  }
}
