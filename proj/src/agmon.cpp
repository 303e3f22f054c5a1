#include "tunnelkit/agmon.hpp"

#include "tunnelkit/eikonal.hpp"
#include "tunnelkit/error.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace tunnelkit {

namespace {

constexpr double kZeroEnergy = 1e-14;

using Poly2 = std::map<std::pair<int, int>, double>;

Poly2 partial(const Poly2& p, int var) {
  Poly2 r;
  for (const auto& [e, c] : p) {
    const int k = var == 0 ? e.first : e.second;
    if (k == 0) continue;
    auto d = e;
    (var == 0 ? d.first : d.second) -= 1;
    r[d] += c * k;
  }
  return r;
}

Poly2 times(const Poly2& p, const Poly2& q) {
  Poly2 r;
  for (const auto& [a, c] : p)
    for (const auto& [b, d] : q) r[{a.first + b.first, a.second + b.second}] += c * d;
  return r;
}

double eval(const Poly2& p, const Vec2& u) {
  double s = 0.0;
  for (const auto& [e, c] : p) s += c * std::pow(u.x(), e.first) * std::pow(u.y(), e.second);
  return s;
}

}  // namespace

double descent_action(const PotentialModel& model, const Vec2& x0, double E, Vec2* foot) {
  const double v0 = model.value(x0) - E;
  if (v0 <= 0.0) {
    if (foot) *foot = x0;
    return 0.0;
  }
  // Parametrise the descent line by tau with V = E + v0 tau^2:
  //   dx/dtau = 2 v0 tau grad V / |grad V|^2,  dI/dtau = 2 v0^{3/2} tau^2 / |grad V|.
  const double c = 2.0 * v0 * std::sqrt(v0);
  auto rhs = [&](double tau, const Vec2& x, Vec2& dx, double& dI) {
    const Vec2 g = model.gradient(x);
    const double g2 = g.squaredNorm();
    dx = (2.0 * v0 * tau / g2) * g;
    dI = c * tau * tau / std::sqrt(g2);
  };
  const bool degenerate = E <= kZeroEnergy;  // the gradient vanishes at the foot
  const double tau_end = degenerate ? 1e-4 : 0.0;
  const int steps = 32;
  const double h = -(1.0 - tau_end) / steps;
  Vec2 x = x0;
  double I = 0.0;
  double tau = 1.0;
  for (int k = 0; k < steps; ++k) {
    Vec2 k1, k2, k3, k4;
    double i1, i2, i3, i4;
    rhs(tau, x, k1, i1);
    rhs(tau + 0.5 * h, x + 0.5 * h * k1, k2, i2);
    rhs(tau + 0.5 * h, x + 0.5 * h * k2, k3, i3);
    rhs(tau + h, x + h * k3, k4, i4);
    x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    I -= h / 6.0 * (i1 + 2 * i2 + 2 * i3 + i4);
    tau += h;
  }
  if (degenerate) I += c * tau_end * tau_end / std::sqrt(model.gradient(x).squaredNorm()) * tau_end / 2;
  if (foot) *foot = x;
  return I;
}

namespace {

struct LocalPhase {
  Poly2 phi;  // phi2 + phi3 + phi4 in principal coordinates
};

LocalPhase local_phase(const PotentialModel& model, const WellData& well) {
  const PotentialModel local = model.substituted(well.center, well.axes);
  const double l[2] = {well.lambda1, well.lambda2};
  Poly2 phi{{{2, 0}, 0.5 * l[0]}, {{0, 2}, 0.5 * l[1]}};
  Poly2 V3, V4;
  for (const auto& t : local.terms()) {
    if (t.a + t.b == 3) V3[{t.a, t.b}] += t.coefficient;
    if (t.a + t.b == 4) V4[{t.a, t.b}] += t.coefficient;
  }
  // 2 grad phi2 . grad phi_k multiplies u1^a u2^b by 2 (a lambda1 + b lambda2).
  auto solve = [&](const Poly2& rhs) {
    Poly2 r;
    for (const auto& [e, c] : rhs) r[e] = c / (2.0 * (e.first * l[0] + e.second * l[1]));
    return r;
  };
  const Poly2 phi3 = solve(V3);
  Poly2 rhs4 = V4;
  for (int v = 0; v < 2; ++v)
    for (const auto& [e, c] : times(partial(phi3, v), partial(phi3, v))) rhs4[e] -= c;
  for (const auto& [e, c] : phi3) phi[e] += c;
  for (const auto& [e, c] : solve(rhs4)) phi[e] += c;
  return {phi};
}

}  // namespace

double local_agmon_zero(const PotentialModel& model, const WellData& well, const Vec2& x) {
  return eval(local_phase(model, well).phi, well.to_principal(x));
}

Vec2 local_agmon_zero_gradient(const PotentialModel& model, const WellData& well, const Vec2& x) {
  const LocalPhase p = local_phase(model, well);
  const Vec2 u = well.to_principal(x);
  const Vec2 g(eval(partial(p.phi, 0), u), eval(partial(p.phi, 1), u));
  return well.axes * g;
}

namespace {

ScalarField2D agmon_field(const PotentialModel& model, double E,
                          const std::vector<const WellData*>& wells, const GridSpec& grid,
                          const AgmonOptions& opts) {
  ScalarField2D field(grid);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> slowness(grid.size()), initial(grid.size(), nan);
  std::vector<double> potential(grid.size());
  for (int j = 0; j < grid.n2; ++j)
    for (int i = 0; i < grid.n1; ++i) {
      const std::size_t k = grid.index(i, j);
      potential[k] = model.value(grid.node(i, j));
      slowness[k] = std::sqrt(std::max(potential[k] - E, 0.0));
    }

  const double dx = grid.max_spacing();
  const bool zero = E <= kZeroEnergy;
  int band_nodes = 0;
  for (const WellData* w : wells) {
    WellBoundary boundary;
    double gmax = 0.0;
    if (!zero) {
      boundary = well_boundary(model, *w, E, opts.contour);
      for (const auto& p : boundary.polyline) gmax = std::max(gmax, model.gradient(p).norm());
    }
    const double bd = opts.band_factor * dx;
    const double width = bd * gmax + w->lambda_max() * w->lambda_max() * bd * bd;
    const double reach = 0.5 * std::abs(w->center.x());
    for (int j = 0; j < grid.n2; ++j)
      for (int i = 0; i < grid.n1; ++i) {
        const std::size_t k = grid.index(i, j);
        const Vec2 x = grid.node(i, j);
        const double v = potential[k] - E;
        if (zero) {
          if ((x - w->center).norm() > reach) continue;
          if ((x - w->center).norm() < 1e-12) {
            initial[k] = 0.0;
            field.mask[k] = NodeTag::Inside;
          } else if (v <= width) {
            initial[k] = local_agmon_zero(model, *w, x);
            field.mask[k] = NodeTag::Source;
            ++band_nodes;
          }
          continue;
        }
        if (v <= 0.0) {
          if (boundary.contains(x)) {
            initial[k] = 0.0;
            field.mask[k] = NodeTag::Inside;
          }
        } else if (v <= width) {
          Vec2 foot;
          const double d = descent_action(model, x, E, &foot);
          if (boundary.distance_to(foot) <= 2.0 * dx) {
            initial[k] = d;
            field.mask[k] = NodeTag::Source;
            ++band_nodes;
          }
        }
      }
  }
  if (band_nodes < opts.min_band_nodes * static_cast<int>(wells.size()))
    throw Error(ErrorKind::GridTooCoarse, "source band holds only " + std::to_string(band_nodes) +
                                              " nodes; refine the grid");
  field.values = solve_eikonal(grid, slowness, initial);
  return field;
}

}  // namespace

ScalarField2D agmon_distance(const PotentialModel& model, double E, const WellData& well,
                             const GridSpec& grid, const AgmonOptions& opts) {
  return agmon_field(model, E, {&well}, grid, opts);
}

ScalarField2D agmon_distance(const PotentialModel& model, double E, const WellData& left,
                             const WellData& right, const GridSpec& grid,
                             const AgmonOptions& opts) {
  return agmon_field(model, E, {&left, &right}, grid, opts);
}

S0Result s0_between_wells(const PotentialModel& model, double E, const WellData& left,
                          const GridSpec& grid, const AgmonOptions& opts) {
  const double s = -grid.origin.x() / grid.spacing.x();
  const int i0 = static_cast<int>(std::lround(s));
  if (std::abs(s - i0) > 1e-9 || i0 < 0 || i0 >= grid.n1)
    throw Error(ErrorKind::ValidationError, "grid has no node column on the symmetry axis");
  S0Result r;
  r.left_field = agmon_distance(model, E, left, grid, opts);
  int jmin = 0;
  for (int j = 1; j < grid.n2; ++j)
    if (r.left_field.at(i0, j) < r.left_field.at(i0, jmin)) jmin = j;
  double dmin = r.left_field.at(i0, jmin);
  double x2 = grid.node(i0, jmin).y();
  if (jmin > 0 && jmin + 1 < grid.n2) {
    // Parabola through the three nodes around the discrete minimum.
    const double a = r.left_field.at(i0, jmin - 1), b = dmin, c = r.left_field.at(i0, jmin + 1);
    const double den = a - 2 * b + c;
    if (den > 0) {
      const double off = 0.5 * (a - c) / den;
      if (std::abs(off) <= 1.0) {
        dmin = b - 0.25 * (a - c) * off;
        x2 += off * grid.spacing.y();
      }
    }
  }
  r.S0 = 2.0 * dmin;
  r.xE = Vec2(0.0, x2);
  return r;
}

double eikonal_residual_constant(const ScalarField2D& field, const PotentialModel& model,
                                 double E) {
  const GridSpec& g = field.grid;
  double worst = 0.0;
  for (int j = 1; j + 1 < g.n2; ++j)
    for (int i = 1; i + 1 < g.n1; ++i) {
      if (field.tag(i, j) != NodeTag::Outside) continue;
      bool ok = true;
      for (auto [ii, jj] : {std::pair{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}})
        ok &= field.tag(ii, jj) != NodeTag::Inside;
      if (!ok) continue;
      const double d = field.at(i, j);
      const double gx = std::max({(d - field.at(i - 1, j)) / g.spacing.x(),
                                  (d - field.at(i + 1, j)) / g.spacing.x(), 0.0});
      const double gy = std::max({(d - field.at(i, j - 1)) / g.spacing.y(),
                                  (d - field.at(i, j + 1)) / g.spacing.y(), 0.0});
      const double f2 = std::max(model.value(g.node(i, j)) - E, 0.0);
      worst = std::max(worst, std::abs(gx * gx + gy * gy - f2));
    }
  return worst / g.max_spacing();
}

}  // namespace tunnelkit
