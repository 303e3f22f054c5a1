#include "tunnelkit/boundary.hpp"

#include "tunnelkit/error.hpp"

#include <boost/math/tools/roots.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace tunnelkit {

namespace {

// Root of f(t) = V(p0 + t (p1 - p0)) - E on [0, 1], given a sign change.
Vec2 refine_on_segment(const PotentialModel& model, const Vec2& p0, const Vec2& p1, double E,
                       double tol) {
  const Vec2 d = p1 - p0;
  auto f = [&](double t) { return model.value(p0 + t * d) - E; };
  double f0 = f(0.0), f1 = f(1.0);
  if (f0 == 0.0) return p0;
  if (f1 == 0.0) return p1;
  boost::uintmax_t iters = 200;
  auto [lo, hi] = boost::math::tools::toms748_solve(
      f, 0.0, 1.0, f0, f1, boost::math::tools::eps_tolerance<double>(52), iters);
  double t = 0.5 * (lo + hi);
  // Newton polish: toms748 stops on bracket width, the residual is what we promise.
  for (int k = 0; k < 5 && std::abs(f(t)) > tol; ++k) {
    const double df = model.gradient(p0 + t * d).dot(d);
    if (df == 0.0) break;
    const double tn = t - f(t) / df;
    if (tn < lo || tn > hi) break;
    t = tn;
  }
  return p0 + t * d;
}

bool point_in_polygon(const std::vector<Vec2>& poly, const Vec2& p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double xc = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < xc) inside = !inside;
    }
  }
  return inside;
}

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double L2 = ab.squaredNorm();
  double t = L2 > 0 ? (p - a).dot(ab) / L2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
         d4 != 0;
}

struct Loop {
  std::vector<Vec2> points;
  bool closed = false;
};

std::vector<Loop> march(const PotentialModel& model, const Vec2& lo, const Vec2& hi, int n,
                        double E, double tol) {
  const int np = n + 1;
  const Vec2 step = (hi - lo) / n;
  std::vector<double> f(static_cast<std::size_t>(np) * np);
  auto node = [&](int i, int j) { return Vec2(lo.x() + i * step.x(), lo.y() + j * step.y()); };
  for (int j = 0; j < np; ++j)
    for (int i = 0; i < np; ++i) {
      double v = model.value(node(i, j)) - E;
      if (v == 0.0) v = std::numeric_limits<double>::min();  // keep the sign test binary
      f[j * np + i] = v;
    }
  auto val = [&](int i, int j) { return f[j * np + i]; };

  // Edge ids: horizontal (i,j)-(i+1,j) -> 2*(j*np+i); vertical (i,j)-(i,j+1) -> +1.
  std::unordered_map<long, Vec2> edge_point;
  auto edge = [&](int i, int j, bool vertical) -> long {
    const long id = 2L * (static_cast<long>(j) * np + i) + (vertical ? 1 : 0);
    if (!edge_point.count(id)) {
      const Vec2 a = node(i, j);
      const Vec2 b = vertical ? node(i, j + 1) : node(i + 1, j);
      edge_point[id] = refine_on_segment(model, a, b, E, tol);
    }
    return id;
  };

  std::vector<std::array<long, 2>> segments;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const bool s00 = val(i, j) > 0, s10 = val(i + 1, j) > 0;
      const bool s11 = val(i + 1, j + 1) > 0, s01 = val(i, j + 1) > 0;
      std::vector<long> cut;
      long bottom = -1, right = -1, top = -1, left = -1;
      if (s00 != s10) bottom = edge(i, j, false);
      if (s10 != s11) right = edge(i + 1, j, true);
      if (s01 != s11) top = edge(i, j + 1, false);
      if (s00 != s01) left = edge(i, j, true);
      const int count = (bottom >= 0) + (right >= 0) + (top >= 0) + (left >= 0);
      if (count == 2) {
        for (long e : {bottom, right, top, left})
          if (e >= 0) cut.push_back(e);
        segments.push_back({cut[0], cut[1]});
      } else if (count == 4) {
        const Vec2 c = node(i, j) + 0.5 * step;
        const bool sc = model.value(c) - E > 0;
        if (sc == s00) {
          segments.push_back({bottom, right});
          segments.push_back({top, left});
        } else {
          segments.push_back({bottom, left});
          segments.push_back({top, right});
        }
      }
    }

  std::unordered_map<long, std::vector<std::size_t>> incident;
  for (std::size_t s = 0; s < segments.size(); ++s)
    for (long e : segments[s]) incident[e].push_back(s);

  std::vector<bool> used(segments.size(), false);
  std::vector<Loop> loops;
  for (std::size_t s0 = 0; s0 < segments.size(); ++s0) {
    if (used[s0]) continue;
    // Walk backwards to an open end (if any) so open curves come out whole.
    std::size_t start = s0;
    long start_edge = segments[s0][0];
    {
      std::size_t s = s0;
      long e = segments[s0][0];
      std::vector<bool> seen(segments.size(), false);
      seen[s] = true;
      while (true) {
        const auto& inc = incident[e];
        std::size_t next = s;
        for (auto c : inc)
          if (c != s) next = c;
        if (next == s || seen[next]) break;
        seen[next] = true;
        e = segments[next][0] == e ? segments[next][1] : segments[next][0];
        s = next;
      }
      start = s;
      start_edge = e;
    }
    Loop loop;
    std::size_t s = start;
    long e = start_edge;
    loop.points.push_back(edge_point[e]);
    while (true) {
      used[s] = true;
      e = segments[s][0] == e ? segments[s][1] : segments[s][0];
      if (e == start_edge) {
        loop.closed = true;
        break;
      }
      loop.points.push_back(edge_point[e]);
      const auto& inc = incident[e];
      std::size_t next = s;
      for (auto c : inc)
        if (c != s) next = c;
      if (next == s || used[next]) break;
      s = next;
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

}  // namespace

bool WellBoundary::contains(const Vec2& p) const { return point_in_polygon(polyline, p); }

double WellBoundary::distance_to(const Vec2& p) const {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = polyline.size();
  for (std::size_t i = 0; i < n; ++i)
    best = std::min(best, segment_distance(p, polyline[i], polyline[(i + 1) % n]));
  return best;
}

double WellBoundary::max_residual(const PotentialModel& model) const {
  double r = 0.0;
  for (const auto& p : polyline) r = std::max(r, std::abs(model.value(p) - energy));
  return r;
}

bool WellBoundary::is_simple() const {
  const std::size_t n = polyline.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_intersect(polyline[i], polyline[(i + 1) % n], polyline[j],
                             polyline[(j + 1) % n]))
        return false;
    }
  return true;
}

WellBoundary well_boundary(const PotentialModel& model, const WellData& well, double E,
                           const ContourOptions& opts) {
  if (!(E > model.value(well.center)))
    throw Error(ErrorKind::InvalidPotential, "contour energy must exceed the well minimum");
  const Vec2 mirror_center = mirror(well.center);

  // Grow a square box around the well until V > E on its whole perimeter.
  double R = 2.0 * std::sqrt(E) / well.lambda_min();
  bool closed_box = false;
  for (int grow = 0; grow < 40 && !closed_box; ++grow) {
    closed_box = true;
    const int m = 4 * opts.resolution;
    for (int k = 0; k < m && closed_box; ++k) {
      const double s = -1.0 + 2.0 * k / m;
      for (const Vec2& p : {Vec2(s, -1), Vec2(s, 1), Vec2(-1, s), Vec2(1, s)})
        if (model.value(well.center + R * p) <= E) {
          closed_box = false;
          break;
        }
    }
    if (!closed_box) R *= 1.5;
  }
  if (!closed_box)
    throw Error(ErrorKind::EnergyAboveBarrier, "level set {V = E} is not bounded");

  const Vec2 lo = well.center - Vec2(R, R), hi = well.center + Vec2(R, R);
  const auto loops = march(model, lo, hi, opts.resolution, E, opts.tol_contour);
  for (const auto& loop : loops) {
    if (!loop.closed || loop.points.size() < 3) continue;
    if (!point_in_polygon(loop.points, well.center)) continue;
    if (point_in_polygon(loop.points, mirror_center) && mirror_center != well.center)
      throw Error(ErrorKind::EnergyAboveBarrier,
                  "the well contour at E = " + std::to_string(E) + " merges with the mirror well");
    for (const auto& p : loop.points)
      if (p.x() * well.center.x() <= 0.0 && well.center.x() != 0.0)
        throw Error(ErrorKind::EnergyAboveBarrier,
                    "the well contour at E = " + std::to_string(E) + " crosses the symmetry axis");
    WellBoundary b;
    b.energy = E;
    b.polyline = loop.points;
    return b;
  }
  throw Error(ErrorKind::EnergyAboveBarrier, "no closed contour encloses the well center");
}

double boundary_radius(const PotentialModel& model, const Vec2& center, const Vec2& dir,
                       double E, double tol) {
  const Vec2 u = dir.normalized();
  auto f = [&](double r) { return model.value(center + r * u) - E; };
  if (f(0.0) >= 0.0) return 0.0;
  double r0 = 0.0, r1 = 1e-3;
  while (f(r1) < 0.0) {
    r0 = r1;
    r1 *= 2.0;
    if (r1 > 1e6) throw Error(ErrorKind::EnergyAboveBarrier, "ray never leaves {V < E}");
  }
  // Tighten the bracket so it contains the first crossing.
  const int sub = 64;
  for (int k = 1; k <= sub; ++k) {
    const double r = r0 + (r1 - r0) * k / sub;
    if (f(r) >= 0.0) {
      r1 = r;
      break;
    }
    r0 = r;
  }
  boost::uintmax_t iters = 200;
  auto [lo, hi] = boost::math::tools::toms748_solve(
      f, r0, r1, boost::math::tools::eps_tolerance<double>(53), iters);
  double r = 0.5 * (lo + hi);
  for (int k = 0; k < 4 && std::abs(f(r)) > tol; ++k) {
    const double df = model.gradient(center + r * u).dot(u);
    if (df == 0.0) break;
    r -= f(r) / df;
  }
  return r;
}

}  // namespace tunnelkit
