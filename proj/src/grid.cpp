#include "tunnelkit/grid.hpp"

#include "tunnelkit/error.hpp"

#include <algorithm>
#include <cmath>

namespace tunnelkit {

GridSpec GridSpec::covering(const Vec2& lo, const Vec2& hi, int n1, int n2) {
  if (n1 < 2 || n2 < 2 || !(hi.x() > lo.x()) || !(hi.y() > lo.y()))
    throw Error(ErrorKind::ValidationError, "grid needs at least 2 nodes and a positive extent");
  GridSpec g;
  g.origin = lo;
  g.n1 = n1;
  g.n2 = n2;
  g.spacing = Vec2((hi.x() - lo.x()) / (n1 - 1), (hi.y() - lo.y()) / (n2 - 1));
  return g;
}

bool GridSpec::contains(const Vec2& x) const {
  const Vec2 hi = upper();
  return x.x() >= origin.x() && x.x() <= hi.x() && x.y() >= origin.y() && x.y() <= hi.y();
}

namespace {

// Cell index and local coordinate along one axis, clamped to the grid.
void locate(double x, double origin, double step, int n, int& i, double& t) {
  const double s = (x - origin) / step;
  i = std::clamp(static_cast<int>(std::floor(s)), 0, n - 2);
  t = std::clamp(s - i, 0.0, 1.0);
}

}  // namespace

double ScalarField2D::interpolate(const Vec2& x) const {
  int i, j;
  double s, t;
  locate(x.x(), grid.origin.x(), grid.spacing.x(), grid.n1, i, s);
  locate(x.y(), grid.origin.y(), grid.spacing.y(), grid.n2, j, t);
  return (1 - s) * (1 - t) * at(i, j) + s * (1 - t) * at(i + 1, j) + (1 - s) * t * at(i, j + 1) +
         s * t * at(i + 1, j + 1);
}

double ScalarField2D::interpolation_error(const Vec2& x) const {
  int i, j;
  double s, t;
  locate(x.x(), grid.origin.x(), grid.spacing.x(), grid.n1, i, s);
  locate(x.y(), grid.origin.y(), grid.spacing.y(), grid.n2, j, t);
  double d11 = 0.0, d22 = 0.0;
  for (int jj = j; jj <= j + 1; ++jj) {
    const int ic = std::clamp(i, 1, grid.n1 - 2);
    d11 = std::max(d11, std::abs(at(ic - 1, jj) - 2 * at(ic, jj) + at(ic + 1, jj)));
  }
  for (int ii = i; ii <= i + 1; ++ii) {
    const int jc = std::clamp(j, 1, grid.n2 - 2);
    d22 = std::max(d22, std::abs(at(ii, jc - 1) - 2 * at(ii, jc) + at(ii, jc + 1)));
  }
  // Second differences already carry the dx^2 factor.
  return (d11 + d22) / 8.0;
}

}  // namespace tunnelkit
