#include "tunnelkit/potential.hpp"

#include "tunnelkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace tunnelkit {

namespace {

// x^k by repeated multiplication, so that (-x)^k == +/- x^k bit for bit.
double ipow(double x, int k) {
  double p = 1.0;
  for (int i = 0; i < k; ++i) p *= x;
  return p;
}

using PolyMap = std::map<std::pair<int, int>, double>;

PolyMap multiply(const PolyMap& p, const PolyMap& q) {
  PolyMap r;
  for (const auto& [e1, c1] : p)
    for (const auto& [e2, c2] : q) r[{e1.first + e2.first, e1.second + e2.second}] += c1 * c2;
  return r;
}

PolyMap power(const PolyMap& p, int k) {
  PolyMap r{{{0, 0}, 1.0}};
  for (int i = 0; i < k; ++i) r = multiply(r, p);
  return r;
}

}  // namespace

PotentialModel::PotentialModel(std::vector<Monomial> terms) {
  PolyMap merged;
  for (const auto& t : terms) {
    if (t.a < 0 || t.b < 0)
      throw Error(ErrorKind::InvalidPotential, "negative exponent in potential term");
    if (!std::isfinite(t.coefficient))
      throw Error(ErrorKind::InvalidPotential, "non-finite coefficient in potential term");
    merged[{t.a, t.b}] += t.coefficient;
  }
  for (const auto& [e, c] : merged)
    if (c != 0.0) terms_.push_back({c, e.first, e.second});
}

double PotentialModel::value(const Vec2& x) const {
  double v = 0.0;
  for (const auto& t : terms_) v += t.coefficient * ipow(x.x(), t.a) * ipow(x.y(), t.b);
  return v;
}

Vec2 PotentialModel::gradient(const Vec2& x) const {
  Vec2 g = Vec2::Zero();
  for (const auto& t : terms_) {
    if (t.a > 0) g.x() += t.coefficient * t.a * ipow(x.x(), t.a - 1) * ipow(x.y(), t.b);
    if (t.b > 0) g.y() += t.coefficient * t.b * ipow(x.x(), t.a) * ipow(x.y(), t.b - 1);
  }
  return g;
}

Mat2 PotentialModel::hessian(const Vec2& x) const {
  Mat2 h = Mat2::Zero();
  for (const auto& t : terms_) {
    const double c = t.coefficient;
    if (t.a > 1) h(0, 0) += c * t.a * (t.a - 1) * ipow(x.x(), t.a - 2) * ipow(x.y(), t.b);
    if (t.b > 1) h(1, 1) += c * t.b * (t.b - 1) * ipow(x.x(), t.a) * ipow(x.y(), t.b - 2);
    if (t.a > 0 && t.b > 0) {
      const double m = c * t.a * t.b * ipow(x.x(), t.a - 1) * ipow(x.y(), t.b - 1);
      h(0, 1) += m;
      h(1, 0) += m;
    }
  }
  return h;
}

int PotentialModel::degree() const {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, t.a + t.b);
  return d;
}

bool PotentialModel::is_mirror_symmetric() const {
  return std::none_of(terms_.begin(), terms_.end(), [](const Monomial& t) { return t.a % 2 != 0; });
}

bool PotentialModel::is_separable() const {
  return std::none_of(terms_.begin(), terms_.end(),
                      [](const Monomial& t) { return t.a > 0 && t.b > 0; });
}

PotentialModel PotentialModel::substituted(const Vec2& origin, const Mat2& M) const {
  // x1 = o1 + M00 u1 + M01 u2,  x2 = o2 + M10 u1 + M11 u2
  const PolyMap x1{{{0, 0}, origin.x()}, {{1, 0}, M(0, 0)}, {{0, 1}, M(0, 1)}};
  const PolyMap x2{{{0, 0}, origin.y()}, {{1, 0}, M(1, 0)}, {{0, 1}, M(1, 1)}};
  PolyMap acc;
  for (const auto& t : terms_) {
    const PolyMap term = multiply(power(x1, t.a), power(x2, t.b));
    for (const auto& [e, c] : term) acc[e] += t.coefficient * c;
  }
  std::vector<Monomial> out;
  double scale = 0.0;
  for (const auto& [e, c] : acc) scale = std::max(scale, std::abs(c));
  for (const auto& [e, c] : acc)
    if (std::abs(c) > 1e-15 * scale) out.push_back({c, e.first, e.second});
  return PotentialModel(std::move(out));
}

PotentialModel PotentialModel::homogeneous_part(int degree) const {
  std::vector<Monomial> out;
  for (const auto& t : terms_)
    if (t.a + t.b == degree) out.push_back(t);
  return PotentialModel(std::move(out));
}

double PotentialModel::coefficient(int a, int b) const {
  for (const auto& t : terms_)
    if (t.a == a && t.b == b) return t.coefficient;
  return 0.0;
}

WellData analyze_well(const PotentialModel& model, const Vec2& center, Side side,
                      double tol_posdef) {
  WellData w;
  w.center = center;
  w.side = side;
  w.hessian = model.hessian(center);
  Eigen::SelfAdjointEigenSolver<Mat2> es(w.hessian);
  const Eigen::Vector2d ev = es.eigenvalues();  // ascending
  if (ev(0) <= tol_posdef)
    throw Error(ErrorKind::DegenerateWell, "Hessian eigenvalue " + std::to_string(ev(0)) +
                                               " is not positive at the well center");
  const Mat2 vec = es.eigenvectors();
  // lambda1 goes with the eigenvector closest to the x1 axis; ties keep the
  // ascending eigenvalue order from the solver.
  int first = 0;
  if (std::abs(vec(0, 1)) > std::abs(vec(0, 0)) + 1e-12) first = 1;
  const int second = 1 - first;
  Vec2 e1 = vec.col(first);
  if (e1.x() < 0 || (e1.x() == 0 && e1.y() < 0)) e1 = -e1;
  const Vec2 e2(-e1.y(), e1.x());
  w.axes.col(0) = e1;
  w.axes.col(1) = e2;
  w.lambda1 = std::sqrt(ev(first) / 2.0);
  w.lambda2 = std::sqrt(ev(second) / 2.0);
  return w;
}

std::pair<WellData, WellData> find_wells(const PotentialModel& model, const Vec2& seed,
                                         const WellSearchOptions& opts) {
  if (!model.is_mirror_symmetric())
    throw Error(ErrorKind::SymmetryViolation, "potential has terms odd in x1");

  Vec2 x = seed;
  bool converged = false;
  for (int it = 0; it < opts.max_iter; ++it) {
    const Vec2 g = model.gradient(x);
    if (g.norm() <= opts.tol_gradient) {
      converged = true;
      break;
    }
    const Mat2 H = model.hessian(x);
    Vec2 step = H.fullPivLu().solve(-g);
    if (!step.allFinite() || g.dot(step) >= 0) step = -g;  // fall back to descent
    // Backtrack on |grad V| so the iteration cannot run away from the basin.
    double t = 1.0;
    const double g0 = g.norm();
    while (t > 1e-10 && model.gradient(x + t * step).norm() >= g0 && t * step.norm() > 1e-15)
      t *= 0.5;
    x += t * step;
  }
  if (!converged) {
    // One last check: rounding can stall just above the tolerance.
    if (model.gradient(x).norm() > 1e3 * opts.tol_gradient)
      throw Error(ErrorKind::NoConvergence,
                  "Newton iteration for the well minimum did not converge");
  }
  if (std::abs(x.x()) < 1e-8)
    throw Error(ErrorKind::DegenerateWell,
                "minimum lies on the symmetry axis; the potential is not a double well");
  if (x.x() < 0) x = mirror(x);

  WellData right = analyze_well(model, x, Side::Right, opts.tol_posdef);
  if (std::abs(model.value(x)) > opts.tol_minimum)
    throw Error(ErrorKind::InvalidPotential,
                "well minimum value " + std::to_string(model.value(x)) + " is not 0");

  WellData left = right;
  left.side = Side::Left;
  left.center = mirror(right.center);
  const Mat2 M = Eigen::Vector2d(-1.0, 1.0).asDiagonal();
  left.hessian = M * right.hessian * M;
  Vec2 e1 = M * right.axes.col(0);
  if (e1.x() < 0 || (e1.x() == 0 && e1.y() < 0)) e1 = -e1;
  left.axes.col(0) = e1;
  left.axes.col(1) = Vec2(-e1.y(), e1.x());
  return {left, right};
}

double barrier_height(const PotentialModel& model, const WellData& right) {
  // Minimise V(0, x2) by Newton from the well's x2 coordinate.
  double y = right.center.y();
  for (int it = 0; it < 100; ++it) {
    const Vec2 p(0.0, y);
    const double g = model.gradient(p).y();
    const double h = model.hessian(p)(1, 1);
    if (std::abs(g) < 1e-14) break;
    y -= h > 0 ? g / h : g;
  }
  return model.value(Vec2(0.0, y));
}

PotentialModel harmonic_model(const WellData& well) {
  const Mat2& H = well.hessian;
  const double c1 = well.center.x(), c2 = well.center.y();
  // 1/2 [H00 (x1-c1)^2 + 2 H01 (x1-c1)(x2-c2) + H11 (x2-c2)^2]
  std::vector<Monomial> t{
      {0.5 * H(0, 0), 2, 0},
      {-H(0, 0) * c1 - H(0, 1) * c2, 1, 0},
      {H(0, 1), 1, 1},
      {0.5 * H(1, 1), 0, 2},
      {-H(1, 1) * c2 - H(0, 1) * c1, 0, 1},
      {0.5 * H(0, 0) * c1 * c1 + H(0, 1) * c1 * c2 + 0.5 * H(1, 1) * c2 * c2, 0, 0},
  };
  return PotentialModel(std::move(t));
}

}  // namespace tunnelkit
