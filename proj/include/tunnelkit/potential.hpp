#pragma once

#include <Eigen/Dense>

#include <vector>

namespace tunnelkit {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct Monomial {
  double coefficient = 0.0;
  int a = 0;  // exponent of x1
  int b = 0;  // exponent of x2
};

/// Polynomial potential V(x1, x2) = sum c * x1^a * x2^b.
///
/// Like terms are merged and zero coefficients dropped on construction, so the
/// term list is canonical. Double-well structure is not enforced here; that is
/// checked by find_wells, which is the only place that needs it.
class PotentialModel {
 public:
  PotentialModel() = default;
  explicit PotentialModel(std::vector<Monomial> terms);

  double value(const Vec2& x) const;
  Vec2 gradient(const Vec2& x) const;
  Mat2 hessian(const Vec2& x) const;

  const std::vector<Monomial>& terms() const { return terms_; }
  int degree() const;

  /// True iff no term with odd x1-exponent survives, i.e. V(-x1,x2) == V(x1,x2).
  bool is_mirror_symmetric() const;
  /// True iff there are no mixed terms x1^a x2^b with a,b > 0.
  bool is_separable() const;

  /// V(origin + M u) expanded as a polynomial in u.
  PotentialModel substituted(const Vec2& origin, const Mat2& M) const;
  /// Homogeneous part of the given total degree.
  PotentialModel homogeneous_part(int degree) const;
  /// Coefficient of x1^a x2^b (0 if absent).
  double coefficient(int a, int b) const;

 private:
  std::vector<Monomial> terms_;
};

enum class Side { Left, Right };

struct WellData {
  Vec2 center = Vec2::Zero();
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Mat2 hessian = Mat2::Zero();
  /// Columns are the principal directions belonging to lambda1 and lambda2.
  Mat2 axes = Mat2::Identity();
  Side side = Side::Right;

  double lambda_max() const { return std::max(lambda1, lambda2); }
  double lambda_min() const { return std::min(lambda1, lambda2); }
  /// Principal (well-centred) coordinates of a point.
  Vec2 to_principal(const Vec2& x) const { return axes.transpose() * (x - center); }
  Vec2 from_principal(const Vec2& u) const { return center + axes * u; }
};

struct WellSearchOptions {
  int max_iter = 100;
  double tol_gradient = 1e-12;
  double tol_posdef = 1e-8;
  double tol_minimum = 1e-10;  // |V(center)| allowed
};

/// Frequencies and principal axes at a given critical point. lambda_j^2 is
/// half the j-th Hessian eigenvalue; lambda1 belongs to the eigenvector closest
/// to the x1 axis (ties: smaller eigenvalue first).
WellData analyze_well(const PotentialModel& model, const Vec2& center, Side side,
                      double tol_posdef = 1e-8);

/// Newton search for the right minimum from `seed`; the left well is its mirror.
/// Returns (left, right).
std::pair<WellData, WellData> find_wells(const PotentialModel& model, const Vec2& seed,
                                         const WellSearchOptions& opts = {});

/// Barrier height V(0,0) of a symmetric double well (the saddle sits on the axis
/// for the potentials this library targets).
double barrier_height(const PotentialModel& model, const WellData& right);

/// The mirror map (x1, x2) -> (-x1, x2).
inline Vec2 mirror(const Vec2& x) { return {-x.x(), x.y()}; }

/// Quadratic approximation 1/2 (x-c)^T H (x-c) of the well as a polynomial model.
PotentialModel harmonic_model(const WellData& well);

}  // namespace tunnelkit
