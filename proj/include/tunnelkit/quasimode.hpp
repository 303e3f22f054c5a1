#pragma once

#include "tunnelkit/chart.hpp"
#include "tunnelkit/spectrum.hpp"

#include <vector>

namespace tunnelkit {

struct QuasiModeOptions {
  /// Matching radii in units of h / lambda: the harmonic WKB is compared with
  /// the Hermite function where sum_j lambda_j u_j^2 / h equals each value, and
  /// the two results are extrapolated in 1 / radius.
  double match_radius = 400.0;
  bool richardson = true;
};

/// Values of a one-well quasimode u = a e^{-F/h} where its rays meet x1 = 0.
struct AxisSample {
  double theta = 0.0;
  double x2 = 0.0;
  double F = 0.0;
  Vec2 xi = Vec2::Zero();
  double dx2_dtheta = 0.0;   // along the axis, with the crossing time adjusted
  double dxi2_dtheta = 0.0;
  double log_a = 0.0;
  double dlog_a_dt = 0.0;    // -Jdot / (2 J)
};

/// Leading-order WKB quasimode on the boundary fan of an ActionChart:
/// a = c(theta) |J|^{-1/2} along each ray, with c(theta) fixed by matching the
/// L^2-normalized Hermite function of the well's quadratic approximation.
class QuasiModeWKB {
 public:
  QuasiModeWKB(const ActionChart& chart, const Index2& alpha, double h,
               const QuasiModeOptions& opts = {});

  const ActionChart& chart() const { return chart_; }
  double h() const { return h_; }
  const Index2& alpha() const { return alpha_; }
  /// log c(theta) per fan ray.
  const std::vector<double>& log_c() const { return log_c_; }
  /// log a at sample i of ray k.
  double log_amplitude(std::size_t k, std::size_t i) const;
  /// log u = log a - F / h at sample i of ray k.
  double log_value(std::size_t k, std::size_t i) const;

  /// Ray ends on x1 = 0, sorted by x2. Rays that stop elsewhere are skipped.
  std::vector<AxisSample> axis_trace() const;

  /// max |2 grad F . grad a + a Delta F| / max a over interior samples of the
  /// valid tube: d a / dt from differences along each ray, Delta F = tr(d xi / d x)
  /// from the variational data.
  double transport_residual() const;

 private:
  ActionChart chart_;
  Index2 alpha_;
  double h_;
  std::vector<double> log_c_;
};

/// log of the L^2-normalized Hermite function of the harmonic approximation
/// at the point x, and the sign separately.
double log_hermite_function(const WellData& well, const Index2& alpha, double h, const Vec2& x,
                            int* sign = nullptr);

/// log c(theta) for the harmonic model of the well at its exact energy, at a
/// single matching radius.
double harmonic_match(const WellData& well, const Index2& alpha, double h, double theta,
                      double radius);

}  // namespace tunnelkit
