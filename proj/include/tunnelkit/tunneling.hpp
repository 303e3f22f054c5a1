#pragma once

#include "tunnelkit/agmon.hpp"
#include "tunnelkit/quasimode.hpp"
#include "tunnelkit/reference.hpp"
#include "tunnelkit/spectrum.hpp"

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/interpolators/makima.hpp>

#include <optional>
#include <string>
#include <vector>

namespace tunnelkit {

/// A quasimode restricted to the symmetry axis, interpolated in x2:
/// F with its x2-derivative xi2, xi2 with d xi2 / d x2, log a by makima.
class AxisTrace {
 public:
  explicit AxisTrace(const QuasiModeWKB& q);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double F(double x2) const { return (*F_)(x2); }
  double xi2(double x2) const { return (*xi2_)(x2); }
  double dxi2(double x2) const { return xi2_->prime(x2); }
  double xi1(double x2) const;
  double log_a(double x2) const { return (*log_a_)(x2); }
  double log_u(double x2) const { return log_a(x2) - F(x2) / h_; }
  /// d log a / d x1 from the transport equation along the crossing ray.
  double dlog_a_dx1(double x2) const;
  /// d log u / d x1.
  double dlog_u_dx1(double x2) const { return -xi1(x2) / h_ + dlog_a_dx1(x2); }
  double center_x1() const { return center_x1_; }

 private:
  const PotentialModel* model_;
  double E_, h_, lo_, hi_, sign1_, center_x1_;
  using Hermite = boost::math::interpolators::cubic_hermite<std::vector<double>>;
  using Makima = boost::math::interpolators::makima<std::vector<double>>;
  std::optional<Hermite> F_, xi2_;
  std::optional<Makima> log_a_, dlog_a_dt_;
};

struct HerringOptions {
  double threshold = 1e-3;  // sigma: where the integrand exceeds this fraction of its peak
  int scan = 400;
  std::optional<std::pair<double, double>> sigma;  // override
};

struct HerringResult {
  double delta = 0.0;
  double sigma_lo = 0.0, sigma_hi = 0.0;
  double peak_x2 = 0.0;
};

/// 4 h^2 int_sigma u_1 d_n u_2 dx2 on x1 = 0, n pointing from the first well
/// to the second. Throws CoverageGap if sigma reaches the end of either trace.
HerringResult herring_splitting(const AxisTrace& first, const AxisTrace& second, double h,
                                const HerringOptions& opts = {});

struct StationaryPhaseResult {
  double delta = 0.0;
  double x2 = 0.0;        // critical point of F_1 + F_2 on the axis
  double phase = 0.0;     // (F_1 + F_2)(x2)
  double hessian = 0.0;   // d^2 (F_1 + F_2) / d x2^2
  double F1 = 0.0, F2 = 0.0;
};

/// Gaussian evaluation of the same integral at the critical point of F_1 + F_2
/// inside sigma. Throws NoCriticalPoint or DegenerateCriticalPoint.
StationaryPhaseResult stationary_phase_splitting(const AxisTrace& first, const AxisTrace& second,
                                                 double h, double sigma_lo, double sigma_hi,
                                                 double tol_hess = 1e-8);

}  // namespace tunnelkit

namespace tunnelkit {

struct CycleOptions {
  double tol_cycle = 1e-4;       // on the scaled mismatch 2 |xi2| / |xi| at the axis
  double tol_action_rel = 1e-3;  // minimal: |S - S0| <= tol_action_rel S0
  FlowOptions flow{.t_max = 12.0, .step = 1e-3, .tol_shell = 1e-6, .stop_at_axis = true};
};

struct TunnelCycle {
  Vec2 y_L = Vec2::Zero();
  Vec2 y_R = Vec2::Zero();  // mirror of the landing umbilic required by a cycle
  GeodesicPath path;        // from y_L to the axis
  double mismatch = 0.0;    // |(x2, xi2) - (x2, -xi2)| / |xi| = 2 |xi2| / |xi| at the axis
  double action = 0.0;      // twice the half action
  bool is_cycle = false;
  bool minimal = false;
  std::string source;       // "umbilic" or "axis"
};

/// Shot from a boundary point y of the first well with xi = 0 to x1 = 0.
TunnelCycle tunnel_shot(const PotentialModel& model, const Vec2& y, double E, double S0,
                        const CycleOptions& opts = {});

/// Shots from the inner umbilics of the state's torus (projected onto {V = E})
/// and from the foot of the minimal geodesic. All shots are returned; is_cycle
/// marks those within tol_cycle.
std::vector<TunnelCycle> find_tunnel_cycles(const PotentialModel& model, const WellData& left,
                                            const TorusState& state, double E,
                                            const CycleOptions& opts = {});

struct CorrespondenceDefect {
  Vec2 x_bar = Vec2::Zero();  // where the umbilic's caustic line meets the axis
  double F = 0.0;             // F_y^E(x_bar)
  double d_E = 0.0;           // d_E(x_bar)
  double d_Ep = 0.0;          // d_E'(x_bar)
  double S0_Ep = 0.0;
  double transit = 0.0;       // time of flight to x_bar on the boundary ray, = -d d_E / dE
  double terms[3] = {0.0, 0.0, 0.0};
  double total = 0.0;         // 2 F(x_bar) - S0(E') = terms[0] + terms[1] + terms[2]
};

/// (S_L - S_R*) - S0(E') at the critical point, split into
/// 2 (F - d_E), 2 (d_E - d_E'), 2 (d_E'(x_bar) - d_E'(x_E')). Distances come
/// from the boundary rays (Newton on launch angle and time). Throws
/// NoCriticalPoint if the caustic line does not reach the axis.
CorrespondenceDefect correspondence_defect(const PotentialModel& model, const WellData& left,
                                           const Vec2& umbilic, double E, double E_prime);

struct SeriesOptions {
  ChartOptions chart;
  QuasiModeOptions quasimode;
  HerringOptions herring;
  bool with_reference = false;
  Vec2 box_lo{-2.2, -1.6}, box_hi{2.2, 1.6};  // reference box
  int ref_n1 = 64, ref_n2 = 48;
  ReferenceOptions reference;   // E_max is set per state
  double tol_transport = 1e-3;  // rows above it carry the flag "transport"
  BirkhoffOptions birkhoff;
};

struct SplittingEstimate {
  Index2 alpha{0, 0};
  double h = 0.0;
  double E_center = 0.0;  // normal-form energy of the state
  double E_chart = 0.0;   // energy of the charts (transverse-adiabatic for alpha2 > 0)
  double S0 = 0.0;
  Vec2 x_E = Vec2::Zero();
  double delta_herring = 0.0;
  double delta_stationary = 0.0;
  std::optional<double> delta_reference;
  double S_L = 0.0, S_R = 0.0;  // phases at the critical point
  double transport_residual = 0.0;
  std::vector<std::string> flags;
  std::string error;            // empty when the row is complete
  bool ok() const { return error.empty(); }
};

/// Herring and stationary-phase splitting for one state of the left well.
SplittingEstimate splitting_estimate(const PotentialModel& model, const WellData& left,
                                     const WellData& right, const Index2& alpha, double h,
                                     const SeriesOptions& opts = {});

/// One row per state of spectral_series(left, h, E0); errors are recorded per
/// row, not thrown.
std::vector<SplittingEstimate> spectral_tunnel_series(const PotentialModel& model, double h,
                                                      double E0, const Vec2& well_seed,
                                                      const SeriesOptions& opts = {});

}  // namespace tunnelkit
