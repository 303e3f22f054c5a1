#include "tunnelkit/spectrum.hpp"

#include "tunnelkit/boundary.hpp"
#include "tunnelkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tunnelkit {

Vec2 actions(const Index2& alpha, double h) {
  return {(alpha[0] + 0.5) * h, (alpha[1] + 0.5) * h};
}

double ebk_energy(const WellData& well, const Index2& alpha, double h) {
  const Vec2 iota = actions(alpha, h);
  return 2.0 * well.lambda1 * iota.x() + 2.0 * well.lambda2 * iota.y();
}

std::array<Vec2, 4> harmonic_umbilics(const WellData& well, const Vec2& iota) {
  const double y1 = std::sqrt(2.0 * iota.x() / well.lambda1);
  const double y2 = std::sqrt(2.0 * iota.y() / well.lambda2);
  return {Vec2(y1, y2), Vec2(-y1, y2), Vec2(-y1, -y2), Vec2(y1, -y2)};
}

TorusState make_state(const WellData& well, const Index2& alpha, double h) {
  TorusState s;
  s.alpha = alpha;
  s.h = h;
  s.iota = actions(alpha, h);
  s.energy = ebk_energy(well, alpha, h);
  s.energy_quartic = std::numeric_limits<double>::quiet_NaN();
  s.umbilics = harmonic_umbilics(well, s.iota);
  return s;
}

std::vector<TorusState> spectral_series(const WellData& well, double h, double E0) {
  if (!(h > 0)) throw Error(ErrorKind::EmptySeries, "h must be positive");
  if (ebk_energy(well, {0, 0}, h) > E0)
    throw Error(ErrorKind::EmptySeries, "ground EBK energy exceeds E0 = " + std::to_string(E0));
  // |alpha| h <= E0 with a relative slack so that e.g. 5 * 0.1 <= 0.5 holds.
  const int nmax = static_cast<int>(std::floor(E0 / h * (1.0 + 1e-12) + 1e-12));
  std::vector<TorusState> out;
  for (int n = 0; n <= nmax; ++n)
    for (int a1 = n; a1 >= 0; --a1) out.push_back(make_state(well, {a1, n - a1}, h));
  std::stable_sort(out.begin(), out.end(), [](const TorusState& a, const TorusState& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return a.alpha < b.alpha;
  });
  return out;
}

void apply_normal_form(const NormalForm& nf, std::vector<TorusState>& states) {
  for (auto& s : states) s.energy_quartic = nf.energy(s.iota, s.h);
}

std::vector<UmbilicEntry> umbilic_lattice(const PotentialModel& model, const WellData& well,
                                          double h, double E_lo, double E_hi, bool project) {
  std::vector<UmbilicEntry> out;
  const int nmax = static_cast<int>(std::ceil(E_hi / (2.0 * h * well.lambda_min()))) + 1;
  for (int n = 0; n <= nmax; ++n)
    for (int a1 = n; a1 >= 0; --a1) {
      const Index2 alpha{a1, n - a1};
      TorusState s = make_state(well, alpha, h);
      if (s.energy < E_lo || s.energy > E_hi) continue;
      UmbilicEntry e;
      e.state = s;
      for (int q = 0; q < 4; ++q) {
        Vec2 x = well.from_principal(s.umbilics[q]);
        if (project) {
          const Vec2 dir = x - well.center;
          x = well.center + boundary_radius(model, well.center, dir, s.energy) * dir.normalized();
        }
        e.world[q] = x;
      }
      double best = std::numeric_limits<double>::infinity();
      for (int d1 = -1; d1 <= 1; ++d1)
        for (int d2 = -1; d2 <= 1; ++d2) {
          if ((d1 == 0 && d2 == 0) || a1 + d1 < 0 || alpha[1] + d2 < 0) continue;
          const Vec2 other = harmonic_umbilics(well, actions({a1 + d1, alpha[1] + d2}, h))[0];
          best = std::min(best, (other - s.umbilics[0]).norm());
        }
      e.nearest_spacing = best;
      e.spacing_estimate =
          (a1 == 0 || alpha[1] == 0)
              ? std::numeric_limits<double>::infinity()
              : h * std::sqrt(1.0 / (a1 * h) + 1.0 / (alpha[1] * h));
      out.push_back(std::move(e));
    }
  std::stable_sort(out.begin(), out.end(), [](const UmbilicEntry& a, const UmbilicEntry& b) {
    if (a.state.energy != b.state.energy) return a.state.energy < b.state.energy;
    return a.state.alpha < b.state.alpha;
  });
  return out;
}

double flatness_ratio(const TorusState& state, const WellData& well) {
  const double a = state.iota.x() * well.lambda2;
  const double b = state.iota.y() * well.lambda1;
  return std::min(a, b) / std::max(a, b);
}

FrequencyRatio frequency_ratio_quality(const WellData& well, int max_q) {
  FrequencyRatio best;
  best.defect = std::numeric_limits<double>::infinity();
  const double r = well.lambda1 / well.lambda2;
  for (int q = 1; q <= max_q; ++q) {
    const int p = static_cast<int>(std::lround(r * q));
    const double d = std::abs(q * well.lambda1 - p * well.lambda2);
    if (d < best.defect - 1e-15) best = {p, q, d};
  }
  return best;
}

}  // namespace tunnelkit
