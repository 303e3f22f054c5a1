#pragma once

#include "tunnelkit/potential.hpp"

#include <array>
#include <vector>

namespace tunnelkit {

using Index2 = std::array<int, 2>;

/// One quantized torus of a single well.
struct TorusState {
  Index2 alpha{0, 0};
  double h = 0.0;
  Index2 maslov{2, 2};
  Vec2 iota = Vec2::Zero();  // (alpha + maslov/4) h
  double energy = 0.0;       // linear EBK energy 2 lambda . iota
  double energy_quartic = 0.0;  // with the order-4 normal-form terms (NaN if not computed)
  /// Umbilics in well-centred principal coordinates, quadrants (+,+), (-,+), (-,-), (+,-).
  std::array<Vec2, 4> umbilics{};

  int total() const { return alpha[0] + alpha[1]; }
};

/// H(iota) = linear . iota + iota^T quadratic iota + quantum_h2 * h^2.
///
/// `quantum_h2` is the constant picked up when the normal form is quantized in
/// the Weyl calculus; it is what makes the h^2 coefficient of E_alpha exact.
struct NormalForm {
  Vec2 linear = Vec2::Zero();
  Mat2 quadratic = Mat2::Zero();
  double quantum_h2 = 0.0;

  double energy(const Vec2& iota, double h) const {
    return linear.dot(iota) + iota.dot(quadratic * iota) + quantum_h2 * h * h;
  }
};

Vec2 actions(const Index2& alpha, double h);

/// Linear EBK energy 2 lambda1 iota1 + 2 lambda2 iota2.
double ebk_energy(const WellData& well, const Index2& alpha, double h);

/// Harmonic umbilics y_j = sqrt(2 iota_j / lambda_j), four sign choices.
std::array<Vec2, 4> harmonic_umbilics(const WellData& well, const Vec2& iota);

TorusState make_state(const WellData& well, const Index2& alpha, double h);

/// All alpha with |alpha| h <= E0, sorted by energy (ties by alpha).
/// Throws EmptySeries when the ground energy already exceeds E0.
std::vector<TorusState> spectral_series(const WellData& well, double h, double E0);

struct BirkhoffOptions {
  double tol_resonance = 1e-3;
};

/// Order-4 Birkhoff normal form of p = xi^2 + V at the well.
/// Throws ResonanceError if a term that must be removed has a denominator
/// |k . omega| < tol_resonance.
NormalForm birkhoff_quartic(const PotentialModel& model, const WellData& well,
                            const BirkhoffOptions& opts = {});

/// Fills energy_quartic of each state from the normal form.
void apply_normal_form(const NormalForm& nf, std::vector<TorusState>& states);

struct UmbilicEntry {
  TorusState state;
  std::array<Vec2, 4> world;    // umbilics in x coordinates (projected if requested)
  double nearest_spacing = 0.0;  // to the nearest lattice neighbour, first quadrant
  double spacing_estimate = 0.0;  // h ((a1 h)^-1 + (a2 h)^-1)^(1/2); inf when a component is 0
};

/// Umbilics of every state with E_alpha in [E_lo, E_hi]. With `project` the
/// harmonic points are moved radially onto the true {V = E_alpha}.
std::vector<UmbilicEntry> umbilic_lattice(const PotentialModel& model, const WellData& well,
                                          double h, double E_lo, double E_hi,
                                          bool project = true);

/// min(iota1 lambda2, iota2 lambda1) / max(...), 1 for a square torus.
double flatness_ratio(const TorusState& state, const WellData& well);

/// Best rational approximation p/q of lambda1/lambda2 with q <= max_q, and the
/// defect |q lambda1 - p lambda2|. Reported only; no cutoff is enforced.
struct FrequencyRatio {
  int p = 0;
  int q = 1;
  double defect = 0.0;
};
FrequencyRatio frequency_ratio_quality(const WellData& well, int max_q = 10);

}  // namespace tunnelkit
