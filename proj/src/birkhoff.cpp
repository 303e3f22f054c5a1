#include "tunnelkit/error.hpp"
#include "tunnelkit/spectrum.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <utility>

namespace tunnelkit {

namespace {

using cplx = std::complex<double>;
// Exponents of (z1, z2, w1, w2).
using Exp = std::array<int, 4>;
using Poly = std::map<Exp, cplx>;

void add_to(Poly& acc, const Poly& p, cplx scale = 1.0) {
  for (const auto& [e, c] : p) acc[e] += scale * c;
}

Poly multiply(const Poly& p, const Poly& q) {
  Poly r;
  for (const auto& [e1, c1] : p)
    for (const auto& [e2, c2] : q) {
      Exp e;
      for (int k = 0; k < 4; ++k) e[k] = e1[k] + e2[k];
      r[e] += c1 * c2;
    }
  return r;
}

Poly derivative(const Poly& p, int var) {
  Poly r;
  for (const auto& [e, c] : p) {
    if (e[var] == 0) continue;
    Exp d = e;
    d[var] -= 1;
    r[d] += c * static_cast<double>(e[var]);
  }
  return r;
}

// {f, g} with {z_j, w_j} = -i.
Poly bracket(const Poly& f, const Poly& g) {
  Poly r;
  for (int j = 0; j < 2; ++j) {
    add_to(r, multiply(derivative(f, j), derivative(g, j + 2)), cplx(0, -1));
    add_to(r, multiply(derivative(f, j + 2), derivative(g, j)), cplx(0, 1));
  }
  return r;
}

// Constant term of f P^3 g, P = -i sum_j (dz_j <- -> dw_j - dw_j <- -> dz_j).
cplx bivector_cubed_constant(const Poly& f, const Poly& g) {
  struct Term {
    Poly left, right;
    cplx coeff;
  };
  std::vector<Term> terms{{f, g, 1.0}};
  for (int step = 0; step < 3; ++step) {
    std::vector<Term> next;
    for (const auto& t : terms)
      for (int j = 0; j < 2; ++j) {
        next.push_back({derivative(t.left, j), derivative(t.right, j + 2), t.coeff * cplx(0, -1)});
        next.push_back({derivative(t.left, j + 2), derivative(t.right, j), t.coeff * cplx(0, 1)});
      }
    terms = std::move(next);
  }
  cplx total = 0.0;
  const Exp zero{0, 0, 0, 0};
  for (const auto& t : terms) {
    auto a = t.left.find(zero);
    auto b = t.right.find(zero);
    if (a != t.left.end() && b != t.right.end()) total += t.coeff * a->second * b->second;
  }
  return total;
}

// Homogeneous part of V(center + axes u) of the given degree, with
// u_j = (z_j + w_j) / sqrt(2 lambda_j).
Poly complexify(const PotentialModel& local, int degree, const Vec2& lambda) {
  Poly u[2];
  for (int j = 0; j < 2; ++j) {
    const double s = 1.0 / std::sqrt(2.0 * lambda(j));
    Exp ez{0, 0, 0, 0}, ew{0, 0, 0, 0};
    ez[j] = 1;
    ew[j + 2] = 1;
    u[j][ez] = s;
    u[j][ew] = s;
  }
  Poly out;
  for (const auto& t : local.terms()) {
    if (t.a + t.b != degree) continue;
    Poly m{{Exp{0, 0, 0, 0}, 1.0}};
    for (int k = 0; k < t.a; ++k) m = multiply(m, u[0]);
    for (int k = 0; k < t.b; ++k) m = multiply(m, u[1]);
    add_to(out, m, t.coefficient);
  }
  return out;
}

double omega_dot(const Exp& e, const Vec2& omega) {
  return omega(0) * (e[0] - e[2]) + omega(1) * (e[1] - e[3]);
}

bool resonant(const Exp& e) { return e[0] == e[2] && e[1] == e[3]; }

}  // namespace

NormalForm birkhoff_quartic(const PotentialModel& model, const WellData& well,
                            const BirkhoffOptions& opts) {
  const PotentialModel local = model.substituted(well.center, well.axes);
  const Vec2 lambda(well.lambda1, well.lambda2);
  const Vec2 omega = 2.0 * lambda;

  double scale = 0.0;
  for (const auto& t : local.terms()) scale = std::max(scale, std::abs(t.coefficient));
  const double tiny = 1e-13 * std::max(scale, 1.0);

  const Poly H3 = complexify(local, 3, lambda);
  const Poly H4 = complexify(local, 4, lambda);

  // Generator removing every cubic term: {H2, chi} = -H3.
  Poly chi3;
  for (const auto& [e, c] : H3) {
    if (std::abs(c) <= tiny) continue;
    const double den = omega_dot(e, omega);
    if (std::abs(den) < opts.tol_resonance)
      throw Error(ErrorKind::ResonanceError,
                  "cubic term with small denominator " + std::to_string(den));
    chi3[e] = cplx(0, 1) * c / den;
  }

  Poly H4p = H4;
  add_to(H4p, bracket(H3, chi3), 0.5);

  NormalForm nf;
  nf.linear = omega;
  for (const auto& [e, c] : H4p) {
    if (std::abs(c) <= tiny) continue;
    if (resonant(e)) {
      // z1^k1 z2^k2 w1^k1 w2^k2 = iota1^k1 iota2^k2
      if (e[0] == 2) nf.quadratic(0, 0) += c.real();
      else if (e[1] == 2) nf.quadratic(1, 1) += c.real();
      else {
        nf.quadratic(0, 1) += 0.5 * c.real();
        nf.quadratic(1, 0) += 0.5 * c.real();
      }
    } else if (std::abs(omega_dot(e, omega)) < opts.tol_resonance) {
      throw Error(ErrorKind::ResonanceError,
                  "quartic term with small denominator " + std::to_string(omega_dot(e, omega)));
    }
  }

  // Weyl-quantized constants: the Moyal correction to 1/2 {H3, chi3} and the
  // ordering constant of iota_j^2 (Op(iota^2) = Op(iota)^2 + h^2/4).
  const cplx moyal = -bivector_cubed_constant(H3, chi3) / 48.0;
  nf.quantum_h2 = moyal.real() + 0.25 * (nf.quadratic(0, 0) + nf.quadratic(1, 1));
  return nf;
}

}  // namespace tunnelkit
