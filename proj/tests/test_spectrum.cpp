#include <doctest.h>

#include "tunnelkit/error.hpp"
#include "tunnelkit/spectrum.hpp"

#include "oracles.hpp"

#include <Eigen/Dense>

#include <cmath>

using namespace tunnelkit;

namespace {

WellData centred_well(const PotentialModel& v) { return analyze_well(v, Vec2::Zero(), Side::Right); }

// Lowest eigenvalues of -h^2 d^2/du^2 + u^2 + c3 u^3 + c4 u^4 in a truncated
// Hermite basis; position powers are formed before truncation.
Eigen::VectorXd anharmonic_levels(double h, double c3, double c4, int n = 160) {
  const int m = n + 8;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k + 1 < m; ++k) X(k, k + 1) = X(k + 1, k) = std::sqrt(h / 2.0 * (k + 1));
  const Eigen::MatrixXd X2 = X * X, X3 = X2 * X, X4 = X2 * X2;
  Eigen::MatrixXd H = c3 * X3.topLeftCorner(n, n) + c4 * X4.topLeftCorner(n, n);
  for (int k = 0; k < n; ++k) H(k, k) += h * (2 * k + 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  return es.eigenvalues();
}


}  // namespace

TEST_CASE("EBK energies") {
  PotentialModel v({{1, 2, 0}, {2, 0, 2}});  // lambda = (1, sqrt 2)
  auto w = centred_well(v);
  CHECK(ebk_energy(w, {0, 0}, 0.01) == doctest::Approx(0.01 * (1 + std::sqrt(2.0))));
  PotentialModel iso({{1, 2, 0}, {1, 0, 2}});
  auto wi = centred_well(iso);
  CHECK(ebk_energy(wi, {3, 0}, 0.01) == doctest::Approx(0.08));
  // Linearity in each index.
  for (int a1 = 0; a1 < 4; ++a1)
    for (int a2 = 0; a2 < 4; ++a2) {
      CHECK(ebk_energy(w, {a1 + 1, a2}, 0.03) - ebk_energy(w, {a1, a2}, 0.03) ==
            doctest::Approx(2 * w.lambda1 * 0.03).epsilon(1e-12));
      CHECK(ebk_energy(w, {a1, a2 + 1}, 0.03) - ebk_energy(w, {a1, a2}, 0.03) ==
            doctest::Approx(2 * w.lambda2 * 0.03).epsilon(1e-12));
    }
}

TEST_CASE("spectral series counting, order and bound") {
  PotentialModel iso({{1, 2, 0}, {1, 0, 2}});
  auto w = centred_well(iso);
  auto s = spectral_series(w, 0.1, 0.5);
  CHECK(s.size() == 21);
  for (std::size_t k = 1; k < s.size(); ++k) CHECK(s[k - 1].energy <= s[k].energy);
  for (const auto& t : s) {
    CHECK(t.energy <= 2 * w.lambda_max() * (0.5 + 0.1) + 1e-12);
    CHECK(t.energy >= 0.1 * (w.lambda1 + w.lambda2) - 1e-12);
    CHECK(t.iota.x() == doctest::Approx((t.alpha[0] + 0.5) * 0.1));
  }
  // Every state at h survives at h/2 (index doubled).
  auto fine = spectral_series(w, 0.05, 0.5);
  for (const auto& t : s) {
    bool found = false;
    for (const auto& f : fine) found |= (f.alpha[0] == 2 * t.alpha[0] && f.alpha[1] == 2 * t.alpha[1]);
    CHECK(found);
  }
  CHECK_THROWS_AS(spectral_series(w, 0.1, 0.1), Error);
}

TEST_CASE("umbilic lattice") {
  PotentialModel iso({{1, 2, 0}, {1, 0, 2}});
  auto w = centred_well(iso);
  auto lat = umbilic_lattice(iso, w, 0.02, 0.35, 0.37, false);
  bool seen = false;
  for (const auto& e : lat) {
    if (e.state.alpha != Index2{4, 4}) continue;
    seen = true;
    CHECK(e.state.umbilics[0].x() == doctest::Approx(std::sqrt(0.18)));
    CHECK(e.state.umbilics[0].y() == doctest::Approx(std::sqrt(0.18)));
    // Four sign flips of the same point.
    for (const auto& u : e.state.umbilics) {
      CHECK(std::abs(u.x()) == doctest::Approx(std::sqrt(0.18)));
      CHECK(std::abs(u.y()) == doctest::Approx(std::sqrt(0.18)));
    }
    // The umbilic spacing estimate is an order of magnitude: the diagonal
    // neighbour distance sits within 30% of estimate / sqrt 2, the axial one
    // within a factor 3 of the estimate.
    const Vec2 y44 = e.state.umbilics[0];
    const Vec2 y54 = harmonic_umbilics(w, actions({5, 4}, 0.02))[0];
    const Vec2 y55 = harmonic_umbilics(w, actions({5, 5}, 0.02))[0];
    const double est = e.spacing_estimate;
    CHECK(est == doctest::Approx(0.1));
    CHECK(std::abs((y55 - y44).norm() / (est / std::sqrt(2.0)) - 1.0) <= 0.3);
    CHECK((y54 - y44).norm() > est / 3);
    CHECK((y54 - y44).norm() < est * 3);
  }
  CHECK(seen);

  // Quartic double well: harmonic umbilics are O(E^2) off the level set.
  PotentialModel q({{0.25, 4, 0}, {-0.5, 2, 0}, {0.25, 0, 0}, {1, 0, 2}});
  auto [l, r] = find_wells(q, {0.8, 0.1});
  for (const auto& e : umbilic_lattice(q, r, 0.01, 0.0, 0.05, false))
    for (const auto& x : e.world) CHECK(std::abs(q.value(x) - e.state.energy) <= 0.2 * e.state.energy);
  for (const auto& e : umbilic_lattice(q, r, 0.01, 0.0, 0.1, true))
    for (const auto& x : e.world) CHECK(std::abs(q.value(x) - e.state.energy) <= 1e-12);
}

TEST_CASE("flatness ratio") {
  PotentialModel iso({{1, 2, 0}, {1, 0, 2}});
  auto w = centred_well(iso);
  CHECK(flatness_ratio(make_state(w, {3, 3}, 0.1), w) == doctest::Approx(1.0));
  CHECK(flatness_ratio(make_state(w, {9, 0}, 0.1), w) == doctest::Approx(0.5 / 9.5));
  double prev = 0.0;
  for (int a2 = 0; a2 <= 9; ++a2) {
    const double r = flatness_ratio(make_state(w, {9, a2}, 0.1), w);
    CHECK(r >= prev);
    prev = r;
  }
}

TEST_CASE("quadratic potential has a trivial normal form") {
  PotentialModel v({{1, 2, 0}, {2, 0, 2}});
  auto nf = birkhoff_quartic(v, centred_well(v));
  CHECK(nf.quadratic.norm() == 0.0);
  CHECK(nf.quantum_h2 == 0.0);
  CHECK(nf.linear(0) == doctest::Approx(2.0));
}

TEST_CASE("pure quartic anharmonicity matches the 1-D spectrum to order h^2") {
  const double beta = 0.3;
  PotentialModel v({{1, 2, 0}, {beta, 4, 0}, {1, 0, 2}});
  auto w = centred_well(v);
  auto nf = birkhoff_quartic(v, w);
  CHECK(nf.quadratic(0, 0) == doctest::Approx(1.5 * beta));
  for (int n = 0; n < 3; ++n) {
    auto coeff = [&](double h) {
      const double exact = anharmonic_levels(h, 0.0, beta)(n) + h;  // + x2 ground energy
      return (exact - ebk_energy(w, {n, 0}, h)) / (h * h);
    };
    const double rich = 2 * coeff(0.025) - coeff(0.05);
    const Vec2 iota = actions({n, 0}, 1.0);
    const double predicted = nf.energy(iota, 1.0) - nf.linear.dot(iota);
    CHECK(rich == doctest::Approx(predicted).epsilon(0.05));
  }
}

TEST_CASE("cubic anharmonicity needs the Weyl constant") {
  // Quartic double well seen from its right minimum: u^2 + u^3 + u^4/4.
  PotentialModel q({{0.25, 4, 0}, {-0.5, 2, 0}, {0.25, 0, 0}, {1, 0, 2}});
  auto [l, r] = find_wells(q, {0.8, 0.1});
  auto nf = birkhoff_quartic(q, r);
  for (int n = 0; n < 3; ++n) {
    auto coeff = [&](double h) {
      // One well of the 1-D double well; the wall at x1 = 0 costs e^{-1/(3h)}.
      auto V1 = [](double x) { return 0.25 * (x * x - 1) * (x * x - 1); };
      const double exact = fd_level(h, V1, 0.0, 3.0, n) + h;
      return (exact - ebk_energy(r, {n, 0}, h)) / (h * h);
    };
    const double rich = 2 * coeff(0.0125) - coeff(0.025);
    const Vec2 iota = actions({n, 0}, 1.0);
    const double predicted = nf.energy(iota, 1.0) - nf.linear.dot(iota);
    CHECK(rich == doctest::Approx(predicted).epsilon(0.05));
  }
}

TEST_CASE("normal form is invariant under rotation of the input coordinates") {
  PotentialModel v({{1, 2, 0}, {2.3, 0, 2}, {0.3, 3, 0}, {0.2, 1, 2}, {0.1, 4, 0}, {0.05, 2, 2}});
  const double th = 0.5;
  Mat2 R;
  R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  PotentialModel rotated = v.substituted(Vec2::Zero(), R.transpose());
  auto a = birkhoff_quartic(v, centred_well(v));
  auto b = birkhoff_quartic(rotated, centred_well(rotated));
  CHECK((a.quadratic - b.quadratic).norm() <= 1e-10);
  CHECK(a.quantum_h2 == doctest::Approx(b.quantum_h2).epsilon(1e-10));
  CHECK((a.linear - b.linear).norm() <= 1e-12);
}

TEST_CASE("2:1 resonance with a coupling cubic term is rejected") {
  // lambda = (2, 1) and x1 x2^2 couples exactly at the resonance.
  PotentialModel v({{4, 2, 0}, {1, 0, 2}, {0.2, 1, 2}});
  try {
    birkhoff_quartic(v, centred_well(v));
    FAIL("expected ResonanceError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ResonanceError);
  }
  // The same frequencies without coupling are fine.
  PotentialModel sep({{4, 2, 0}, {1, 0, 2}, {0.2, 4, 0}});
  CHECK_NOTHROW(birkhoff_quartic(sep, centred_well(sep)));
}
