#include <doctest.h>

#include "tunnelkit/error.hpp"
#include "tunnelkit/reference.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <cmath>

using namespace tunnelkit;

namespace {

PotentialModel quartic() {
  return PotentialModel({{0.25, 4, 0}, {-0.5, 2, 0}, {0.25, 0, 0}, {1.0, 0, 2}});
}

double v1(double x) { return 0.25 * (x * x - 1) * (x * x - 1); }

}  // namespace

TEST_CASE("constant potential: spectrum lies above the constant") {
  PotentialModel c({{0.7, 0, 0}});
  ReferenceOptions o;
  o.margin = 0.0;
  auto op = assemble(c, cell_grid({-1, -1}, {1, 1}, 24, 24), 0.1, AxisCondition::Full, o);
  auto ev = lowest_eigenpairs(op, 3, o);
  for (const auto& e : ev) CHECK(e.value >= 0.7);
}

TEST_CASE("operator is exactly symmetric") {
  auto op = assemble(quartic(), cell_grid({-2.2, -1.6}, {2.2, 1.6}, 32, 24), 0.1,
                     AxisCondition::Neumann);
  const Eigen::SparseMatrix<double> At = op.matrix.transpose();
  CHECK((op.matrix - At).norm() == 0.0);
}

TEST_CASE("harmonic spectrum at 256 x 256") {
  PotentialModel v({{1.0, 2, 0}, {2.0, 0, 2}});
  const double h = 0.05, l2 = std::sqrt(2.0);
  ReferenceOptions o;
  o.E_max = 0.5;
  auto op = assemble(v, cell_grid({-1.5, -1.5}, {1.5, 1.5}, 256, 256), h, AxisCondition::Full, o);
  auto ev = lowest_eigenpairs(op, 5, o);
  std::vector<double> exact;
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) exact.push_back(h * ((2 * a + 1) + l2 * (2 * b + 1)));
  std::sort(exact.begin(), exact.end());
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(ev[i].value / exact[i] - 1.0) <= 1e-3);
    CHECK(ev[i].residual <= o.tol_eig);
  }
  // Orthonormal eigenvectors.
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(std::abs(ev[i].vector.dot(ev[j].vector) - (i == j)) <= 1e-8);
}

TEST_CASE("second-order convergence under refinement") {
  PotentialModel v({{1.0, 2, 0}, {2.0, 0, 2}});
  const double h = 0.1, exact = h * (1 + std::sqrt(2.0));
  auto err = [&](int n) {
    auto op = assemble(v, cell_grid({-2, -2}, {2, 2}, n, n), h, AxisCondition::Full);
    return std::abs(lowest_eigenpairs(op, 1)[0].value - exact);
  };
  const double ratio = err(48) / err(96);
  MESSAGE("error ratio " << ratio);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("half-domain spectra union to the full spectrum") {
  auto v = quartic();
  const GridSpec g = cell_grid({-2.2, -1.6}, {2.2, 1.6}, 40, 28);
  const double h = 0.2;
  ReferenceOptions o;
  o.tol_eig = 1e-10;
  auto full = lowest_eigenpairs(assemble(v, g, h, AxisCondition::Full, o), 6, o);
  auto n = lowest_eigenpairs(assemble(v, g, h, AxisCondition::Neumann, o), 6, o);
  auto d = lowest_eigenpairs(assemble(v, g, h, AxisCondition::Dirichlet, o), 6, o);
  std::vector<double> merged;
  for (const auto& e : n) merged.push_back(e.value);
  for (const auto& e : d) merged.push_back(e.value);
  std::sort(merged.begin(), merged.end());
  for (int i = 0; i < 6; ++i) CHECK(std::abs(full[i].value - merged[i]) <= 2 * o.tol_eig);
}

TEST_CASE("ground doublet of the separable double well") {
  auto v = quartic();
  const double h = 0.05;
  auto r = doublet_splitting(v, {-2.2, -1.6}, {2.2, 1.6}, 64, 48, h);
  CHECK(r.E_sym <= r.E_anti);
  CHECK(r.delta > 0.0);
  CHECK(r.residual_sym <= 1e-8);
  CHECK(r.gap_to_next >= 10 * r.delta);
  // The x2 factor separates: delta is the 1-D splitting of -h^2 d^2 + V1.
  const double d1 = fd_level(h, v1, -3.0, 3.0, 1) - fd_level(h, v1, -3.0, 3.0, 0);
  MESSAGE("delta 2-D " << r.delta << ", 1-D " << d1);
  CHECK(std::log(r.delta) == doctest::Approx(std::log(d1)).epsilon(0.05));
}

TEST_CASE("boundary and gap guards") {
  auto v = quartic();
  ReferenceOptions o;
  o.E_max = 0.2;
  CHECK_THROWS_AS(assemble(v, cell_grid({-1.2, -0.5}, {1.2, 0.5}, 24, 16), 0.05,
                           AxisCondition::Full, o),
                  Error);
  // A barrier far below the levels: the doublet is not isolated.
  PotentialModel shallow({{0.25, 4, 0}, {-0.5, 2, 0}, {0.25, 0, 0}, {1.0, 0, 2}});
  try {
    doublet_splitting(shallow, {-2.2, -1.6}, {2.2, 1.6}, 32, 32, 0.6);
    FAIL("expected GapViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GapViolation);
  }
}
