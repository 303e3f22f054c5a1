#include "tunnelkit/reference.hpp"

#include "tunnelkit/error.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace tunnelkit {

GridSpec cell_grid(const Vec2& lo, const Vec2& hi, int n1, int n2) {
  GridSpec g;
  g.spacing = Vec2((hi.x() - lo.x()) / n1, (hi.y() - lo.y()) / n2);
  g.origin = lo + 0.5 * g.spacing;
  g.n1 = n1;
  g.n2 = n2;
  return g;
}

DiscreteOperator assemble(const PotentialModel& model, const GridSpec& grid, double h,
                          AxisCondition axis, const ReferenceOptions& opts) {
  DiscreteOperator op;
  op.h = h;
  op.axis = axis;
  op.grid = grid;
  if (axis != AxisCondition::Full) {
    const double face = grid.origin.x() + (grid.n1 / 2 - 0.5) * grid.spacing.x();
    if (grid.n1 % 2 != 0 || std::abs(face) > 1e-12 * (1.0 + grid.spacing.x()))
      throw Error(ErrorKind::ValidationError, "half-domain mode needs the axis on a cell face");
    op.grid.n1 = grid.n1 / 2;
  }
  const GridSpec& g = op.grid;
  const double cx = h * h / (g.spacing.x() * g.spacing.x());
  const double cy = h * h / (g.spacing.y() * g.spacing.y());
  double vmin_edge = std::numeric_limits<double>::infinity();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * g.size());
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i) {
      const auto k = static_cast<int>(g.index(i, j));
      const double v = model.value(g.node(i, j));
      const bool axis_side = axis != AxisCondition::Full && i == g.n1 - 1;
      if (i == 0 || j == 0 || j == g.n2 - 1 || (i == g.n1 - 1 && !axis_side))
        vmin_edge = std::min(vmin_edge, v);
      double diag = v + 2.0 * cx + 2.0 * cy;
      if (axis_side) diag += axis == AxisCondition::Neumann ? -cx : cx;
      trip.emplace_back(k, k, diag);
      if (i > 0) trip.emplace_back(k, static_cast<int>(g.index(i - 1, j)), -cx);
      if (i + 1 < g.n1) trip.emplace_back(k, static_cast<int>(g.index(i + 1, j)), -cx);
      if (j > 0) trip.emplace_back(k, static_cast<int>(g.index(i, j - 1)), -cy);
      if (j + 1 < g.n2) trip.emplace_back(k, static_cast<int>(g.index(i, j + 1)), -cy);
    }
  if (vmin_edge < opts.E_max + opts.margin)
    throw Error(ErrorKind::BoxTooSmall, "V on the box boundary drops to " +
                                            std::to_string(vmin_edge) + " < E_max + margin");
  op.matrix.resize(static_cast<int>(g.size()), static_cast<int>(g.size()));
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  return op;
}

std::vector<EigenPair> lowest_eigenpairs(const DiscreteOperator& op, int k,
                                         const ReferenceOptions& opts) {
  if (k < 1 || k > 32) throw Error(ErrorKind::ValidationError, "k must lie in [1, 32]");
  const auto& A = op.matrix;
  const int n = A.rows();
  const int m = std::min(n, k + std::max(k, 8));
  // Shift just below the spectrum: A >= min V.
  const double hh = op.h * op.h;
  const double sigma = A.diagonal().minCoeff() - 2.0 * hh / std::pow(op.grid.spacing.x(), 2) -
                       2.0 * hh / std::pow(op.grid.spacing.y(), 2) - 1e-3;
  Eigen::SparseMatrix<double> S = A;
  for (int i = 0; i < n; ++i) S.coeffRef(i, i) -= sigma;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(S);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::NoConvergence, "sparse factorization failed");

  std::mt19937 rng(opts.seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd X(n, m);
  for (int c = 0; c < m; ++c)
    for (int r = 0; r < n; ++r) X(r, c) = gauss(rng);
  std::vector<EigenPair> out(k);
  double worst = 0.0;
  for (int it = 0; it < opts.max_iter; ++it) {
    Eigen::MatrixXd Y = solver.solve(X);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
    const Eigen::MatrixXd AQ = A * Q;
    const Eigen::MatrixXd H = Q.transpose() * AQ;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()));
    X = Q * es.eigenvectors();
    const Eigen::MatrixXd AX = AQ * es.eigenvectors();
    worst = 0.0;
    for (int i = 0; i < k; ++i) {
      const double res = (AX.col(i) - es.eigenvalues()(i) * X.col(i)).norm();
      out[i] = {es.eigenvalues()(i), X.col(i), res};
      worst = std::max(worst, res);
    }
    if (worst <= opts.tol_eig) return out;
  }
  throw Error(ErrorKind::NoConvergence, "subspace iteration stalled at residual " +
                                            std::to_string(worst) + " after " +
                                            std::to_string(opts.max_iter) + " iterations");
}

DoubletResult doublet_splitting(const PotentialModel& model, const Vec2& lo, const Vec2& hi,
                                int n1, int n2, double h, int index,
                                const ReferenceOptions& opts) {
  const double dmax = std::sqrt(h) / opts.points_per_sqrt_h;
  auto refine = [&](int n, double len) {
    while (len / n > dmax) n += 16;
    return n;
  };
  n1 = refine(n1, hi.x() - lo.x());
  n2 = refine(n2, hi.y() - lo.y());
  if (n1 % 2) ++n1;
  const GridSpec g = cell_grid(lo, hi, n1, n2);
  const int k = index + 2;
  const auto sym = lowest_eigenpairs(assemble(model, g, h, AxisCondition::Neumann, opts), k, opts);
  const auto anti =
      lowest_eigenpairs(assemble(model, g, h, AxisCondition::Dirichlet, opts), k, opts);
  DoubletResult r;
  r.n1 = n1;
  r.n2 = n2;
  r.E_sym = sym[index].value;
  r.E_anti = anti[index].value;
  r.delta = r.E_anti - r.E_sym;
  r.residual_sym = sym[index].residual;
  r.residual_anti = anti[index].residual;
  r.gap_to_next = std::numeric_limits<double>::infinity();
  const double lo_pair = std::min(r.E_sym, r.E_anti), hi_pair = std::max(r.E_sym, r.E_anti);
  for (const auto* spec : {&sym, &anti})
    for (int i = 0; i < k; ++i) {
      if (i == index) continue;
      const double e = (*spec)[i].value;
      r.gap_to_next = std::min(r.gap_to_next, e > hi_pair ? e - hi_pair : lo_pair - e);
    }
  if (r.gap_to_next < 10.0 * std::abs(r.delta))
    throw Error(ErrorKind::GapViolation, "doublet gap " + std::to_string(r.gap_to_next) +
                                             " < 10 |delta| = " + std::to_string(10 * std::abs(r.delta)));
  return r;
}

}  // namespace tunnelkit
