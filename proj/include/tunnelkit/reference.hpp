#pragma once

#include "tunnelkit/grid.hpp"
#include "tunnelkit/potential.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace tunnelkit {

/// Full box, or the half x1 < 0 with a condition on the symmetry axis.
enum class AxisCondition { Full, Neumann, Dirichlet };

/// Cell-centred grid of n1 x n2 cells on [lo, hi]: nodes at cell centres, the
/// outer Dirichlet condition on the box faces. With lo.x = -hi.x and n1 even the
/// axis x1 = 0 is a cell face.
GridSpec cell_grid(const Vec2& lo, const Vec2& hi, int n1, int n2);

struct DiscreteOperator {
  GridSpec grid;      // nodes carrying unknowns (the left half in half-domain mode)
  double h = 0.0;
  AxisCondition axis = AxisCondition::Full;
  Eigen::SparseMatrix<double> matrix;  // -h^2 (5-point Laplacian) + diag V
};

struct ReferenceOptions {
  double tol_eig = 1e-8;   // eigen-residual bound, relative to |v| = 1
  int max_iter = 400;
  double E_max = 0.0;      // highest energy of interest
  double margin = 0.5;     // V on the box boundary must exceed E_max + margin
  double points_per_sqrt_h = 8.0;  // preflight: spacing <= sqrt(h) / this
  unsigned seed = 12345;
};

/// Assembles -h^2 Delta + V on `grid` (cell-centred, see cell_grid). Half-domain
/// modes keep the columns with x1 < 0; the axis ghost is +u (Neumann) or -u
/// (Dirichlet), the outer ghost is 0. Throws BoxTooSmall if V on the outer
/// nodes is below E_max + margin.
DiscreteOperator assemble(const PotentialModel& model, const GridSpec& grid, double h,
                          AxisCondition axis, const ReferenceOptions& opts = {});

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXd vector;
  double residual = 0.0;
};

/// The k lowest eigenpairs by shift-invert subspace iteration with
/// Rayleigh-Ritz (sparse LDLT factorization). Throws NoConvergence.
std::vector<EigenPair> lowest_eigenpairs(const DiscreteOperator& op, int k,
                                         const ReferenceOptions& opts = {});

struct DoubletResult {
  double E_sym = 0.0;   // Neumann on the axis
  double E_anti = 0.0;  // Dirichlet on the axis
  double delta = 0.0;   // E_anti - E_sym
  double residual_sym = 0.0, residual_anti = 0.0;
  double gap_to_next = 0.0;
  int n1 = 0, n2 = 0;   // full-box cells actually used
};

/// Doublet `index` (0 = ground) of a mirror-symmetric model from the two
/// half-domain problems on the box [lo, hi] (lo.x = -hi.x). The cell count is
/// raised from (n1, n2) in multiples of 16 until the spacing meets the
/// preflight bound. Throws GapViolation if the nearest other level is closer
/// than 10 |delta|.
DoubletResult doublet_splitting(const PotentialModel& model, const Vec2& lo, const Vec2& hi,
                                int n1, int n2, double h, int index = 0,
                                const ReferenceOptions& opts = {});

}  // namespace tunnelkit
