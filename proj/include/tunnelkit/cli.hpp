#pragma once

#include "tunnelkit/error.hpp"
#include "tunnelkit/potential.hpp"
#include "tunnelkit/spectrum.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace tunnelkit {

struct Tolerances {
  double tol_contour = 1e-10;
  double tol_shell = 1e-6;
  double tol_cycle = 1e-4;
  double tol_eig = 1e-8;
  double tol_transport = 1e-3;
  double tol_fit = 1e-6;
};

/// Effective configuration of a run. Sections of the config file:
///   [potential] term = c a b (repeatable: c x1^a x2^b), seed = x1 x2
///   [grid]      lo = x1 x2, hi = x1 x2, n1, n2 (cells, 16 * 2^k)
///   [run]       h = list, E0, E, alpha = a1,a2, out
///   [tolerances] tol_contour, tol_shell, tol_cycle, tol_eig, tol_transport, tol_fit
///   [flags]     project_umbilics, with_reference
struct RunConfig {
  std::vector<Monomial> terms;
  Vec2 well_seed{0.8, 0.1};
  Vec2 grid_lo{-2.0, -1.5};
  Vec2 grid_hi{2.0, 1.5};
  int n1 = 256;
  int n2 = 256;
  std::vector<double> h_values;  // sorted descending
  double E0 = 0.3;
  double E = 0.05;  // energy for agmon, geodesic
  Index2 alpha{0, 0};
  Tolerances tol;
  bool project_umbilics = true;
  bool with_reference = false;
  std::string out_dir = "out";
  std::vector<std::string> warnings;

  PotentialModel model() const { return PotentialModel(terms); }
  /// The configuration in its own file syntax, every key explicit.
  std::string echo() const;
};

/// Throws ParseError (with line and column) on malformed input and
/// ValidationError (naming the key) on unknown keys or invalid values.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

/// Runs one subcommand (spectrum, agmon, geodesic, cycles, splitting, series,
/// verify, sweep), writing its files to cfg.out_dir. Errors are reported as a
/// JSON record on `err` and in out_dir/error.json. Returns 0 on success, 2 for
/// configuration errors, 3 for numerical failures, 4 for gap violations.
int run(const std::string& subcommand, const RunConfig& cfg, std::ostream& log, std::ostream& err);

/// Exit code for an error kind.
int exit_code(ErrorKind kind);

}  // namespace tunnelkit
