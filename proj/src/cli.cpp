#include "tunnelkit/cli.hpp"

#include "tunnelkit/agmon.hpp"
#include "tunnelkit/reference.hpp"
#include "tunnelkit/tunneling.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>

namespace tunnelkit {

namespace {

namespace fs = std::filesystem;

constexpr const char* kSchema = "# tunnelkit-csv v1";

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : "null"; }

class Csv {
 public:
  Csv(const fs::path& path, const std::string& table, const std::vector<std::string>& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw Error(ErrorKind::ValidationError, "key 'out': cannot write " + path.string());
    out_ << kSchema << " " << table << "\n";
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

std::string join(const std::vector<std::string>& v, char sep) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? std::string(1, sep) : "") + v[k];
  return s;
}

std::string row_flags(const SplittingEstimate& e) {
  auto f = e.flags;
  if (!e.ok()) f.push_back("error-" + e.error);
  return join(f, ';');
}

std::vector<std::string> series_cells(const SplittingEstimate& e) {
  const bool ok = e.ok();
  return {std::to_string(e.alpha[0]),
          std::to_string(e.alpha[1]),
          num(e.E_center),
          ok ? num(e.S0) : "null",
          ok ? num(e.delta_herring) : "null",
          ok ? num(e.delta_stationary) : "null",
          opt(e.delta_reference),
          ok ? num(e.x_E.x()) : "null",
          ok ? num(e.x_E.y()) : "null",
          row_flags(e)};
}

const std::vector<std::string> kSeriesHeader = {"alpha1", "alpha2", "E", "S0", "dE_herring",
                                                "dE_stationary", "dE_reference", "xE_1", "xE_2",
                                                "flags"};

struct Context {
  const RunConfig& cfg;
  PotentialModel model;
  WellData left, right;
  fs::path out;
  std::ostream& log;
};

GridSpec node_grid(const RunConfig& cfg) {
  return GridSpec::covering(cfg.grid_lo, cfg.grid_hi, cfg.n1 + 1, cfg.n2 + 1);
}

AgmonOptions agmon_options(const RunConfig& cfg) {
  AgmonOptions o;
  o.contour.tol_contour = cfg.tol.tol_contour;
  return o;
}

SeriesOptions series_options(const RunConfig& cfg) {
  SeriesOptions o;
  o.chart.flow.tol_shell = cfg.tol.tol_shell;
  o.with_reference = cfg.with_reference;
  o.box_lo = cfg.grid_lo;
  o.box_hi = cfg.grid_hi;
  o.ref_n1 = cfg.n1;
  o.ref_n2 = cfg.n2;
  o.reference.tol_eig = cfg.tol.tol_eig;
  o.tol_transport = cfg.tol.tol_transport;
  return o;
}

void write_pgm(const fs::path& path, const ScalarField2D& f) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : f.values)
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  const double span = hi > lo ? hi - lo : 1.0;
  std::ofstream out(path, std::ios::binary);
  out << "P5\n" << f.grid.n1 << " " << f.grid.n2 << "\n255\n";
  // Top row is the largest x2.
  for (int j = f.grid.n2 - 1; j >= 0; --j)
    for (int i = 0; i < f.grid.n1; ++i) {
      const double v = f.at(i, j);
      const int p = std::isfinite(v) ? static_cast<int>(std::lround(255.0 * (v - lo) / span)) : 255;
      out.put(static_cast<char>(std::clamp(p, 0, 255)));
    }
  std::ofstream side(path.string() + ".txt", std::ios::binary);
  side << "min = " << num(lo) << "\nmax = " << num(hi) << "\n"
       << "pixel = round(255 (d - min) / (max - min)); non-finite values are 255\n"
       << "rows run from x2 = " << num(f.grid.upper().y()) << " down to x2 = "
       << num(f.grid.origin.y()) << "; columns from x1 = " << num(f.grid.origin.x())
       << " to x1 = " << num(f.grid.upper().x()) << "\n";
}

void cmd_spectrum(Context& c) {
  Csv csv(c.out / "spectrum.csv", "spectrum",
          {"h", "alpha1", "alpha2", "E_ebk", "E_quartic", "iota1", "iota2", "umbilic_x1", "umbilic_x2"});
  std::optional<NormalForm> nf;
  try {
    nf = birkhoff_quartic(c.model, c.left);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ResonanceError) throw;
  }
  for (double h : c.cfg.h_values) {
    auto states = spectral_series(c.left, h, c.cfg.E0);
    if (nf) apply_normal_form(*nf, states);
    for (const auto& s : states) {
      // Inner umbilic: the one of largest x1 (closest to the axis) in world coordinates.
      auto lattice = umbilic_lattice(c.model, c.left, h, s.energy, s.energy, c.cfg.project_umbilics);
      Vec2 y = c.left.from_principal(s.umbilics[0]);
      for (const auto& entry : lattice)
        if (entry.state.alpha == s.alpha)
          for (const auto& w : entry.world)
            if (w.x() > y.x() || (w.x() == y.x() && w.y() > y.y())) y = w;
      csv.row({num(h), std::to_string(s.alpha[0]), std::to_string(s.alpha[1]), num(s.energy),
               num(nf ? s.energy_quartic : std::numeric_limits<double>::quiet_NaN()),
               num(s.iota.x()), num(s.iota.y()), num(y.x()), num(y.y())});
    }
  }
}

void cmd_agmon(Context& c) {
  const GridSpec g = node_grid(c.cfg);
  const auto opts = agmon_options(c.cfg);
  const ScalarField2D f = agmon_distance(c.model, c.cfg.E, c.left, c.right, g, opts);
  Csv csv(c.out / "agmon.csv", "agmon", {"x1", "x2", "d", "tag"});
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i) {
      const Vec2 x = g.node(i, j);
      const char* tag = f.tag(i, j) == NodeTag::Inside ? "inside"
                        : f.tag(i, j) == NodeTag::Source ? "source" : "outside";
      csv.row({num(x.x()), num(x.y()), num(f.at(i, j)), tag});
    }
  write_pgm(c.out / "agmon.pgm", f);
  const S0Result s0 = s0_between_wells(c.model, c.cfg.E, c.left, g, opts);
  Csv sum(c.out / "agmon_summary.csv", "agmon_summary",
          {"E", "S0", "xE_1", "xE_2", "eikonal_residual"});
  sum.row({num(c.cfg.E), num(s0.S0), num(s0.xE.x()), num(s0.xE.y()),
           num(eikonal_residual_constant(s0.left_field, c.model, c.cfg.E))});
}

void cmd_geodesic(Context& c) {
  MinimalGeodesicOptions mo;
  mo.flow.tol_shell = c.cfg.tol.tol_shell;
  const MinimalGeodesic g = minimal_geodesic(c.model, c.left, c.cfg.E, 1e-3, mo);
  Csv csv(c.out / "geodesic.csv", "geodesic", {"t", "x1", "x2", "xi1", "xi2", "action"});
  const auto& s = g.full.samples;
  for (std::size_t k = 0; k < s.size(); ++k)
    if (k % 10 == 0 || k + 1 == s.size())
      csv.row({num(s[k].t), num(s[k].x.x()), num(s[k].x.y()), num(s[k].xi.x()), num(s[k].xi.y()),
               num(s[k].action)});
  Csv sum(c.out / "geodesic_summary.csv", "geodesic_summary",
          {"E", "S0", "theta", "candidates", "minimizing_intervals"});
  sum.row({num(c.cfg.E), num(g.action), num(g.theta), std::to_string(g.candidates.size()),
           std::to_string(g.minimizing_intervals)});
}

void cmd_cycles(Context& c) {
  Csv csv(c.out / "cycles.csv", "cycles",
          {"h", "alpha1", "alpha2", "E", "source", "yL_1", "yL_2", "mismatch", "action", "is_cycle",
           "minimal", "defect_total"});
  CycleOptions co;
  co.tol_cycle = c.cfg.tol.tol_cycle;
  co.flow.tol_shell = c.cfg.tol.tol_shell;
  for (double h : c.cfg.h_values) {
    const TorusState st = make_state(c.left, c.cfg.alpha, h);
    const auto cycles = find_tunnel_cycles(c.model, c.left, st, st.energy, co);
    for (const auto& cy : cycles) {
      std::string defect = "null";
      try {
        defect = num(correspondence_defect(c.model, c.left, cy.y_L, st.energy, st.energy).total);
      } catch (const Error& e) {
        c.log << "h = " << num(h) << ": no defect for the " << cy.source << " shot (" << e.what() << ")\n";
      }
      csv.row({num(h), std::to_string(c.cfg.alpha[0]), std::to_string(c.cfg.alpha[1]),
               num(st.energy), cy.source, num(cy.y_L.x()), num(cy.y_L.y()), num(cy.mismatch),
               num(cy.action), cy.is_cycle ? "1" : "0", cy.minimal ? "1" : "0", defect});
    }
  }
}

void cmd_splitting(Context& c) {
  const double h = c.cfg.h_values.front();
  const auto e = splitting_estimate(c.model, c.left, c.right, c.cfg.alpha, h, series_options(c.cfg));
  auto header = kSeriesHeader;
  header.insert(header.begin(), "h");
  Csv csv(c.out / "splitting.csv", "splitting", header);
  auto cells = series_cells(e);
  cells.insert(cells.begin(), num(h));
  csv.row(cells);
  if (!e.ok()) throw Error(ErrorKind::NoConvergence, "splitting failed: " + e.error);
}

void cmd_series(Context& c) {
  const double h = c.cfg.h_values.front();
  const auto rows = spectral_tunnel_series(c.model, h, c.cfg.E0, c.cfg.well_seed, series_options(c.cfg));
  Csv csv(c.out / "series.csv", "series", kSeriesHeader);
  for (const auto& r : rows) csv.row(series_cells(r));
}

// Least-squares slope of y against x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void cmd_sweep(Context& c) {
  const auto opts = series_options(c.cfg);
  // One job per h; results are collected in h order so the file is deterministic.
  std::vector<std::future<std::vector<SplittingEstimate>>> jobs;
  for (double h : c.cfg.h_values)
    jobs.push_back(std::async(std::launch::async, [&, h] {
      try {
        return spectral_tunnel_series(c.model, h, c.cfg.E0, c.cfg.well_seed, opts);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::EmptySeries) throw;
        return std::vector<SplittingEstimate>{};
      }
    }));
  auto header = kSeriesHeader;
  header.insert(header.begin(), "h");
  Csv csv(c.out / "sweep.csv", "sweep", header);
  std::vector<double> inv_h, neg_log;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const auto rows = jobs[k].get();
    const double h = c.cfg.h_values[k];
    if (rows.empty()) c.log << "h = " << num(h) << ": no state below E0\n";
    for (const auto& r : rows) {
      auto cells = series_cells(r);
      cells.insert(cells.begin(), num(h));
      csv.row(cells);
      if (r.alpha == Index2{0, 0} && r.ok() && r.delta_herring > 0) {
        inv_h.push_back(1.0 / h);
        neg_log.push_back(-std::log(r.delta_herring));
      }
    }
  }
  // Summary: slope of -log delta against 1 / h for the ground doublet.
  const double fit = inv_h.size() >= 2 ? slope(inv_h, neg_log) : std::numeric_limits<double>::quiet_NaN();
  csv.row({"fit", "0", "0", "null", num(fit), "null", "null", "null", "null", "null",
           "summary-slope-of-minus-log-dE_herring-vs-1/h"});
  c.log << "fitted S0 from the ground doublet: " << num(fit) << "\n";
}

void cmd_verify(Context& c) {
  Csv csv(c.out / "verify.csv", "verify", {"check", "value", "tolerance", "pass"});
  bool all = true;
  auto record = [&](const std::string& name, double value, double tol, bool pass) {
    csv.row({name, num(value), num(tol), pass ? "1" : "0"});
    all = all && pass;
  };
  // On-shell drift of the minimal geodesic.
  const MinimalGeodesic g = minimal_geodesic(c.model, c.left, c.cfg.E);
  double drift = 0.0;
  for (const auto& s : g.full.samples)
    drift = std::max(drift, std::abs(s.xi.squaredNorm() - c.model.value(s.x) + c.cfg.E));
  record("geodesic_shell_drift", drift, c.cfg.tol.tol_shell, drift <= c.cfg.tol.tol_shell);
  // Determinism of the eikonal solver.
  const GridSpec grid = node_grid(c.cfg);
  const auto a = agmon_distance(c.model, c.cfg.E, c.left, grid, agmon_options(c.cfg));
  const auto b = agmon_distance(c.model, c.cfg.E, c.left, grid, agmon_options(c.cfg));
  const bool same = a.values.size() == b.values.size() &&
                    std::equal(a.values.begin(), a.values.end(), b.values.begin(), [](double x, double y) {
                      return (std::isnan(x) && std::isnan(y)) || x == y;
                    });
  record("agmon_deterministic", same ? 0.0 : 1.0, 0.0, same);
  // Ground doublet: reference residuals and Herring exponent.
  const double h = c.cfg.h_values.front();
  auto opts = series_options(c.cfg);
  opts.with_reference = true;
  const auto e = splitting_estimate(c.model, c.left, c.right, {0, 0}, h, opts);
  record("herring_ok", e.ok() ? 0.0 : 1.0, 0.0, e.ok());
  if (e.ok()) {
    record("transport_residual", e.transport_residual, c.cfg.tol.tol_transport,
           e.transport_residual <= c.cfg.tol.tol_transport);
    const double ratio = e.delta_stationary / e.delta_herring;
    record("stationary_over_herring", ratio, 0.25, ratio >= 0.8 && ratio <= 1.25);
  }
  if (e.delta_reference && e.ok()) {
    const double rel = std::abs(std::log(e.delta_herring) / std::log(*e.delta_reference) - 1.0);
    record("herring_exponent_vs_reference", rel, 0.05, rel <= 0.05);
  } else {
    record("reference_available", 1.0, 0.0, false);
  }
  ReferenceOptions ro;
  ro.tol_eig = c.cfg.tol.tol_eig;
  ro.E_max = e.E_center;
  const auto d = doublet_splitting(c.model, c.cfg.grid_lo, c.cfg.grid_hi, c.cfg.n1, c.cfg.n2, h, 0, ro);
  const double res = std::max(d.residual_sym, d.residual_anti);
  record("reference_residual", res, c.cfg.tol.tol_eig, res <= c.cfg.tol.tol_eig);
  if (!all) throw Error(ErrorKind::NoConvergence, "verification failed; see verify.csv");
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::ValidationError:
      return 2;
    case ErrorKind::GapViolation:
      return 4;
    default:
      return 3;
  }
}

int run(const std::string& subcommand, const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  const fs::path out(cfg.out_dir);
  auto report = [&](const std::string& kind, const std::string& message, int code) {
    nlohmann::ordered_json j;
    j["error"] = kind;
    j["message"] = message;
    j["subcommand"] = subcommand;
    j["exit_code"] = code;
    err << j.dump() << "\n";
    std::error_code ec;
    fs::create_directories(out, ec);
    std::ofstream f(out / "error.json", std::ios::binary);
    if (f) f << j.dump(2) << "\n";
    return code;
  };
  try {
    fs::create_directories(out);
    {
      std::ofstream echo(out / "config.echo", std::ios::binary);
      echo << cfg.echo();
    }
    for (const auto& w : cfg.warnings) log << "warning: " << w << "\n";
    Context c{cfg, cfg.model(), {}, {}, out, log};
    std::tie(c.left, c.right) = find_wells(c.model, cfg.well_seed);
    if (subcommand == "spectrum") cmd_spectrum(c);
    else if (subcommand == "agmon") cmd_agmon(c);
    else if (subcommand == "geodesic") cmd_geodesic(c);
    else if (subcommand == "cycles") cmd_cycles(c);
    else if (subcommand == "splitting") cmd_splitting(c);
    else if (subcommand == "series") cmd_series(c);
    else if (subcommand == "sweep") cmd_sweep(c);
    else if (subcommand == "verify") cmd_verify(c);
    else throw Error(ErrorKind::ValidationError, "key 'subcommand': unknown subcommand " + subcommand);
    return 0;
  } catch (const Error& e) {
    return report(std::string(to_string(e.kind())), e.what(), exit_code(e.kind()));
  } catch (const std::exception& e) {
    return report("InternalError", e.what(), 3);
  }
}

}  // namespace tunnelkit
