#include "tunnelkit/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace tunnelkit {

namespace {

struct Cursor {
  int line = 0;
  int column = 1;
};

[[noreturn]] void parse_error(const Cursor& c, const std::string& what) {
  throw Error(ErrorKind::ParseError,
              "line " + std::to_string(c.line) + ", column " + std::to_string(c.column) + ": " + what);
}

[[noreturn]] void invalid(const std::string& key, const std::string& what) {
  throw Error(ErrorKind::ValidationError, "key '" + key + "': " + what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Whitespace- or comma-separated numbers.
std::vector<double> numbers(const std::string& value, const Cursor& c) {
  std::vector<double> out;
  std::string tok;
  std::istringstream in(value);
  while (in >> tok) {
    std::stringstream parts(tok);
    std::string part;
    while (std::getline(parts, part, ',')) {
      if (part.empty()) continue;
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
      if (ec != std::errc() || ptr != part.data() + part.size())
        parse_error(c, "'" + part + "' is not a number");
      out.push_back(v);
    }
  }
  return out;
}

std::vector<double> expect(const std::string& value, const Cursor& c, std::size_t n) {
  auto v = numbers(value, c);
  if (v.size() != n)
    parse_error(c, "expected " + std::to_string(n) + " number(s), got " + std::to_string(v.size()));
  return v;
}

int integer(const std::string& value, const Cursor& c) {
  const double v = expect(value, c, 1)[0];
  if (v != std::floor(v)) parse_error(c, "'" + value + "' is not an integer");
  return static_cast<int>(v);
}

bool boolean(const std::string& value, const Cursor& c) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  parse_error(c, "'" + value + "' is not a boolean");
}

bool power_of_two_multiple_of_16(int n) {
  if (n < 16 || n % 16 != 0) return false;
  const int m = n / 16;
  return (m & (m - 1)) == 0;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  using Setter = std::function<void(const std::string&, const Cursor&)>;
  std::map<std::string, std::map<std::string, Setter>> keys;
  auto& pot = keys["potential"];
  pot["term"] = [&](const std::string& v, const Cursor& c) {
    const auto t = expect(v, c, 3);
    if (t[1] < 0 || t[2] < 0 || t[1] != std::floor(t[1]) || t[2] != std::floor(t[2]))
      parse_error(c, "exponents must be nonnegative integers");
    cfg.terms.push_back({t[0], static_cast<int>(t[1]), static_cast<int>(t[2])});
  };
  pot["seed"] = [&](const std::string& v, const Cursor& c) {
    const auto t = expect(v, c, 2);
    cfg.well_seed = {t[0], t[1]};
  };
  auto& grid = keys["grid"];
  grid["lo"] = [&](const std::string& v, const Cursor& c) {
    const auto t = expect(v, c, 2);
    cfg.grid_lo = {t[0], t[1]};
  };
  grid["hi"] = [&](const std::string& v, const Cursor& c) {
    const auto t = expect(v, c, 2);
    cfg.grid_hi = {t[0], t[1]};
  };
  grid["n1"] = [&](const std::string& v, const Cursor& c) { cfg.n1 = integer(v, c); };
  grid["n2"] = [&](const std::string& v, const Cursor& c) { cfg.n2 = integer(v, c); };
  auto& run = keys["run"];
  run["h"] = [&](const std::string& v, const Cursor& c) { cfg.h_values = numbers(v, c); };
  run["E0"] = [&](const std::string& v, const Cursor& c) { cfg.E0 = expect(v, c, 1)[0]; };
  run["E"] = [&](const std::string& v, const Cursor& c) { cfg.E = expect(v, c, 1)[0]; };
  run["alpha"] = [&](const std::string& v, const Cursor& c) {
    const auto t = expect(v, c, 2);
    cfg.alpha = {static_cast<int>(t[0]), static_cast<int>(t[1])};
  };
  run["out"] = [&](const std::string& v, const Cursor&) { cfg.out_dir = v; };
  auto& tol = keys["tolerances"];
  tol["tol_contour"] = [&](const std::string& v, const Cursor& c) { cfg.tol.tol_contour = expect(v, c, 1)[0]; };
  tol["tol_shell"] = [&](const std::string& v, const Cursor& c) { cfg.tol.tol_shell = expect(v, c, 1)[0]; };
  tol["tol_cycle"] = [&](const std::string& v, const Cursor& c) { cfg.tol.tol_cycle = expect(v, c, 1)[0]; };
  tol["tol_eig"] = [&](const std::string& v, const Cursor& c) { cfg.tol.tol_eig = expect(v, c, 1)[0]; };
  tol["tol_transport"] = [&](const std::string& v, const Cursor& c) { cfg.tol.tol_transport = expect(v, c, 1)[0]; };
  tol["tol_fit"] = [&](const std::string& v, const Cursor& c) { cfg.tol.tol_fit = expect(v, c, 1)[0]; };
  auto& flags = keys["flags"];
  flags["project_umbilics"] = [&](const std::string& v, const Cursor& c) { cfg.project_umbilics = boolean(v, c); };
  flags["with_reference"] = [&](const std::string& v, const Cursor& c) { cfg.with_reference = boolean(v, c); };

  std::string section;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  Cursor cur;
  while (std::getline(in, raw)) {
    ++cur.line;
    cur.column = 1;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    cur.column = static_cast<int>(raw.find_first_not_of(" \t")) + 1;
    if (line.front() == '[') {
      if (line.back() != ']') parse_error(cur, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!keys.count(section)) invalid(section, "unknown section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_error(cur, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) parse_error(cur, "key '" + key + "' outside a section");
    const auto it = keys[section].find(key);
    if (it == keys[section].end()) invalid(key, "unknown key in [" + section + "]");
    if (key != "term" && !seen.insert(section + "." + key).second) invalid(key, "given twice");
    if (value.empty()) parse_error(cur, "empty value for '" + key + "'");
    cur.column = static_cast<int>(raw.find('=')) + 2;
    it->second(value, cur);
  }

  if (cfg.terms.empty()) invalid("term", "the potential has no terms");
  if (cfg.h_values.empty()) invalid("h", "at least one h is required");
  for (double h : cfg.h_values)
    if (!(h > 0)) invalid("h", "values must be positive");
  if (!std::is_sorted(cfg.h_values.begin(), cfg.h_values.end(), std::greater<>())) {
    std::sort(cfg.h_values.begin(), cfg.h_values.end(), std::greater<>());
    cfg.warnings.push_back("h values re-sorted descending");
  }
  if (!power_of_two_multiple_of_16(cfg.n1)) invalid("n1", "must be 16 times a power of two");
  if (!power_of_two_multiple_of_16(cfg.n2)) invalid("n2", "must be 16 times a power of two");
  if (!(cfg.grid_lo.x() < cfg.grid_hi.x() && cfg.grid_lo.y() < cfg.grid_hi.y()))
    invalid("lo", "must lie below hi in both coordinates");
  if (!(cfg.E0 > 0)) invalid("E0", "must be positive");
  if (!(cfg.E >= 0)) invalid("E", "must be nonnegative");
  if (cfg.alpha[0] < 0 || cfg.alpha[1] < 0) invalid("alpha", "indices must be nonnegative");
  const std::pair<const char*, double> tols[] = {
      {"tol_contour", cfg.tol.tol_contour}, {"tol_shell", cfg.tol.tol_shell},
      {"tol_cycle", cfg.tol.tol_cycle},     {"tol_eig", cfg.tol.tol_eig},
      {"tol_transport", cfg.tol.tol_transport}, {"tol_fit", cfg.tol.tol_fit}};
  for (const auto& [name, v] : tols)
    if (!(v > 0)) invalid(name, "tolerances must be positive");
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::ValidationError, "key 'config': cannot open " + path);
  std::stringstream s;
  s << f.rdbuf();
  return parse_config_text(s.str());
}

std::string RunConfig::echo() const {
  std::ostringstream s;
  s << "[potential]\n";
  for (const auto& t : terms) s << "term = " << fmt(t.coefficient) << " " << t.a << " " << t.b << "\n";
  s << "seed = " << fmt(well_seed.x()) << " " << fmt(well_seed.y()) << "\n";
  s << "\n[grid]\n";
  s << "lo = " << fmt(grid_lo.x()) << " " << fmt(grid_lo.y()) << "\n";
  s << "hi = " << fmt(grid_hi.x()) << " " << fmt(grid_hi.y()) << "\n";
  s << "n1 = " << n1 << "\nn2 = " << n2 << "\n";
  s << "\n[run]\nh =";
  for (std::size_t k = 0; k < h_values.size(); ++k) s << (k ? ", " : " ") << fmt(h_values[k]);
  s << "\nE0 = " << fmt(E0) << "\nE = " << fmt(E) << "\n";
  s << "alpha = " << alpha[0] << "," << alpha[1] << "\nout = " << out_dir << "\n";
  s << "\n[tolerances]\n";
  s << "tol_contour = " << fmt(tol.tol_contour) << "\ntol_shell = " << fmt(tol.tol_shell)
    << "\ntol_cycle = " << fmt(tol.tol_cycle) << "\ntol_eig = " << fmt(tol.tol_eig)
    << "\ntol_transport = " << fmt(tol.tol_transport) << "\ntol_fit = " << fmt(tol.tol_fit) << "\n";
  s << "\n[flags]\n";
  s << "project_umbilics = " << (project_umbilics ? "true" : "false") << "\n";
  s << "with_reference = " << (with_reference ? "true" : "false") << "\n";
  for (const auto& w : warnings) s << "# warning: " << w << "\n";
  return s.str();
}

}  // namespace tunnelkit
