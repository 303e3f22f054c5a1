#include "tunnelkit/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"tunnelkit: semiclassical tunneling splittings of symmetric double wells"};
  app.require_subcommand(1, 1);

  std::string config;
  std::string alpha;
  double h = 0.0;
  bool with_reference = false;
  std::string out;

  const std::pair<const char*, const char*> commands[] = {
      {"spectrum", "EBK energies and umbilics of the left well for each h"},
      {"agmon", "Agmon distance field, heatmap and S0 at the configured energy"},
      {"geodesic", "minimal instanton geodesic at the configured energy"},
      {"cycles", "tunnel cycles and correspondence defects for alpha over the h list"},
      {"splitting", "Herring and stationary-phase splitting for one state"},
      {"series", "spectral tunnel series at the first h"},
      {"verify", "numerical self-checks on the configured model"},
      {"sweep", "series over the h list with the exponent regression"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->set_help_flag("--help", "print this help and exit");  // -h is not help: --h is the parameter
    sub->add_option("--config", config, "config file (key = value with sections)")->required();
    sub->add_option("--alpha", alpha, "state index a1,a2");
    sub->add_option("--h", h, "semiclassical parameter (replaces the h list)");
    sub->add_flag("--with-reference", with_reference, "attach the finite-difference reference");
    sub->add_option("--out", out, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string name = app.get_subcommands().front()->get_name();

  tunnelkit::RunConfig cfg;
  try {
    cfg = tunnelkit::parse_config(config);
    if (!alpha.empty()) {
      const auto comma = alpha.find(',');
      if (comma == std::string::npos)
        throw tunnelkit::Error(tunnelkit::ErrorKind::ValidationError, "key 'alpha': expected a1,a2");
      cfg.alpha = {std::stoi(alpha.substr(0, comma)), std::stoi(alpha.substr(comma + 1))};
      if (cfg.alpha[0] < 0 || cfg.alpha[1] < 0)
        throw tunnelkit::Error(tunnelkit::ErrorKind::ValidationError, "key 'alpha': indices must be nonnegative");
    }
    if (h > 0) cfg.h_values = {h};
    if (with_reference) cfg.with_reference = true;
    if (!out.empty()) cfg.out_dir = out;
  } catch (const std::exception& e) {
    const auto* te = dynamic_cast<const tunnelkit::Error*>(&e);
    nlohmann::ordered_json j;
    j["error"] = te ? std::string(tunnelkit::to_string(te->kind())) : "ValidationError";
    j["message"] = e.what();
    j["subcommand"] = name;
    j["exit_code"] = 2;
    std::cerr << j.dump() << "\n";
    return 2;
  }
  return tunnelkit::run(name, cfg, std::cout, std::cerr);
}
