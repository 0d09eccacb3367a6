#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "stree/common.hpp"
#include "stree/experiment.hpp"

int main(int argc, char** argv) {
  using namespace stree;
  CLI::App app{"Stable processes on homogeneous trees: kernels, exit times, Poisson kernels"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "flat key = value file; flags override it");

  const std::map<std::string, std::string> help = {
      {"q", "branching number (degree q+1)"},
      {"alpha", "stability index in (0, 2)"},
      {"t", "time grid: a,b,c or start:stop:step"},
      {"nmax", "last distance in kernel tables"},
      {"r", "radius grid"},
      {"A1", "inner annulus factor"},
      {"A2", "outer annulus factor"},
      {"beta_exponent", "annulus scale exponent (0: 2/alpha)"},
      {"K", "inner regime factor"},
      {"M", "outer regime factor"},
      {"n_samples", "Monte Carlo sample count"},
      {"seed", "master seed"},
      {"N", "spectral truncation depth"},
      {"output", "main output file (default $" + std::string(kOutputDirEnv) + "/<experiment>.<ext>)"},
      {"format", "csv or json"},
      {"threads", "worker cap (0: all cores)"},
      {"experiment", "experiment to run when no subcommand is given"}};
  std::map<std::string, std::string> flags;
  std::map<std::string, CLI::Option*> opts;
  for (const auto& key : config_keys()) opts[key] = app.add_option("--" + key, flags[key], help.at(key));

  const char* subs[][2] = {{"kernel-table", "spectral and subordination kernels side by side"},
                           {"envelope", "two-regime kernel envelopes and decay fits"},
                           {"repartition", "annulus mass against time"},
                           {"exit-time", "mean exit times: Monte Carlo against the Green function"},
                           {"poisson", "exit law and Poisson kernel bounds"},
                           {"selftest", "cross-oracle checks"}};
  for (const auto& s : subs) app.add_subcommand(s[0], s[1]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig cfg;
    std::map<std::string, std::string> settings;
    if (!config_path.empty()) settings = read_config_file(config_path);
    for (const auto& [key, opt] : opts)
      if (opt->count() > 0) settings[key] = flags[key];
    if (!app.get_subcommands().empty()) settings["experiment"] = app.get_subcommands().front()->get_name();
    if (!settings.count("experiment")) throw ConfigError("experiment", "no subcommand or experiment key given");
    for (const auto& [key, value] : settings) apply_setting(cfg, key, value);
    const RunResult res = run(cfg, std::cout);
    for (const auto& f : res.files) std::cout << "wrote " << f << "\n";
    return res.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
