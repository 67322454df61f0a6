#include <CLI11.hpp>

#include "oclab/cli.hpp"

#include <fstream>
#include <iostream>

#include <json.hpp>

int main(int argc, char** argv) {
  CLI::App app{"finite-alphabet laboratory for output-constrained randomized quantization"};
  app.require_subcommand(1);

  std::string config_path;
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "chatty progress on stderr");

  static const char* kCommands[] = {"imin", "dcurve", "p1", "p3", "ot", "simulate", "types",
                                    "verify"};
  static const char* kHelp[] = {
      "constrained minimum mutual information curve",
      "output-constrained distortion-rate values",
      "optimal randomized quantizer with exact output law (LP)",
      "optimal randomized quantizer with a Prokhorov ball constraint (LP)",
      "exact optimal transport between two pmfs",
      "random-coding + coupling simulation",
      "type-class quantities",
      "invariant suite"};
  std::string chosen;
  for (std::size_t i = 0; i < 8; ++i) {
    auto* sub = app.add_subcommand(kCommands[i], kHelp[i]);
    sub->add_option("config", config_path, "JSON experiment config")->required();
    sub->callback([&chosen, name = std::string(kCommands[i])] { chosen = name; });
  }

  CLI11_PARSE(app, argc, argv);

  std::ifstream is(config_path);
  if (!is) {
    std::cerr << "cannot open config " << config_path << '\n';
    return oclab::cli::kExitConfig;
  }
  nlohmann::json config;
  try {
    is >> config;
  } catch (const std::exception& e) {
    std::cerr << "config parse error: " << e.what() << '\n';
    return oclab::cli::kExitConfig;
  }
  if (verbose) std::cerr << "running " << chosen << " with " << config_path << '\n';
  return oclab::cli::run_command(chosen, config);
}
