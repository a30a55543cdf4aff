#include <iostream>

#include "CLI11.hpp"

#include "frbm/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Reflected Brownian motion on a Cantor set with slit barriers"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool relax_gap = false;
  app.add_option("--config", config_path, "Experiment config (INI)")->required();
  app.add_option("--out", out_dir, "Output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed, overrides [sim] seed");
  app.add_flag("--relax-gap", relax_gap, "Allow gap parameters b up to 0.4");
  app.fallthrough();
  for (const auto& mode : frbm::known_modes()) app.add_subcommand(mode, "Run the " + mode + " mode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : frbm::kExitValidation;
  }
  frbm::ConfigOverrides overrides;
  if (*seed_opt) overrides.seed = seed;
  overrides.relax_gap = relax_gap;
  const std::string mode = app.get_subcommands().front()->get_name();
  return frbm::run_main(mode, config_path, out_dir, overrides, std::cout, std::cerr);
}
