#include <iostream>

#include <CLI11.hpp>

#include "fracspec/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spectral solver and verification runs for a*D^gamma u + A*u + lambda u = f"};
  fracspec::RunOptions options;
  std::string config, out;
  std::uint64_t seed = 0;
  app.add_option("--config", config, "run configuration file")->required()->envname("FRACSPEC_CONFIG");
  auto* out_opt = app.add_option("--out", out, "output directory (overrides [output] directory)")
                      ->envname("FRACSPEC_OUT");
  auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides [parameters] seed)")
                       ->envname("FRACSPEC_SEED");
  app.add_option("--threads", options.threads, "worker threads, 0 = all cores")
      ->envname("FRACSPEC_THREADS")
      ->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fracspec::kExitError;
  }
  options.config = config;
  if (out_opt->count() > 0) options.out = out;
  if (seed_opt->count() > 0) options.seed = seed;
  return fracspec::run(options, std::cerr);
}
