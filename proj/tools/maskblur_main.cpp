#include <CLI11.hpp>

#include <cstdio>

#include "maskblur/errors.hpp"
#include "maskblur/experiment.hpp"
#include "maskblur/io.hpp"
#include "maskblur/simkit.hpp"
#include "maskblur/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Coded-mask superresolution simulator and reconstructor"};
  app.set_version_flag("--version", maskblur::kVersion);
  app.require_subcommand(1);

  // File existence is checked by the library, not the parser, so missing
  // paths exit with the documented codes (2 for configs, 4 for manifests)
  // instead of a generic parse error.
  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("config", config_path, "Path to the experiment config")->required();

  std::string manifest_path;
  CLI::App* verify = app.add_subcommand("verify", "Re-check the checksums in a run manifest");
  verify->add_option("manifest", manifest_path, "Path to manifest.json")->required();

  int mask_side = 32;
  int sensor_side = 32;
  int superres_factor = 4;
  CLI::App* kernels = app.add_subcommand("kernels", "Blur kernel utilities");
  kernels->require_subcommand(1);
  CLI::App* kernels_list = kernels->add_subcommand("list", "List the built-in blur kernels");
  kernels_list->add_option("--mask-side", mask_side, "Mask elements per side");
  kernels_list->add_option("--sensor-side", sensor_side, "Sensor pixels per side");
  kernels_list->add_option("--superres-factor", superres_factor,
                           "Scene pixels per mask element (perfect square)");

  std::string patterns_config;
  CLI::App* patterns = app.add_subcommand("patterns", "Mask pattern utilities");
  patterns->require_subcommand(1);
  CLI::App* patterns_dump =
      patterns->add_subcommand("dump", "Write the mask patterns for a config");
  patterns_dump->add_option("config", patterns_config, "Path to the experiment config")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help/--version exit 0 through app.exit; genuine command-line errors
    // are configuration errors under this tool's exit-code contract.
    const int rc = app.exit(e);
    return rc == 0 ? maskblur::kExitOk : maskblur::kExitConfigError;
  }

  if (run->parsed()) return maskblur::run_experiment(config_path);
  if (verify->parsed()) return maskblur::verify_manifest(manifest_path);
  if (patterns_dump->parsed()) return maskblur::dump_patterns(patterns_config);

  if (kernels_list->parsed()) {
    try {
      const maskblur::Geometry g =
          maskblur::make_geometry(mask_side, sensor_side, superres_factor);
      std::printf("%-12s %6s %10s %12s\n", "name", "side", "sum", "diameter_px");
      for (const maskblur::BlurKernel& k : maskblur::make_kernel_library(g)) {
        double sum = 0.0;
        for (double v : k.raster.values) sum += v;
        std::printf("%-12s %6d %10s %12s\n", k.name.c_str(), k.side(),
                    maskblur::format_g17(sum).c_str(),
                    maskblur::format_g17(k.diameter_sensor_px).c_str());
      }
      return maskblur::kExitOk;
    } catch (const maskblur::Error& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return maskblur::kExitConfigError;
    }
  }
  return maskblur::kExitOk;
}
