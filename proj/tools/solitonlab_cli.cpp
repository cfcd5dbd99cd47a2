#include "CLI11.hpp"

#include "solitonlab/config.hpp"
#include "solitonlab/errors.hpp"
#include "solitonlab/harness.hpp"

#include <cstdio>

using namespace solitonlab;

int main(int argc, char** argv) {
  CLI::App app{"solitonlab: trapped NLS soliton experiments"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  for (const auto& name : subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "key = value config file")->required();
    sub->add_option("--out", out_dir, "artifact directory (default: [output] dir)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const ExperimentConfig cfg = load_config(config_path);
    const auto r = run_subcommand(name, cfg, out_dir.empty() ? cfg.out_dir : out_dir);
    for (const auto& f : r.files) std::printf("%s\n", f.c_str());
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const MissingArtifact& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
