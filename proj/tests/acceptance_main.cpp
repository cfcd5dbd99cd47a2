// Acceptance runner.
//   acceptance --setup --configs <dir> --dir <artifacts>   run the default pipeline once
//   acceptance --dir <artifacts> [--criterion k]           print one line per criterion
#include "CLI11.hpp"

#include "solitonlab/acceptance.hpp"
#include "solitonlab/config.hpp"
#include "solitonlab/errors.hpp"
#include "solitonlab/harness.hpp"

#include <cstdio>

using namespace solitonlab;
namespace fs = std::filesystem;

namespace {

int setup(const fs::path& configs, const fs::path& dir) {
  fs::remove_all(dir);
  const auto def = load_config(configs / "default.cfg");
  const auto cons = load_config(configs / "conservation.cfg");
  for (const char* stage : {"ground-state", "spectrum", "fgr", "modulate", "propagator-decay"}) {
    const auto r = run_subcommand(stage, def, dir);
    std::printf("%s: %.1f s\n", stage, r.wall_clock);
  }
  const auto r = run_subcommand("evolve", cons, dir);
  std::printf("evolve: %.1f s\n", r.wall_clock);
  run_subcommand("report", def, dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string dir, configs;
  int criterion = 0;
  bool do_setup = false;
  app.add_option("--dir", dir, "artifact directory")->required();
  app.add_option("--configs", configs, "directory with default.cfg and conservation.cfg");
  app.add_option("--criterion", criterion, "single criterion (1-14)");
  app.add_flag("--setup", do_setup, "run the pipeline into --dir");
  CLI11_PARSE(app, argc, argv);

  try {
    if (do_setup) return setup(configs, dir);
    bool all = true;
    for (int id = 1; id <= criterion_count; ++id) {
      if (criterion && id != criterion) continue;
      const auto r = evaluate_criterion(id, dir);
      std::printf("%s\n", format_line(r).c_str());
      all = all && r.passed;
    }
    return all ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
}
