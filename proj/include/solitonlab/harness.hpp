#pragma once

#include "solitonlab/config.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace solitonlab {

const std::vector<std::string>& subcommands();

struct StageResult {
  std::string stage;
  std::vector<std::string> files;  // relative to the output directory
  double wall_clock = 0.0;
  nlohmann::json timings = nlohmann::json::object();
};

// Runs one pipeline stage, writes its artifacts under out_dir and merges the stage into
// manifest.json. Errors from a stage are rethrown with the stage name prefixed.
StageResult run_subcommand(const std::string& name, const ExperimentConfig& config,
                           const std::filesystem::path& out_dir);

StageResult run_ground_state(const ExperimentConfig& c, const std::filesystem::path& out);
StageResult run_spectrum(const ExperimentConfig& c, const std::filesystem::path& out);
StageResult run_fgr(const ExperimentConfig& c, const std::filesystem::path& out);
StageResult run_evolve(const ExperimentConfig& c, const std::filesystem::path& out);
StageResult run_modulate(const ExperimentConfig& c, const std::filesystem::path& out);
StageResult run_propagator_decay(const ExperimentConfig& c, const std::filesystem::path& out);
StageResult run_report(const ExperimentConfig& c, const std::filesystem::path& out);

// Files report needs, in the order they are checked.
const std::vector<std::string>& report_inputs();

// Deterministic summary of a complete artifact directory; throws MissingArtifact.
nlohmann::json build_report(const std::filesystem::path& dir);

}  // namespace solitonlab
