#pragma once

#include "solitonlab/grid.hpp"
#include "solitonlab/model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace solitonlab {

struct BranchSettings {
  double lambda_min = 0.2;
  double lambda_max = 0.5;
  int steps = 6;
};

struct IntegratorSettings {
  double dt = 0.005;
  double T = 1000.0;
  double snapshot_every = 0.5;
  double record_every = 0.5;
  AbsorbingLayer layer{true, 0.3, 0.15};
};

struct InitialSettings {
  double z1 = 0.05;
  double z2 = 0.0;
  // optional even bump R0 = amplitude exp(-x^2 / width^2), projected onto the continuous part
  double r0_amplitude = 0.0;
  double r0_width = 1.0;
  double smallness = 1.0;  // ||R0||_2 <= smallness (z1^2 + z2^2)
};

struct DiagnosticsSettings {
  double nu = 4.0;
  double fit_t1 = 100.0;
  double fit_t2 = 1000.0;
  double lambda_t1 = 100.0;
  double riccati_t1 = 100.0;
  double riccati_t2 = 1000.0;
  double newton_t_early = 100.0;
  double newton_t_late = 800.0;
  double companion_scale = 0.5;  // second trajectory with z0 scaled, used in the z-ODE regression
  double basis_spacing = 2e-3;
  double basis_half_range = 0.05;
};

struct FgrSettings {
  std::vector<double> deltas{1e-2, 5e-3, 2.5e-3};
  double box_half_width = 120.0;  // second box for the sensitivity check, 0 disables it
  double layer_strength = 0.3;
  double layer_fraction = 0.4;
};

struct PropagatorSettings {
  std::size_t n = 4096;
  double half_width = 640.0;
  double dt = 0.02;
  double T = 1000.0;
  double record_every = 0.5;
  AbsorbingLayer layer{true, 0.3, 0.15};
  double t1 = 100.0;
  double t2 = 1000.0;
};

struct ExperimentConfig {
  ModelConfig model;
  std::size_t n = 2048;
  double half_width = 80.0;
  BranchSettings branch;
  IntegratorSettings integrator;
  InitialSettings initial;
  DiagnosticsSettings diagnostics;
  FgrSettings fgr;
  PropagatorSettings propagator;
  std::string out_dir = "out";
  std::uint64_t seed = 1;

  GridPtr grid() const;
  void validate() const;
};

// key = value lines under [section] headers; '#' starts a comment. Unknown sections or keys,
// malformed values and duplicate keys are ConfigError with the offending line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical text form; parse_config(to_config_text(c)) reproduces c.
std::string to_config_text(const ExperimentConfig& c);

}  // namespace solitonlab
