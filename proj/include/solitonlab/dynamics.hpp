#pragma once

#include "solitonlab/grid.hpp"
#include "solitonlab/linearization.hpp"
#include "solitonlab/model.hpp"

#include <functional>
#include <string>
#include <vector>

namespace solitonlab {

struct Observables {
  double mass = 0.0, energy = 0.0;
  double a = 0.0;  // center int x |psi|^2 / M
  double p = 0.0;  // Im int conj(psi) psi_x / M
};

Observables observables(const ModelConfig& model, const ComplexField& psi);

inline AbsorbingLayer no_layer() { return {false, 0.0, 0.15}; }

struct EvolveOptions {
  double T = 100.0;
  double dt = 0.005;
  double record_every = 1.0;     // conserved quantities and observables
  double snapshot_every = 0.5;   // <= 0 stores none
  bool store_snapshots = true;
  AbsorbingLayer layer = no_layer();
  // Called at every snapshot time (also when storage is off), t = 0 included.
  std::function<void(double, const ComplexField&)> on_snapshot;
};

struct SeriesRow {
  double t = 0.0, mass = 0.0, energy = 0.0, a = 0.0, p = 0.0, sup_norm = 0.0;
};

struct EvolutionResult {
  std::vector<double> snapshot_times;
  std::vector<ComplexField> snapshots;
  std::vector<SeriesRow> series;
  ComplexField final_state;
  double dt = 0.0;
  std::string scheme;
  AbsorbingLayer layer;

  double max_relative_mass_drift() const;
  double max_relative_energy_drift() const;
};

// Strang split step: Fourier half step for -Delta, exact phase rotation for V_h - f(|psi|^2)
// (|psi| is invariant there), and exp(-W dt) for the layer.
EvolutionResult evolve_nls(const ModelConfig& model, const ComplexField& psi0, const EvolveOptions& opt = {});

enum class LinearScheme { integrating_factor_rk4, strang };

struct LinearEvolveOptions {
  double T = 50.0;
  double dt = 0.005;
  double record_every = 1.0;
  double snapshot_every = 0.0;
  double nu = 4.0;  // weight of the recorded weighted norm
  LinearScheme scheme = LinearScheme::integrating_factor_rk4;
  AbsorbingLayer layer = no_layer();
  std::function<void(double, const TwoComponentField&)> on_snapshot;
};

struct LinearSeriesRow {
  double t = 0.0, l2 = 0.0, weighted = 0.0, sup_norm = 0.0;
};

struct LinearEvolutionResult {
  std::vector<double> snapshot_times;
  std::vector<TwoComponentField> snapshots;
  std::vector<LinearSeriesRow> series;
  TwoComponentField final_state;
  double dt = 0.0;
  std::string scheme;
  AbsorbingLayer layer;
};

// dw/dt = L w - W w. The kinetic part [[0, -Delta + lambda], [Delta - lambda, 0]] is exact in
// Fourier space; the rest is either stepped by RK4 in the interaction picture or split off.
LinearEvolutionResult evolve_linearized(const LinearizedOperator& op, const TwoComponentField& w0,
                                        const LinearEvolveOptions& opt = {});

// sup_x sqrt(|w1|^2 + |w2|^2)
double sup_norm(const TwoComponentField& w);

struct DecayFit {
  double t1 = 0.0, t2 = 0.0;
  double exponent = 0.0;
  double stderr_exponent = 0.0;
  double r2 = 0.0;
  std::size_t samples = 0;
};

// Slope of log y against log t over the samples with t in [t1, t2].
DecayFit decay_exponent(const std::vector<double>& t, const std::vector<double>& y, double t1, double t2);

}  // namespace solitonlab
