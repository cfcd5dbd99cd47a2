#pragma once

#include "solitonlab/grid.hpp"
#include "solitonlab/model.hpp"

#include <optional>
#include <vector>

namespace solitonlab {

struct NewtonOptions {
  double tol = 1e-10;       // sup norm of the soliton residual
  int max_iterations = 40;
  double h_step = 0.05;     // continuation step in h from the free soliton
};

struct SolitonSolve {
  RealField phi;
  double residual = 0.0;  // sup norm
  int iterations = 0;
};

// sqrt(2 mu) sech(sqrt(mu) x) on a line grid, or its radial sample for a seed.
RealField free_soliton_cubic(const GridPtr& grid, double mu);
// d/dmu of the free cubic soliton.
RealField free_soliton_cubic_dmu(const GridPtr& grid, double mu);

// -Delta phi + (lambda + V_h) phi - f(phi^2) phi
RVec soliton_residual(const ModelConfig& model, const Grid& grid, double lambda, const RVec& phi);

// Newton on the stationary equation. Without a seed the free soliton at mu = lambda + V(0)
// is continued in h from 0 to model.potential.h.
SolitonSolve solve_soliton(const ModelConfig& model, const GridPtr& grid, double lambda,
                           const RealField* seed = nullptr, const NewtonOptions& opt = {});

// Solves L+ u = -phi.
RealField dlambda_phi(const ModelConfig& model, const RealField& phi, double lambda);

struct DecayFitResult {
  double rate = 0.0;
  double residual = 0.0;  // rms of the log fit
  std::size_t points = 0;
};

DecayFitResult decay_fit(const RealField& phi);

struct SolitonBranch {
  std::vector<double> lambda;
  std::vector<RealField> phi;
  std::vector<RealField> dphi;
  std::vector<double> delta;
  std::vector<double> ddelta;         // centered differences, step dlambda
  std::vector<double> ddelta_pairing; // 2 <phi, d_lambda phi>
  std::vector<double> decay_rate;
  std::vector<double> residual;
  std::vector<bool> unstable;  // ddelta <= 0

  bool stable() const;
};

SolitonBranch branch(const ModelConfig& model, const GridPtr& grid, double lambda_min, double lambda_max,
                     int steps, double dlambda = 1e-3, const NewtonOptions& opt = {});

// Constrained imaginary-time flow at fixed mass; the Lagrange multiplier is the frequency.
struct GradientFlowResult {
  RealField phi;
  double lambda = 0.0;
  int iterations = 0;
  double change = 0.0;
};

GradientFlowResult normalized_gradient_flow(const ModelConfig& model, const GridPtr& grid, double mass,
                                            const RealField* seed = nullptr, double tau = 0.5,
                                            int max_iterations = 20000, double tol = 1e-12);

// Largest h (on a doubling-then-bisection search up to h_max) for which continuation
// from the free soliton still converges to a positive ground state.
double max_continuable_h(const ModelConfig& model, const GridPtr& grid, double lambda, double h_max,
                         const NewtonOptions& opt = {});

}  // namespace solitonlab
