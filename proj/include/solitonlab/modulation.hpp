#pragma once

#include "solitonlab/dynamics.hpp"
#include "solitonlab/fitting.hpp"
#include "solitonlab/grid.hpp"
#include "solitonlab/linearization.hpp"
#include "solitonlab/model.hpp"

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace solitonlab {

// phi, d_lambda phi, xi, eta at one lambda, with their lambda derivatives.
struct BasisSample {
  double lambda = 0.0;
  RVec phi, dphi, xi, eta;
  RVec phi_l, dphi_l, xi_l, eta_l;
  double epsilon = 0.0, epsilon_l = 0.0;
  double ddelta = 0.0;  // 2 <phi, d_lambda phi>
};

// Nodes every `spacing` around lambda0, computed on first use; cubic Hermite in between.
class ModulationBasis {
 public:
  ModulationBasis(const ModelConfig& model, const GridPtr& grid, double lambda0, double spacing = 2e-3,
                  double half_range = 0.05);
  BasisSample at(double lambda) const;
  const GridPtr& grid() const { return grid_; }
  const ModelConfig& model() const { return model_; }
  double lambda0() const { return lambda0_; }
  double lambda_min() const { return lambda0_ - half_range_; }
  double lambda_max() const { return lambda0_ + half_range_; }

 private:
  struct Node {
    BasisSample s;
  };
  const Node& node(int k) const;
  ModelConfig model_;
  GridPtr grid_;
  double lambda0_, spacing_, half_range_;
  mutable std::mutex mutex_;
  mutable std::map<int, std::unique_ptr<Node>> nodes_;
};

struct ModulationGuess {
  double theta = 0.0;
  double lambda = 0.0;
  cplx z;  // z1 - i z2
};

struct ModulationPoint {
  double t = 0.0;
  double theta = 0.0;  // unwrapped total phase
  double lambda = 0.0;
  cplx z;              // z1 - i z2
  ComplexField R;      // empty unless requested
  double R_w2norm = 0.0;
  double R_inf = 0.0;
  std::array<double, 4> residuals{};  // orthogonality conditions over ||psi||
  int iterations = 0;
};

struct DecomposeOptions {
  double nu = 4.0;
  double tol = 1e-13;      // Newton target on the scaled conditions
  double accept = 1e-10;   // acceptance threshold
  int max_iterations = 50;
  bool keep_R = false;
};

// psi = e^{i Theta} (phi^lambda + z1 xi + i z2 eta + R) with R symplectically orthogonal to
// the discrete modes: int R1 phi = int R2 d_lambda phi = int R1 eta = int R2 xi = 0.
ModulationPoint decompose(const ComplexField& psi, const ModulationBasis& basis, const ModulationGuess& guess,
                          const DecomposeOptions& opt = {});

// e^{i Theta} (phi + z1 xi + i z2 eta + R)
ComplexField reconstruct(const ModulationPoint& p, const ModulationBasis& basis);

// phi^lambda + z1 xi + i z2 eta
ComplexField perturbed_soliton(const ModulationBasis& basis, double lambda, cplx z);

struct ModulationSeries {
  std::vector<ModulationPoint> points;
  bool truncated = false;
  double failure_time = 0.0;
  std::string failure;

  std::vector<double> times() const;
  CVec z() const;
  std::vector<double> lambda() const;
};

// Warm-started decomposition of successive snapshots. After the first failure the tracker
// records the failure and ignores further input.
class Tracker {
 public:
  Tracker(const ModulationBasis& basis, const ModulationGuess& initial, const DecomposeOptions& opt = {});
  bool push(double t, const ComplexField& psi);
  const ModulationSeries& series() const { return series_; }
  ModulationSeries take() { return std::move(series_); }

 private:
  const ModulationBasis& basis_;
  ModulationGuess guess_;
  DecomposeOptions opt_;
  ModulationSeries series_;
};

ModulationSeries track(const EvolutionResult& evolution, const ModulationBasis& basis, const ModulationGuess& initial,
                       const DecomposeOptions& opt = {});

// z' = c1 z + q20 z^2 + q11 |z|^2 + q02 zbar^2 + c21 |z|^2 z
struct ZOdeCoefficients {
  cplx linear, q20, q11, q02, cubic;
  RVec standard_error;  // same order
  double residual_rms = 0.0;
  double derivative_rms = 0.0;
  double condition = 0.0;
  std::size_t samples = 0;

  double epsilon_fit() const { return linear.imag(); }
  double max_quadratic() const;
};

struct FitWindow {
  double t1 = 0.0;
  double t2 = 1e300;
};

// Derivatives by fourth-order centered differences of each series (uniform spacing), end
// points dropped; the samples of all series are stacked into one regression.
ZOdeCoefficients fit_z_ode(const std::vector<CVec>& z, const std::vector<std::vector<double>>& t,
                           const FitWindow& window = {});
ZOdeCoefficients fit_z_ode(const std::vector<const ModulationSeries*>& series, const FitWindow& window = {});

struct NormalFormModel {
  // beta = z + b20 z^2 + b11 |z|^2 + b02 zbar^2, b_mn = -q_mn / (i (m - n - 1) eps)
  cplx b20, b11, b02;
  double epsilon = 0.0;
  std::vector<CVec> beta;
  ZOdeCoefficients z_fit, beta_fit;
  double quadratic_reduction = 0.0;  // max |q_mn(z)| / max |q_mn(beta)|
  double near_identity = 0.0;        // max |beta - z| / |z|^2
  double imag_ratio = 0.0;           // max |Im b_mn| / |b_mn|
  double ReY1_dyn = 0.0;
  double riccati_r2 = 0.0;
  double lambda_inf = 0.0;
};

cplx apply_normal_form(const NormalFormModel& nf, cplx z);

NormalFormModel normal_form_quadratic(const std::vector<CVec>& z, const std::vector<std::vector<double>>& t,
                                      const ZOdeCoefficients& coeffs, const FitWindow& window = {});

struct RiccatiFit {
  double ReY1 = 0.0;
  double beta0 = 0.0;  // |beta| at t = 0 from the intercept
  double slope = 0.0, slope_stderr = 0.0;
  double r2 = 0.0;
  std::size_t samples = 0;
};

// |beta|^{-2} = |beta0|^{-2} - 2 Re Y1 t
RiccatiFit riccati_fit(const std::vector<double>& t, const CVec& beta, const FitWindow& window = {});

struct LambdaLimit {
  double lambda_inf = 0.0;
  bool constant = false;  // |lambda - lambda_inf| below 1e-12 throughout
  DecayFit tail;
  bool decreasing = false;
  double early_mean = 0.0, late_mean = 0.0;
  double ddelta = 0.0;
  bool on_stable_branch = false;
};

// lambda_inf = lambda at the last point; tail exponent fitted on [t1, t_end - margin].
LambdaLimit lambda_limit(const ModulationSeries& series, const ModulationBasis& basis, double t1,
                         double margin = 10.0);

struct NewtonLawReport {
  SinusoidFit fit;
  double epsilon = 0.0;
  double relative_frequency_error = 0.0;
  double adot_mismatch = 0.0;  // max |a'/2 - p| / max |p|
  double amplitude_early = 0.0, amplitude_late = 0.0;
  double t_early = 100.0, t_late = 800.0;
};

NewtonLawReport newton_law_check(const std::vector<SeriesRow>& series, double epsilon, const FitWindow& window = {},
                                 double t_early = 100.0, double t_late = 800.0);

// lambda' = Re(L20) Re z^2 ... as a real regression on (Re z^2, Im z^2, |z|^2).
struct LambdaDotRegression {
  Eigen::Vector3d coeffs = Eigen::Vector3d::Zero();
  Eigen::Vector3d standard_error = Eigen::Vector3d::Zero();
  double diagonal_t = 0.0;      // |coeff of |z|^2| / its standard error
  double diagonal_ratio = 0.0;  // |coeff of |z|^2| / |coeff of z^2|
  std::size_t samples = 0;
};

LambdaDotRegression lambda_dot_regression(const ModulationSeries& series, const FitWindow& window = {});

}  // namespace solitonlab
