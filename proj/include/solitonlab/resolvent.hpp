#pragma once

#include "solitonlab/linearization.hpp"

#include <Eigen/LU>

#include <array>
#include <memory>
#include <vector>

namespace solitonlab {

struct ResolventRequest {
  double mu = 0.0;      // spectral point i mu
  double delta = 0.0;   // solves (L - i mu - delta) w = Pc g
  AbsorbingLayer layer;
  bool project = true;  // apply Pc to the right-hand side
};

struct ResolventSolution {
  TwoComponentField w;
  double residual = 0.0;  // ||(L - i mu - delta - W) w - Pc g|| / ||Pc g||
};

// Dense LU of the parity-reduced block system, factorized once per sector and reused.
// With projection on, c Pd is added to the matrix so that gap points stay invertible; the
// solution of a Pc right-hand side then lies in Ran Pc.
class ResolventSolver {
 public:
  ResolventSolver(const LinearizedOperator& op, const RieszProjection& P, const ResolventRequest& req);
  ResolventSolution solve(const TwoComponentField& g) const;
  const ResolventRequest& request() const { return req_; }

 private:
  const Eigen::PartialPivLU<Eigen::MatrixXcd>& factor(bool even) const;
  const LinearizedOperator& op_;
  const RieszProjection& P_;
  ResolventRequest req_;
  RVec W_;
  mutable std::array<std::unique_ptr<Eigen::PartialPivLU<Eigen::MatrixXcd>>, 2> lu_;
};

ResolventSolution resolvent_apply(const LinearizedOperator& op, const RieszProjection& P, const ResolventRequest& req,
                                  const TwoComponentField& g);

// ||Im u1|| + ||Re u2|| over ||u||: distance from the (real, i real) form.
double admissibility_residual(const TwoComponentField& u);

// f'(phi^2) phi (-2i xi eta, 3 xi^2 - eta^2) + (0, 2 f''(phi^2) phi^3 xi^2): the quadratic
// self-interaction of the internal mode.
TwoComponentField internal_mode_source(const LinearizedOperator& op, const SpectralData& spec);
// f'(phi^2) phi (0, 3 xi^2 + eta^2) + (0, 2 f''(phi^2) phi^3 xi^2)
TwoComponentField mixed_source(const LinearizedOperator& op, const SpectralData& spec);

// The outgoing wavelength at 2 eps is comparable to 15% of the box, so the resolvent uses a
// wider, gentler ramp than the time stepper.
inline AbsorbingLayer resolvent_layer() { return {true, 0.3, 0.4}; }

struct FgrOptions {
  std::vector<double> deltas{1e-2, 5e-3, 2.5e-3};
  AbsorbingLayer layer = resolvent_layer();
  bool compute_plus = true;  // also the (L - 2i eps + 0) limit
};

struct FgrEstimate {
  double delta = 0.0;
  cplx Y;
};

struct FgrResult {
  int N = 1;
  std::vector<FgrEstimate> minus;  // (L - 2i eps - delta), delta -> 0+
  std::vector<FgrEstimate> plus;   // (L - 2i eps + delta)
  cplx Y;                          // Richardson value of the "-0" sequence
  cplx Y_plus;
  double richardson_spread = 0.0;  // relative change between the last two Richardson values
  double max_step_change = 0.0;    // largest relative change between successive raw estimates
  double box_sensitivity = -1.0;   // relative change against a larger box, -1 if not computed
  double compare_half_width = 0.0;
  cplx Y_compare;
  TwoComponentField resolvent_2eps;  // Richardson-extrapolated (L - 2i eps - 0)^{-1} Pc G
};

// Re Y1 = Im <s1 (L - 2i eps - 0)^{-1} F, F>, F = Pc G / (2 sqrt<xi,eta>), s1 = [[0,-1],[1,0]].
FgrResult fgr_coefficient(const LinearizedOperator& op, const SpectralData& spec, const FgrOptions& opt = {});
// Repeats the computation on a box of the given half width (same n) and fills the sensitivity.
void fgr_box_check(FgrResult& res, const ModelConfig& model, std::size_t n, double half_width,
                   const FgrOptions& opt = {});

struct ExpansionCoefficient {
  int m = 0, n = 0;
  TwoComponentField field;
  double admissibility = 0.0;
  double tail_rate = 0.0;
};

// (2,0), (1,1), (0,2); (2,0) reuses the extrapolated 2 eps solve of an FgrResult when given.
ExpansionCoefficient compute_Rmn(const LinearizedOperator& op, const SpectralData& spec, int m, int n,
                                 const FgrResult* fgr = nullptr, const FgrOptions& opt = {});

// Exponential rate of |u| = sqrt(|u1|^2 + |u2|^2) on x > 0 outside the absorbing layer.
double tail_decay_rate(const TwoComponentField& u, double fraction = 0.15);

}  // namespace solitonlab
