#pragma once

#include "solitonlab/grid.hpp"
#include "solitonlab/model.hpp"

#include <vector>

namespace solitonlab {

// L = [[0, L-], [-L+, 0]] around a converged soliton, L+- = -Delta + q+-.
struct LinearizedOperator {
  ModelConfig model;
  GridPtr grid;
  double lambda = 0.0;
  RVec phi, dphi;   // phi and d_lambda phi
  RVec q_plus, q_minus;
  double ddelta = 0.0;  // delta'(lambda) = 2 <phi, d_lambda phi>

  RVec apply_plus(const RVec& u) const;
  RVec apply_minus(const RVec& u) const;
  CVec apply_plus(const CVec& u) const;
  CVec apply_minus(const CVec& u) const;
  TwoComponentField apply_L(const TwoComponentField& w) const;
};

// Solves for phi (continuation from the free soliton) and d_lambda phi.
LinearizedOperator linearize(const ModelConfig& model, const GridPtr& grid, double lambda);
LinearizedOperator linearize(const ModelConfig& model, const RealField& phi, double lambda);

struct SpectralData {
  double lambda = 0.0;
  double epsilon = 0.0;
  RVec xi, eta;
  double pairing_xi_eta = 0.0;
  double ddelta = 0.0;
  int N = 0;
  double residual_plus = 0.0;   // ||L+ xi - eps eta||
  double residual_minus = 0.0;  // ||L- eta - eps xi||
  int iterations = 0;
};

// Internal mode from L- L+ xi = eps^2 xi in the odd sector, by Rayleigh quotient iteration.
// Normalization: ||xi|| = sqrt(2) ||phi_x||, <xi, phi_x> > 0, eta = L+ xi / eps.
SpectralData discrete_spectrum(const LinearizedOperator& op);

// Dense eigenvalues nu of the sector-reduced L- L+ (ascending), through the
// symmetric form L-^(1/2) L+ L-^(1/2).
struct SectorSpectrum {
  bool even = true;
  RVec nu;
  Eigen::MatrixXd vectors;  // columns: L-^(1/2) y, i.e. xi-type profiles on the sector
};
SectorSpectrum dense_sector_spectrum(const LinearizedOperator& op, bool even);
// Dense oracle for the internal mode, normalized like discrete_spectrum.
SpectralData dense_discrete_spectrum(const LinearizedOperator& op);

struct ModeCount {
  int total = 0;              // standard plus associated eigenvectors with |Im| < lambda
  int zero_modes = 0;
  int internal_pairs = 0;
  double min_nu = 0.0;        // negative would mean a real eigenvalue pair
  double max_real_part = 0.0;
};
ModeCount discrete_mode_count(const LinearizedOperator& op, double zero_tol = 1e-9);

class RieszProjection {
 public:
  RieszProjection(const LinearizedOperator& op, const SpectralData& spec);
  TwoComponentField discrete(const TwoComponentField& w) const;
  TwoComponentField continuous(const TwoComponentField& w) const;
  // Coefficients of (0, phi), (d_lambda phi, 0), (xi, i eta), (xi, -i eta).
  std::vector<cplx> coefficients(const TwoComponentField& w) const;
  std::vector<TwoComponentField> basis() const;
  // f_k with coefficient k = int (f_k1 w1 + f_k2 w2), no conjugation.
  std::vector<TwoComponentField> functionals() const;
  double epsilon() const { return eps_; }

 private:
  GridPtr grid_;
  RVec phi_, dphi_, xi_, eta_;
  double ddelta_, pairing_, eps_;
};

int fgr_order(double epsilon, double lambda);

struct ResonanceProbe {
  int sign = 1;                  // threshold at sign * i lambda
  double indicator = 0.0;        // min over parity sectors of sigma_min / sigma_max
  double indicator_even = 0.0;
  double indicator_odd = 0.0;
  double threshold = 1e-3;
  bool resonance = false;
  double matching_point = 0.0;
};

// Matching determinant of the threshold equation (L - mu) h = 0, shot from x = 0 to the far
// field. free_problem drops V_h and the soliton terms (the resonant free operator).
ResonanceProbe resonance_indicator(const LinearizedOperator& op, int sign, double threshold = 1e-3,
                                   bool free_problem = false);

}  // namespace solitonlab
