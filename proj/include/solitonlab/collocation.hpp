#pragma once

#include "solitonlab/grid.hpp"

namespace solitonlab {

// Parity-reduced Fourier collocation on a line grid. Even functions are stored at
// x = m dx for m = 0..n/2 (m = n/2 is the shared node x = -L), odd ones at m = 1..n/2-1.
class ParitySector {
 public:
  ParitySector(const GridPtr& grid, bool even);

  bool even() const { return even_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(offsets_.size()); }
  const GridPtr& grid() const { return grid_; }
  // Quadrature weight of each reduced unknown for integrals over the full line.
  const RVec& weights() const { return weights_; }

  std::size_t full_index(Eigen::Index i) const;
  RVec restrict_to(const RVec& u) const;
  CVec restrict_to(const CVec& u) const;
  RVec extend(const RVec& r) const;
  CVec extend(const CVec& r) const;

  // Reduced matrix of the spectral second derivative.
  Eigen::MatrixXd second_derivative() const;
  // Reduced matrix of -Delta + diag(q) for an even potential q.
  Eigen::MatrixXd schrodinger(const RVec& q) const;

 private:
  GridPtr grid_;
  bool even_;
  std::vector<long> offsets_;
  RVec weights_;
};

}  // namespace solitonlab
