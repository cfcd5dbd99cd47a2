#pragma once

#include "solitonlab/grid.hpp"

#include <cstddef>

namespace solitonlab {

// Thin FFTW wrapper. Plans are created once per size with FFTW_ESTIMATE, so
// transforms are bitwise reproducible run to run; execution is thread-safe.
class Fourier {
 public:
  explicit Fourier(std::size_t n);
  ~Fourier();
  Fourier(const Fourier&) = delete;
  Fourier& operator=(const Fourier&) = delete;

  std::size_t size() const { return n_; }
  void forward(const cplx* in, cplx* out) const;
  // Includes the 1/n normalization.
  void backward(const cplx* in, cplx* out) const;

  CVec forward(const CVec& u) const;
  CVec backward(const CVec& u) const;
  // ifft(m .* fft(u))
  CVec apply_multiplier(const CVec& u, const RVec& m) const;
  CVec apply_multiplier(const CVec& u, const CVec& m) const;

 private:
  std::size_t n_;
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
};

const Fourier& fourier(std::size_t n);

}  // namespace solitonlab
