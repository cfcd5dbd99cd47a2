#include "solitonlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

namespace solitonlab {

namespace {
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fourier::Fourier(std::size_t n) : n_(n) {
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto* a = fftw_alloc_complex(n);
  auto* b = fftw_alloc_complex(n);
  const int ni = static_cast<int>(n);
  fwd_ = fftw_plan_dft_1d(ni, a, b, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  bwd_ = fftw_plan_dft_1d(ni, a, b, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(a);
  fftw_free(b);
}

Fourier::~Fourier() {
  std::lock_guard<std::mutex> lock(plan_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void Fourier::forward(const cplx* in, cplx* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void Fourier::backward(const cplx* in, cplx* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(bwd_), reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
  const double s = 1.0 / static_cast<double>(n_);
  for (std::size_t j = 0; j < n_; ++j) out[j] *= s;
}

CVec Fourier::forward(const CVec& u) const {
  CVec out(u.size());
  forward(u.data(), out.data());
  return out;
}

CVec Fourier::backward(const CVec& u) const {
  CVec out(u.size());
  backward(u.data(), out.data());
  return out;
}

CVec Fourier::apply_multiplier(const CVec& u, const RVec& m) const {
  CVec h = forward(u);
  h.array() *= m.array();
  return backward(h);
}

CVec Fourier::apply_multiplier(const CVec& u, const CVec& m) const {
  CVec h = forward(u);
  h.array() *= m.array();
  return backward(h);
}

const Fourier& fourier(std::size_t n) {
  static std::mutex cache_mutex;
  static std::map<std::size_t, std::unique_ptr<Fourier>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Fourier>(n);
  return *slot;
}

}  // namespace solitonlab
