#include "solitonlab/collocation.hpp"

#include "solitonlab/fft.hpp"

#include <stdexcept>

namespace solitonlab {

ParitySector::ParitySector(const GridPtr& grid, bool even) : grid_(grid), even_(even) {
  if (grid->mode() != GridMode::line1d) throw std::logic_error("parity sectors need a line1d grid");
  const long half = static_cast<long>(grid->size() / 2);
  for (long m = even ? 0 : 1; m <= (even ? half : half - 1); ++m) offsets_.push_back(m);
  weights_.resize(size());
  for (Eigen::Index i = 0; i < size(); ++i) {
    const long m = offsets_[static_cast<std::size_t>(i)];
    weights_[i] = (m == 0 || m == half) ? grid->dx() : 2.0 * grid->dx();
  }
}

std::size_t ParitySector::full_index(Eigen::Index i) const {
  const std::size_t n = grid_->size();
  return (grid_->center() + static_cast<std::size_t>(offsets_[static_cast<std::size_t>(i)])) % n;
}

namespace {

template <class Vec>
Vec restrict_impl(const ParitySector& s, const Vec& u) {
  Vec r(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) r[i] = u[static_cast<Eigen::Index>(s.full_index(i))];
  return r;
}

template <class Vec>
Vec extend_impl(const ParitySector& s, const Vec& r) {
  const Grid& g = *s.grid();
  Vec u = Vec::Zero(static_cast<Eigen::Index>(g.size()));
  const double sign = s.even() ? 1.0 : -1.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const std::size_t j = s.full_index(i);
    u[static_cast<Eigen::Index>(j)] = r[i];
    const std::size_t jm = g.mirror(j);
    if (jm != j) u[static_cast<Eigen::Index>(jm)] = sign * r[i];
  }
  return u;
}

}  // namespace

RVec ParitySector::restrict_to(const RVec& u) const { return restrict_impl(*this, u); }
CVec ParitySector::restrict_to(const CVec& u) const { return restrict_impl(*this, u); }
RVec ParitySector::extend(const RVec& r) const { return extend_impl(*this, r); }
CVec ParitySector::extend(const CVec& r) const { return extend_impl(*this, r); }

Eigen::MatrixXd ParitySector::second_derivative() const {
  const Grid& g = *grid_;
  const auto n = static_cast<long>(g.size());
  // column of the circulant second-derivative matrix
  CVec delta = CVec::Zero(n);
  delta[0] = 1.0;
  const RVec k2 = -g.wavenumbers().array().square();
  const RVec c = fourier(g.size()).apply_multiplier(delta, k2).real();
  auto at = [&](long d) { return c[((d % n) + n) % n]; };
  const long half = n / 2;
  Eigen::MatrixXd D(size(), size());
  for (Eigen::Index a = 0; a < size(); ++a) {
    const long m = offsets_[static_cast<std::size_t>(a)];
    for (Eigen::Index b = 0; b < size(); ++b) {
      const long mp = offsets_[static_cast<std::size_t>(b)];
      if (mp == 0 || mp == half)
        D(a, b) = at(m - mp);
      else
        D(a, b) = at(m - mp) + (even_ ? 1.0 : -1.0) * at(m + mp);
    }
  }
  return D;
}

Eigen::MatrixXd ParitySector::schrodinger(const RVec& q) const {
  Eigen::MatrixXd A = -second_derivative();
  const RVec qr = restrict_to(q);
  for (Eigen::Index i = 0; i < size(); ++i) A(i, i) += qr[i];
  return A;
}

}  // namespace solitonlab
