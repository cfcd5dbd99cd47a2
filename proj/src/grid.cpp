#include "solitonlab/grid.hpp"

#include "solitonlab/fft.hpp"
#include "solitonlab/io.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace solitonlab {

const char* to_string(GridMode mode) { return mode == GridMode::line1d ? "line1d" : "radial3d"; }

GridMode grid_mode_from_string(const std::string& s) {
  if (s == "line1d") return GridMode::line1d;
  if (s == "radial3d") return GridMode::radial3d;
  throw std::invalid_argument("unknown grid mode '" + s + "'");
}

GridPtr Grid::line(std::size_t n, double half_width) {
  if (n < 8 || (n & (n - 1)) != 0) throw std::invalid_argument("line1d grid size must be a power of two >= 8");
  if (!(half_width > 0.0) || !std::isfinite(half_width)) throw std::invalid_argument("half width must be positive");
  auto g = std::shared_ptr<Grid>(new Grid());
  g->mode_ = GridMode::line1d;
  g->n_ = n;
  g->half_width_ = half_width;
  g->dx_ = 2.0 * half_width / static_cast<double>(n);
  const auto ni = static_cast<Eigen::Index>(n);
  g->nodes_.resize(ni);
  g->k_.resize(ni);
  for (Eigen::Index j = 0; j < ni; ++j) {
    g->nodes_[j] = -half_width + static_cast<double>(j) * g->dx_;
    const Eigen::Index m = j < ni / 2 ? j : j - ni;
    g->k_[j] = std::numbers::pi * static_cast<double>(m) / half_width;
  }
  g->weights_ = RVec::Constant(ni, g->dx_);
  return g;
}

GridPtr Grid::radial(std::size_t n, double r_max) {
  if (n < 8) throw std::invalid_argument("radial grid needs at least 8 points");
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw std::invalid_argument("R_max must be positive");
  auto g = std::shared_ptr<Grid>(new Grid());
  g->mode_ = GridMode::radial3d;
  g->n_ = n;
  g->half_width_ = r_max;
  g->dx_ = r_max / static_cast<double>(n);
  const auto ni = static_cast<Eigen::Index>(n);
  g->nodes_.resize(ni);
  g->weights_.resize(ni);
  for (Eigen::Index j = 0; j < ni; ++j) {
    const double r = (static_cast<double>(j) + 0.5) * g->dx_;
    g->nodes_[j] = r;
    g->weights_[j] = 4.0 * std::numbers::pi * r * r * g->dx_;
  }
  return g;
}

const RVec& Grid::wavenumbers() const {
  if (mode_ != GridMode::line1d) throw std::logic_error("wavenumbers exist only on line1d grids");
  return k_;
}

bool Grid::same_as(const Grid& other) const {
  return this == &other ||
         (mode_ == other.mode_ && n_ == other.n_ && half_width_ == other.half_width_);
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (!a.same_as(b)) throw std::invalid_argument("grid mismatch");
}

void require_finite(const CVec& u, const char* what) {
  if (!u.allFinite()) throw std::invalid_argument(std::string("non-finite values in ") + what);
}

void require_finite(const RVec& u, const char* what) {
  if (!u.allFinite()) throw std::invalid_argument(std::string("non-finite values in ") + what);
}

TwoComponentField::TwoComponentField(GridPtr g, CVec a, CVec b)
    : grid(std::move(g)), first(std::move(a)), second(std::move(b)) {
  const auto n = static_cast<Eigen::Index>(grid->size());
  if (first.size() != n || second.size() != n) throw std::invalid_argument("component length does not match grid");
}

TwoComponentField& TwoComponentField::operator+=(const TwoComponentField& o) {
  require_same_grid(*grid, *o.grid);
  first += o.first;
  second += o.second;
  return *this;
}

TwoComponentField& TwoComponentField::operator-=(const TwoComponentField& o) {
  require_same_grid(*grid, *o.grid);
  first -= o.first;
  second -= o.second;
  return *this;
}

TwoComponentField& TwoComponentField::operator*=(cplx s) {
  first *= s;
  second *= s;
  return *this;
}

TwoComponentField operator+(TwoComponentField a, const TwoComponentField& b) { return a += b; }
TwoComponentField operator-(TwoComponentField a, const TwoComponentField& b) { return a -= b; }
TwoComponentField operator*(cplx s, TwoComponentField a) { return a *= s; }
TwoComponentField conj(const TwoComponentField& a) { return {a.grid, a.first.conjugate(), a.second.conjugate()}; }

WeightProfile weight_profile(const Grid& grid, double nu) {
  if (!(nu >= 0.0)) throw std::invalid_argument("weight exponent must be non-negative");
  WeightProfile w;
  w.nu = nu;
  w.samples = (1.0 + grid.nodes().array().square()).pow(-0.5 * nu).matrix();
  return w;
}

RVec AbsorbingLayer::profile(const Grid& grid) const {
  RVec W = RVec::Zero(static_cast<Eigen::Index>(grid.size()));
  if (!enabled || strength == 0.0) return W;
  const double L = grid.half_width();
  const double width = fraction * L;
  for (Eigen::Index j = 0; j < W.size(); ++j) {
    const double d = std::abs(grid.nodes()[j]) - (L - width);
    if (d > 0.0) W[j] = strength * std::pow(d / width, 4);
  }
  return W;
}

namespace {

// Index with even reflection through r = 0 on the staggered radial grid; zero beyond R_max.
template <class Vec>
typename Vec::Scalar radial_at(const Vec& u, Eigen::Index j) {
  const Eigen::Index n = u.size();
  if (j < 0) j = -j - 1;
  if (j >= n) return typename Vec::Scalar(0);
  return u[j];
}

template <class Vec>
Vec radial_laplacian(const Grid& g, const Vec& u) {
  const double h = g.dx();
  const Eigen::Index n = u.size();
  Vec out(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto m2 = radial_at(u, j - 2), m1 = radial_at(u, j - 1), p1 = radial_at(u, j + 1),
               p2 = radial_at(u, j + 2);
    const auto d2 = (-p2 + 16.0 * p1 - 30.0 * u[j] + 16.0 * m1 - m2) / (12.0 * h * h);
    const auto d1 = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
    out[j] = d2 + 2.0 / g.nodes()[j] * d1;
  }
  return out;
}

template <class Vec>
Vec radial_derivative(const Grid& g, const Vec& u) {
  const double h = g.dx();
  const Eigen::Index n = u.size();
  Vec out(n);
  for (Eigen::Index j = 0; j < n; ++j)
    out[j] = (-radial_at(u, j + 2) + 8.0 * radial_at(u, j + 1) - 8.0 * radial_at(u, j - 1) + radial_at(u, j - 2)) /
             (12.0 * h);
  return out;
}

}  // namespace

CVec laplacian(const Grid& grid, const CVec& u) {
  if (grid.mode() == GridMode::radial3d) return radial_laplacian(grid, u);
  const RVec m = -grid.wavenumbers().array().square().matrix();
  return fourier(grid.size()).apply_multiplier(u, m);
}

RVec laplacian(const Grid& grid, const RVec& u) {
  if (grid.mode() == GridMode::radial3d) return radial_laplacian(grid, u);
  return laplacian(grid, CVec(u.cast<cplx>())).real();
}

CVec derivative(const Grid& grid, const CVec& u) {
  if (grid.mode() == GridMode::radial3d) return radial_derivative(grid, u);
  const auto& k = grid.wavenumbers();
  CVec m = (cplx(0, 1) * k.cast<cplx>()).eval();
  m[static_cast<Eigen::Index>(grid.size() / 2)] = 0.0;  // Nyquist mode has no odd partner
  return fourier(grid.size()).apply_multiplier(u, m);
}

RVec derivative(const Grid& grid, const RVec& u) {
  if (grid.mode() == GridMode::radial3d) return radial_derivative(grid, u);
  return derivative(grid, CVec(u.cast<cplx>())).real();
}

ComplexField laplacian(const ComplexField& u) {
  require_finite(u.values, "laplacian input");
  return {u.grid, laplacian(*u.grid, u.values)};
}

RealField laplacian(const RealField& u) {
  require_finite(u.values, "laplacian input");
  return {u.grid, laplacian(*u.grid, u.values)};
}

double integrate(const Grid& grid, const RVec& f) { return grid.weights().dot(f); }

cplx integrate(const Grid& grid, const CVec& f) { return (grid.weights().cast<cplx>().array() * f.array()).sum(); }

cplx inner(const Grid& grid, const CVec& u, const CVec& v) {
  return (grid.weights().cast<cplx>().array() * u.conjugate().array() * v.array()).sum();
}

double dot(const Grid& grid, const RVec& u, const RVec& v) {
  return (grid.weights().array() * u.array() * v.array()).sum();
}

cplx inner(const ComplexField& u, const ComplexField& v) {
  require_same_grid(*u.grid, *v.grid);
  return inner(*u.grid, u.values, v.values);
}

double real_pairing(const ComplexField& u, const ComplexField& v) { return inner(u, v).real(); }
double symplectic(const ComplexField& u, const ComplexField& v) { return inner(u, v).imag(); }

cplx inner(const TwoComponentField& u, const TwoComponentField& v) {
  require_same_grid(*u.grid, *v.grid);
  return inner(*u.grid, u.first, v.first) + inner(*u.grid, u.second, v.second);
}

double real_pairing(const TwoComponentField& u, const TwoComponentField& v) { return inner(u, v).real(); }
double symplectic(const TwoComponentField& u, const TwoComponentField& v) { return inner(u, v).imag(); }

double norm2(const Grid& grid, const CVec& u) {
  return std::sqrt((grid.weights().array() * u.array().abs2()).sum());
}

double norm2(const Grid& grid, const RVec& u) { return std::sqrt((grid.weights().array() * u.array().square()).sum()); }

double norm2(const ComplexField& u) { return norm2(*u.grid, u.values); }

double norm2(const TwoComponentField& u) {
  const double a = norm2(*u.grid, u.first), b = norm2(*u.grid, u.second);
  return std::sqrt(a * a + b * b);
}

double sup_norm(const CVec& u) { return u.size() ? u.cwiseAbs().maxCoeff() : 0.0; }

double weighted_norm(const ComplexField& u, double nu) {
  const auto w = weight_profile(*u.grid, nu);
  return norm2(*u.grid, CVec(u.values.array() * w.samples.cast<cplx>().array()));
}

double weighted_norm(const RealField& u, double nu) {
  const auto w = weight_profile(*u.grid, nu);
  return norm2(*u.grid, RVec(u.values.array() * w.samples.array()));
}

double weighted_norm(const TwoComponentField& u, double nu) {
  const auto w = weight_profile(*u.grid, nu);
  const CVec ws = w.samples.cast<cplx>();
  const double a = norm2(*u.grid, CVec(u.first.array() * ws.array()));
  const double b = norm2(*u.grid, CVec(u.second.array() * ws.array()));
  return std::sqrt(a * a + b * b);
}

namespace {
template <class Vec>
Vec parity_part(const Grid& grid, const Vec& u, double sign) {
  if (grid.mode() != GridMode::line1d) throw std::logic_error("parity split needs a line1d grid");
  Vec out(u.size());
  for (Eigen::Index j = 0; j < u.size(); ++j)
    out[j] = 0.5 * (u[j] + sign * u[static_cast<Eigen::Index>(grid.mirror(static_cast<std::size_t>(j)))]);
  return out;
}
}  // namespace

RVec even_part(const Grid& grid, const RVec& u) { return parity_part(grid, u, 1.0); }
RVec odd_part(const Grid& grid, const RVec& u) { return parity_part(grid, u, -1.0); }
CVec even_part(const Grid& grid, const CVec& u) { return parity_part(grid, u, 1.0); }
CVec odd_part(const Grid& grid, const CVec& u) { return parity_part(grid, u, -1.0); }

RVec fourier_interpolate(const Grid& grid, const RVec& u, const RVec& points) {
  if (grid.mode() != GridMode::line1d) throw std::logic_error("fourier interpolation needs a line1d grid");
  const auto n = static_cast<Eigen::Index>(grid.size());
  const CVec c = fourier(grid.size()).forward(CVec(u.cast<cplx>())) / static_cast<double>(n);
  const auto& k = grid.wavenumbers();
  const double L = grid.half_width();
  RVec out(points.size());
  for (Eigen::Index p = 0; p < points.size(); ++p) {
    const double s = points[p] + L;
    double acc = c[0].real();
    for (Eigen::Index j = 1; j < n / 2; ++j) acc += 2.0 * (c[j] * std::polar(1.0, k[j] * s)).real();
    acc += (c[n / 2] * std::cos(std::numbers::pi * static_cast<double>(n / 2) * s / L)).real();
    out[p] = acc;
  }
  return out;
}

namespace {
void write_grid_header(std::ostringstream& os, const Grid& g) {
  os << "# mode=" << to_string(g.mode()) << " n=" << g.size() << " L=" << fmt17(g.half_width()) << "\n";
}
}  // namespace

void write_field_csv(const std::string& path, const ComplexField& u) {
  std::ostringstream os;
  write_grid_header(os, *u.grid);
  os << (u.grid->mode() == GridMode::line1d ? "x" : "r") << ",re,im\n";
  for (Eigen::Index j = 0; j < u.values.size(); ++j)
    os << fmt17(u.grid->nodes()[j]) << ',' << fmt17(u.values[j].real()) << ',' << fmt17(u.values[j].imag()) << '\n';
  atomic_write(path, os.str());
}

void write_field_csv(const std::string& path, const RealField& u) {
  write_field_csv(path, ComplexField(u.grid, u.values.cast<cplx>()));
}

void write_field_csv(const std::string& path, const TwoComponentField& u) {
  std::ostringstream os;
  write_grid_header(os, *u.grid);
  os << (u.grid->mode() == GridMode::line1d ? "x" : "r") << ",re1,im1,re2,im2\n";
  for (Eigen::Index j = 0; j < u.first.size(); ++j)
    os << fmt17(u.grid->nodes()[j]) << ',' << fmt17(u.first[j].real()) << ',' << fmt17(u.first[j].imag()) << ','
       << fmt17(u.second[j].real()) << ',' << fmt17(u.second[j].imag()) << '\n';
  atomic_write(path, os.str());
}

ComplexField read_field_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  if (t.comments.empty()) throw std::runtime_error("field file without grid header: " + path);
  std::istringstream hs(t.comments.front());
  std::string tok, mode;
  std::size_t n = 0;
  double L = 0.0;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const auto key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "mode") mode = val;
    else if (key == "n") n = std::stoul(val);
    else if (key == "L") L = std::stod(val);
  }
  GridPtr g = grid_mode_from_string(mode) == GridMode::line1d ? Grid::line(n, L) : Grid::radial(n, L);
  if (t.rows.size() != n) throw std::runtime_error("field row count does not match header in " + path);
  CVec v(static_cast<Eigen::Index>(n));
  const auto re = t.column("re"), im = t.column("im");
  for (std::size_t j = 0; j < n; ++j) v[static_cast<Eigen::Index>(j)] = cplx(t.rows[j][re], t.rows[j][im]);
  return {g, v};
}

}  // namespace solitonlab
