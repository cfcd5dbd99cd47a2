#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>

namespace solitonlab {

using cplx = std::complex<double>;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

enum class GridMode { line1d, radial3d };

const char* to_string(GridMode mode);
GridMode grid_mode_from_string(const std::string& s);

// line1d: x_j = -L + j dx on [-L, L), periodic.
// radial3d: staggered r_j = (j + 1/2) dr on (0, R_max], even reflection at r = 0.
class Grid {
 public:
  static std::shared_ptr<const Grid> line(std::size_t n, double half_width);
  static std::shared_ptr<const Grid> radial(std::size_t n, double r_max);

  GridMode mode() const { return mode_; }
  std::size_t size() const { return n_; }
  double half_width() const { return half_width_; }
  double dx() const { return dx_; }
  const RVec& nodes() const { return nodes_; }
  // Quadrature weights: dx on the line, 4 pi r^2 dr radially.
  const RVec& weights() const { return weights_; }
  // Angular wavenumbers in FFT order (line1d only).
  const RVec& wavenumbers() const;

  // Index of the node at -x (line1d); the node x = -L maps to itself.
  std::size_t mirror(std::size_t j) const { return (n_ - j) % n_; }
  std::size_t center() const { return n_ / 2; }

  bool same_as(const Grid& other) const;

 private:
  Grid() = default;
  GridMode mode_ = GridMode::line1d;
  std::size_t n_ = 0;
  double half_width_ = 0.0;
  double dx_ = 0.0;
  RVec nodes_, weights_, k_;
};

using GridPtr = std::shared_ptr<const Grid>;

template <class Scalar>
struct Field {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  GridPtr grid;
  Vec values;

  Field() = default;
  explicit Field(GridPtr g) : grid(std::move(g)), values(Vec::Zero(static_cast<Eigen::Index>(grid->size()))) {}
  Field(GridPtr g, Vec v) : grid(std::move(g)), values(std::move(v)) {
    if (static_cast<std::size_t>(values.size()) != grid->size())
      throw std::invalid_argument("field sample count does not match grid");
  }
  bool finite() const { return values.allFinite(); }
  Scalar operator[](Eigen::Index j) const { return values[j]; }
};

using RealField = Field<double>;
using ComplexField = Field<cplx>;

// (w1, w2); holds Re/Im parts of R, eigen-directions and resolvent outputs.
struct TwoComponentField {
  GridPtr grid;
  CVec first, second;

  TwoComponentField() = default;
  explicit TwoComponentField(GridPtr g)
      : grid(std::move(g)),
        first(CVec::Zero(static_cast<Eigen::Index>(grid->size()))),
        second(CVec::Zero(static_cast<Eigen::Index>(grid->size()))) {}
  TwoComponentField(GridPtr g, CVec a, CVec b);

  bool finite() const { return first.allFinite() && second.allFinite(); }
  TwoComponentField& operator+=(const TwoComponentField& o);
  TwoComponentField& operator-=(const TwoComponentField& o);
  TwoComponentField& operator*=(cplx s);
};

TwoComponentField operator+(TwoComponentField a, const TwoComponentField& b);
TwoComponentField operator-(TwoComponentField a, const TwoComponentField& b);
TwoComponentField operator*(cplx s, TwoComponentField a);
TwoComponentField conj(const TwoComponentField& a);

struct WeightProfile {
  double nu = 0.0;
  RVec samples;  // (1 + |x|^2)^(-nu/2)
};

WeightProfile weight_profile(const Grid& grid, double nu);

// Complex absorbing potential W >= 0: quartic ramp over the outer fraction of the box.
struct AbsorbingLayer {
  bool enabled = true;
  double strength = 0.3;
  double fraction = 0.15;
  RVec profile(const Grid& grid) const;
};

// Spectral (line1d) or 4th-order FD radial Laplacian.
ComplexField laplacian(const ComplexField& u);
RealField laplacian(const RealField& u);
CVec laplacian(const Grid& grid, const CVec& u);
RVec laplacian(const Grid& grid, const RVec& u);
// First derivative (line1d spectral, radial FD).
CVec derivative(const Grid& grid, const CVec& u);
RVec derivative(const Grid& grid, const RVec& u);

double integrate(const Grid& grid, const RVec& f);
cplx integrate(const Grid& grid, const CVec& f);

cplx inner(const ComplexField& u, const ComplexField& v);
double real_pairing(const ComplexField& u, const ComplexField& v);
double symplectic(const ComplexField& u, const ComplexField& v);
cplx inner(const TwoComponentField& u, const TwoComponentField& v);
double real_pairing(const TwoComponentField& u, const TwoComponentField& v);
double symplectic(const TwoComponentField& u, const TwoComponentField& v);

// Raw-array versions used inside the solvers.
cplx inner(const Grid& grid, const CVec& u, const CVec& v);
double dot(const Grid& grid, const RVec& u, const RVec& v);

double norm2(const Grid& grid, const CVec& u);
double norm2(const Grid& grid, const RVec& u);
double norm2(const ComplexField& u);
double norm2(const TwoComponentField& u);
double sup_norm(const CVec& u);

double weighted_norm(const ComplexField& u, double nu);
double weighted_norm(const RealField& u, double nu);
double weighted_norm(const TwoComponentField& u, double nu);

// Parity parts on the periodic line grid.
RVec even_part(const Grid& grid, const RVec& u);
RVec odd_part(const Grid& grid, const RVec& u);
CVec even_part(const Grid& grid, const CVec& u);
CVec odd_part(const Grid& grid, const CVec& u);

// Spectral interpolation of a periodic line-grid sample set at arbitrary points.
RVec fourier_interpolate(const Grid& grid, const RVec& u, const RVec& points);

void write_field_csv(const std::string& path, const ComplexField& u);
void write_field_csv(const std::string& path, const RealField& u);
void write_field_csv(const std::string& path, const TwoComponentField& u);
ComplexField read_field_csv(const std::string& path);

void require_same_grid(const Grid& a, const Grid& b);
void require_finite(const CVec& u, const char* what);
void require_finite(const RVec& u, const char* what);

}  // namespace solitonlab
