#include "solitonlab/fitting.hpp"

#include "solitonlab/errors.hpp"

#include <unsupported/Eigen/LevenbergMarquardt>

#include <cmath>
#include <limits>
#include <numbers>

namespace solitonlab {

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("linear_fit: size mismatch");
  const std::size_t n = x.size();
  if (n < 3) throw std::invalid_argument("linear_fit: need at least 3 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("linear_fit: degenerate abscissae");
  LinearFit f;
  f.samples = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ssr += r * r;
  }
  const double s2 = ssr / static_cast<double>(n - 2);
  f.slope_stderr = std::sqrt(s2 / sxx);
  f.intercept_stderr = std::sqrt(s2 * (1.0 / static_cast<double>(n) + mx * mx / sxx));
  // a constant series is fitted exactly
  f.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return f;
}

ComplexRegression complex_least_squares(const Eigen::MatrixXcd& A, const CVec& b) {
  if (A.rows() != b.size()) throw std::invalid_argument("complex_least_squares: size mismatch");
  if (A.rows() <= A.cols()) throw std::invalid_argument("complex_least_squares: underdetermined");
  RVec scale(A.cols());
  for (Eigen::Index k = 0; k < A.cols(); ++k) {
    scale[k] = A.col(k).norm();
    if (scale[k] == 0.0) scale[k] = 1.0;
  }
  const Eigen::MatrixXcd As = A * scale.cwiseInverse().cast<cplx>().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(As);
  ComplexRegression out;
  const CVec cs = qr.solve(b);
  out.coeffs = cs.cwiseQuotient(scale.cast<cplx>());
  const CVec r = b - A * out.coeffs;
  const double m = static_cast<double>(A.rows());
  out.residual_rms = r.norm() / std::sqrt(m);
  out.rhs_rms = b.norm() / std::sqrt(m);
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(As);
  const RVec sv = svd.singularValues();
  out.condition = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : std::numeric_limits<double>::infinity();
  // covariance s^2 (As^* As)^{-1}, unscaled afterwards
  const double s2 = r.squaredNorm() / (m - static_cast<double>(A.cols()));
  const Eigen::MatrixXcd gram = As.adjoint() * As;
  const Eigen::MatrixXcd cov = gram.inverse();
  out.standard_error.resize(A.cols());
  for (Eigen::Index k = 0; k < A.cols(); ++k)
    out.standard_error[k] = std::sqrt(s2 * std::abs(cov(k, k).real())) / scale[k];
  return out;
}

namespace {

struct SinusoidResidual {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  using QRSolver = Eigen::ColPivHouseholderQR<JacobianType>;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const std::vector<double>* t;
  const std::vector<double>* y;
  double t0;

  int inputs() const { return 5; }
  int values() const { return static_cast<int>(t->size()); }
  // p = (offset, a, b, damping, omega) with a cos + b sin in the shifted time
  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    for (std::size_t i = 0; i < t->size(); ++i) {
      const double s = (*t)[i] - t0;
      const double e = std::exp(-p[3] * s);
      r[static_cast<Eigen::Index>(i)] = p[0] + e * (p[1] * std::cos(p[4] * s) + p[2] * std::sin(p[4] * s)) - (*y)[i];
    }
    return 0;
  }
  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& J) const {
    for (std::size_t i = 0; i < t->size(); ++i) {
      const double s = (*t)[i] - t0;
      const double e = std::exp(-p[3] * s), c = std::cos(p[4] * s), sn = std::sin(p[4] * s);
      const auto r = static_cast<Eigen::Index>(i);
      J(r, 0) = 1.0;
      J(r, 1) = e * c;
      J(r, 2) = e * sn;
      J(r, 3) = -s * e * (p[1] * c + p[2] * sn);
      J(r, 4) = s * e * (-p[1] * sn + p[2] * c);
    }
    return 0;
  }
};

// Undamped linear fit offset + a cos + b sin at fixed omega; returns the residual sum of squares.
double sinusoid_rss(const std::vector<double>& t, const std::vector<double>& y, double t0, double omega,
                    Eigen::Vector3d* coef) {
  Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double s = t[i] - t0;
    const Eigen::Vector3d row(1.0, std::cos(omega * s), std::sin(omega * s));
    G += row * row.transpose();
    rhs += row * y[i];
  }
  const Eigen::Vector3d c = G.ldlt().solve(rhs);
  double rss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double s = t[i] - t0;
    const double r = c[0] + c[1] * std::cos(omega * s) + c[2] * std::sin(omega * s) - y[i];
    rss += r * r;
  }
  if (coef) *coef = c;
  return rss;
}

}  // namespace

SinusoidFit fit_damped_sinusoid(const std::vector<double>& t, const std::vector<double>& y, double min_periods) {
  if (t.size() != y.size() || t.size() < 10) throw std::invalid_argument("fit_damped_sinusoid: need >= 10 samples");
  const double span = t.back() - t.front();
  const double step = span / static_cast<double>(t.size() - 1);
  const double t0 = t.front();
  const double pi = std::numbers::pi;

  const double w_lo = 2.0 * pi * min_periods / span;
  const double w_hi = pi / step;
  const double dw = 2.0 * pi / (8.0 * span);
  double best_w = w_lo, best_rss = std::numeric_limits<double>::infinity();
  for (double w = w_lo; w <= w_hi; w += dw) {
    const double rss = sinusoid_rss(t, y, t0, w, nullptr);
    if (rss < best_rss) {
      best_rss = rss;
      best_w = w;
    }
  }
  Eigen::Vector3d c;
  sinusoid_rss(t, y, t0, best_w, &c);

  SinusoidResidual fn{&t, &y, t0};
  Eigen::LevenbergMarquardt<SinusoidResidual> lm(fn);
  lm.setXtol(1e-14);
  lm.setFtol(1e-14);
  lm.setMaxfev(4000);
  Eigen::VectorXd p(5);
  p << c[0], c[1], c[2], 0.0, best_w;
  lm.minimize(p);

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double sst = 0.0;
  for (double v : y) sst += (v - mean) * (v - mean);
  Eigen::VectorXd r(t.size());
  fn(p, r);

  SinusoidFit out;
  out.offset = p[0];
  out.damping = p[3];
  out.omega = std::abs(p[4]);
  const double b = p[4] < 0.0 ? -p[2] : p[2];
  out.amplitude = std::hypot(p[1], b) * std::exp(out.damping * t0);
  out.phase = -std::atan2(b, p[1]) - out.omega * t0;
  out.r2 = sst > 0.0 ? 1.0 - r.squaredNorm() / sst : 0.0;
  if (!(out.amplitude > 0.0) || !std::isfinite(out.omega) || out.omega * span / (2.0 * pi) < min_periods ||
      out.r2 < 0.5)
    throw NumericalError(ErrorKind::NoOscillation,
                         "no oscillation with >= " + std::to_string(min_periods) + " periods (r2 " +
                             std::to_string(out.r2) + ")");
  return out;
}

namespace {

template <class V>
V derivative4(const std::vector<double>& t, const V& y, typename V::Scalar nan) {
  const Eigen::Index n = y.size();
  V d = V::Constant(n, nan);
  if (n < 5) return d;
  const double h = (t.back() - t.front()) / static_cast<double>(n - 1);
  for (Eigen::Index i = 2; i + 2 < n; ++i) d[i] = (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h);
  return d;
}

}  // namespace

std::vector<double> centered_derivative(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size()) throw std::invalid_argument("centered_derivative: size mismatch");
  const RVec yv = Eigen::Map<const RVec>(y.data(), static_cast<Eigen::Index>(y.size()));
  const RVec d = derivative4(t, yv, std::numeric_limits<double>::quiet_NaN());
  return {d.data(), d.data() + d.size()};
}

CVec centered_derivative(const std::vector<double>& t, const CVec& y) {
  if (static_cast<Eigen::Index>(t.size()) != y.size()) throw std::invalid_argument("centered_derivative: size mismatch");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return derivative4(t, y, cplx(nan, nan));
}

}  // namespace solitonlab
