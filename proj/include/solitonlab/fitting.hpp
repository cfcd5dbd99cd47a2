#pragma once

#include "solitonlab/grid.hpp"

#include <cstddef>
#include <vector>

namespace solitonlab {

struct LinearFit {
  double slope = 0.0, intercept = 0.0;
  double slope_stderr = 0.0, intercept_stderr = 0.0;
  double r2 = 0.0;
  std::size_t samples = 0;
};

// Ordinary least squares y = intercept + slope x.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct ComplexRegression {
  CVec coeffs;
  RVec standard_error;  // per coefficient, from the complex residual variance
  double residual_rms = 0.0;
  double rhs_rms = 0.0;
  double condition = 0.0;  // of the column-scaled design matrix
};

// min ||A c - b|| through column-pivoted QR on the column-normalized design.
ComplexRegression complex_least_squares(const Eigen::MatrixXcd& A, const CVec& b);

// y ~ offset + amplitude exp(-damping t) cos(omega t + phase)
struct SinusoidFit {
  double omega = 0.0, amplitude = 0.0, phase = 0.0, damping = 0.0, offset = 0.0;
  double r2 = 0.0;
};

// Periodogram scan for the frequency, then Levenberg-Marquardt on all five parameters.
// Throws NoOscillation when fewer than min_periods periods fit into the data.
SinusoidFit fit_damped_sinusoid(const std::vector<double>& t, const std::vector<double>& y,
                                double min_periods = 5.0);

// Fourth-order centered differences on a uniform grid; the first and last two entries are NaN.
std::vector<double> centered_derivative(const std::vector<double>& t, const std::vector<double>& y);
CVec centered_derivative(const std::vector<double>& t, const CVec& y);

}  // namespace solitonlab
