#pragma once

#include "solitonlab/grid.hpp"

#include <string>
#include <vector>

namespace solitonlab {

enum class NonlinearityKind { cubic, saturable, power_series };

// f(s) with f(0) = 0; F(u) = (1/2) int_0^u f.
struct Nonlinearity {
  NonlinearityKind kind = NonlinearityKind::cubic;
  int q = 4;                  // saturable: f(s) = s / (1 + gamma s^(q-1))
  double gamma = 1.0;
  std::vector<double> coeffs; // power_series: f(s) = sum_k coeffs[k] s^(k+1)

  double f(double s) const;
  double fprime(double s) const;
  double fsecond(double s) const;
  double F(double u) const;
  // k-th derivative at 0 from the Taylor coefficients.
  double derivative_at_zero(int k) const;
  std::string describe() const;
};

Nonlinearity cubic_nonlinearity();
Nonlinearity saturable_nonlinearity(int q, double gamma);
Nonlinearity power_series_nonlinearity(std::vector<double> coeffs);

// Gaussian well V(x) = -A exp(-x^2), V_h(x) = V(h x).
struct Potential {
  double depth = 0.15;
  double h = 0.6;

  double V(double x) const;
  double Vh(double x) const { return V(h * x); }
  double second_derivative_at_zero() const { return 2.0 * depth; }
  double inf() const { return -depth; }
  RVec samples(const Grid& grid) const;
};

struct ModelConfig {
  GridMode dimension = GridMode::line1d;
  double lambda = 0.3;
  Nonlinearity nonlinearity;
  Potential potential;

  void validate() const;
};

struct ConservedQuantities {
  double energy = 0.0;
  double mass = 0.0;
};

enum class Frame { lab, rotating };

ConservedQuantities conserved(const ModelConfig& model, const ComplexField& psi);
// lab: -i(-Delta + V_h) psi + i f(|psi|^2) psi; rotating: additionally -i lambda psi.
ComplexField rhs(const ModelConfig& model, const ComplexField& psi, Frame frame, double lambda);

struct ConditionItem {
  std::string name;
  bool passed = false;
  double value = 0.0;
  std::string detail;
};

struct ConditionReport {
  std::vector<ConditionItem> items;
  bool all_passed() const;
  const ConditionItem& item(const std::string& name) const;
};

// Growth of f, (fB) root for d = 1, flatness of f at 0 up to order 3N+1 (d = 1)
// or 3 (d = 3), V''(0) > 0, exponential decay of V, and lambda in the existence window.
ConditionReport check_conditions(const ModelConfig& model, int N = 1);

double second_difference_at_zero(const Potential& v, double step = 1e-4);

}  // namespace solitonlab
