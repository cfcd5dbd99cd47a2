#include "solitonlab/model.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace solitonlab {

namespace {
void require_nonnegative(double s) {
  if (!(s >= 0.0)) throw std::invalid_argument("nonlinearity evaluated at a negative argument");
}

double factorial(int k) {
  double r = 1.0;
  for (int j = 2; j <= k; ++j) r *= j;
  return r;
}
}  // namespace

Nonlinearity cubic_nonlinearity() { return {}; }

Nonlinearity saturable_nonlinearity(int q, double gamma) {
  if (q < 4) throw std::invalid_argument("saturable nonlinearity needs q >= 4");
  if (!(gamma > 0.0)) throw std::invalid_argument("saturable nonlinearity needs gamma > 0");
  Nonlinearity n;
  n.kind = NonlinearityKind::saturable;
  n.q = q;
  n.gamma = gamma;
  return n;
}

Nonlinearity power_series_nonlinearity(std::vector<double> coeffs) {
  if (coeffs.empty()) throw std::invalid_argument("power series needs at least one coefficient");
  Nonlinearity n;
  n.kind = NonlinearityKind::power_series;
  n.coeffs = std::move(coeffs);
  return n;
}

double Nonlinearity::f(double s) const {
  require_nonnegative(s);
  switch (kind) {
    case NonlinearityKind::cubic:
      return s;
    case NonlinearityKind::saturable:
      return s / (1.0 + gamma * std::pow(s, q - 1));
    case NonlinearityKind::power_series: {
      double acc = 0.0;
      for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * s + coeffs[k];
      return acc * s;
    }
  }
  return 0.0;
}

double Nonlinearity::fprime(double s) const {
  require_nonnegative(s);
  switch (kind) {
    case NonlinearityKind::cubic:
      return 1.0;
    case NonlinearityKind::saturable: {
      const double p = q - 1, sp = std::pow(s, p), D = 1.0 + gamma * sp;
      return (1.0 - (p - 1.0) * gamma * sp) / (D * D);
    }
    case NonlinearityKind::power_series: {
      double acc = 0.0;
      for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * s + static_cast<double>(k + 1) * coeffs[k];
      return acc;
    }
  }
  return 0.0;
}

double Nonlinearity::fsecond(double s) const {
  require_nonnegative(s);
  switch (kind) {
    case NonlinearityKind::cubic:
      return 0.0;
    case NonlinearityKind::saturable: {
      const double p = q - 1, D = 1.0 + gamma * std::pow(s, p);
      const double spm1 = std::pow(s, p - 1.0), sp = spm1 * s;
      return (-(p - 1.0) * p * gamma * spm1 * D - 2.0 * (1.0 - (p - 1.0) * gamma * sp) * p * gamma * spm1) /
             (D * D * D);
    }
    case NonlinearityKind::power_series: {
      double acc = 0.0;
      for (std::size_t k = coeffs.size(); k-- > 1;)
        acc = acc * s + static_cast<double>((k + 1) * k) * coeffs[k];
      return acc;
    }
  }
  return 0.0;
}

double Nonlinearity::F(double u) const {
  require_nonnegative(u);
  switch (kind) {
    case NonlinearityKind::cubic:
      return 0.25 * u * u;
    case NonlinearityKind::saturable: {
      if (u == 0.0) return 0.0;
      auto g = [this](double s) { return f(s); };
      // split at the saturation knee so both pieces are smooth on their intervals
      const double knee = std::pow(1.0 / gamma, 1.0 / (q - 1));
      double acc = 0.0;
      if (u <= knee) {
        acc = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, 0.0, u, 10, 1e-15);
      } else {
        acc = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, 0.0, knee, 10, 1e-15) +
              boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, knee, u, 15, 1e-15);
      }
      return 0.5 * acc;
    }
    case NonlinearityKind::power_series: {
      double acc = 0.0;
      for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * u + coeffs[k] / static_cast<double>(k + 2);
      return 0.5 * acc * u * u;
    }
  }
  return 0.0;
}

double Nonlinearity::derivative_at_zero(int k) const {
  if (k < 0) throw std::invalid_argument("negative derivative order");
  if (k == 0) return 0.0;
  switch (kind) {
    case NonlinearityKind::cubic:
      return k == 1 ? 1.0 : 0.0;
    case NonlinearityKind::saturable: {
      // s / (1 + g s^p) = sum_m (-g)^m s^(1 + m p)
      const int p = q - 1;
      if ((k - 1) % p != 0) return 0.0;
      const int m = (k - 1) / p;
      return std::pow(-gamma, m) * factorial(k);
    }
    case NonlinearityKind::power_series:
      return static_cast<std::size_t>(k) <= coeffs.size() ? coeffs[static_cast<std::size_t>(k - 1)] * factorial(k)
                                                          : 0.0;
  }
  return 0.0;
}

std::string Nonlinearity::describe() const {
  std::ostringstream os;
  switch (kind) {
    case NonlinearityKind::cubic:
      os << "cubic";
      break;
    case NonlinearityKind::saturable:
      os << "saturable(q=" << q << ",gamma=" << gamma << ")";
      break;
    case NonlinearityKind::power_series:
      os << "power_series(" << coeffs.size() << " terms)";
      break;
  }
  return os.str();
}

double Potential::V(double x) const { return -depth * std::exp(-x * x); }

RVec Potential::samples(const Grid& grid) const {
  RVec v(grid.nodes().size());
  for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = Vh(grid.nodes()[j]);
  return v;
}

void ModelConfig::validate() const {
  if (!std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite");
  if (!(potential.depth > 0.0)) throw std::invalid_argument("potential depth must be positive");
  if (!(potential.h >= 0.0)) throw std::invalid_argument("h must be non-negative");
}

ConservedQuantities conserved(const ModelConfig& model, const ComplexField& psi) {
  require_finite(psi.values, "conserved input");
  const Grid& g = *psi.grid;
  const RVec V = model.potential.samples(g);
  const RVec rho = psi.values.cwiseAbs2();
  const double kinetic = -inner(g, psi.values, laplacian(g, psi.values)).real();
  RVec Fr(rho.size());
  for (Eigen::Index j = 0; j < rho.size(); ++j) Fr[j] = model.nonlinearity.F(rho[j]);
  ConservedQuantities c;
  c.mass = integrate(g, rho);
  c.energy = 0.5 * kinetic + 0.5 * integrate(g, RVec(V.array() * rho.array())) - integrate(g, Fr);
  return c;
}

ComplexField rhs(const ModelConfig& model, const ComplexField& psi, Frame frame, double lambda) {
  require_finite(psi.values, "rhs input");
  const Grid& g = *psi.grid;
  const RVec V = model.potential.samples(g);
  const CVec lap = laplacian(g, psi.values);
  CVec out(psi.values.size());
  const cplx I(0, 1);
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    const double s = std::norm(psi.values[j]);
    double shift = V[j] - model.nonlinearity.f(s);
    if (frame == Frame::rotating) shift += lambda;
    out[j] = -I * (-lap[j] + shift * psi.values[j]);
  }
  return {psi.grid, out};
}

double second_difference_at_zero(const Potential& v, double step) {
  return (v.V(step) - 2.0 * v.V(0.0) + v.V(-step)) / (step * step);
}

bool ConditionReport::all_passed() const {
  for (const auto& i : items)
    if (!i.passed) return false;
  return true;
}

const ConditionItem& ConditionReport::item(const std::string& name) const {
  for (const auto& i : items)
    if (i.name == name) return i;
  throw std::out_of_range("no condition named " + name);
}

namespace {

// log-log slope of |g| between s = 1e3 and 1e6
double growth_exponent(const std::function<double(double)>& g) {
  const double a = 1e3, b = 1e6;
  const double ga = std::abs(g(a)), gb = std::abs(g(b));
  if (gb == 0.0 || ga == 0.0) return 0.0;
  return std::log(gb / ga) / std::log(b / a);
}

}  // namespace

ConditionReport check_conditions(const ModelConfig& model, int N) {
  ConditionReport rep;
  const auto& f = model.nonlinearity;
  const bool line = model.dimension == GridMode::line1d;
  const double d = line ? 1.0 : 3.0;

  {
    const double beta = growth_exponent([&](double s) { return f.f(s); });
    const double alpha = growth_exponent([&](double s) { return f.fprime(s); }) + 1.0;
    const double beta_max = 2.0 / d;
    const bool ok_beta = beta < beta_max || beta <= 0.0;
    const bool ok_alpha = line || alpha < 2.0 / (d - 2.0);
    std::ostringstream os;
    os << "growth exponents beta=" << beta << " (bound " << beta_max << "), alpha=" << alpha;
    rep.items.push_back({"fA_growth", ok_beta && ok_alpha, beta, os.str()});
  }

  const double mu = model.lambda + model.potential.V(0.0);
  if (line) {
    // U(p) = -mu p^2 + int_0^{p^2} f = -mu p^2 + 2F(p^2); first positive root, U_p != 0 there.
    auto U = [&](double p) { return -mu * p * p + 2.0 * f.F(p * p); };
    double root = -1.0, slope = 0.0;
    if (mu > 0.0) {
      double p_prev = 1e-3, u_prev = U(p_prev);
      for (double p = 2e-3; p < 1e3; p *= 1.01) {
        const double u = U(p);
        if (u_prev < 0.0 && u >= 0.0) {
          double lo = p_prev, hi = p;
          for (int it = 0; it < 200; ++it) {
            const double m = 0.5 * (lo + hi);
            (U(m) < 0.0 ? lo : hi) = m;
          }
          root = 0.5 * (lo + hi);
          const double e = 1e-6 * root;
          slope = (U(root + e) - U(root - e)) / (2.0 * e);
          break;
        }
        p_prev = p;
        u_prev = u;
      }
    }
    const bool ok = root > 0.0 && std::abs(slope) > 1e-10;
    std::ostringstream os;
    os << "smallest positive root of U at mu=" << mu << ": " << root << ", U'=" << slope;
    rep.items.push_back({"fB_root", ok, root, os.str()});
  }

  {
    const int kmax = line ? 3 * N + 1 : 3;
    double worst = 0.0;
    for (int k = 2; k <= kmax; ++k) worst = std::max(worst, std::abs(f.derivative_at_zero(k)));
    std::ostringstream os;
    os << "max |f^(k)(0)| for k=2.." << kmax << " is " << worst;
    rep.items.push_back({"fC_flatness", worst == 0.0, worst, os.str()});
  }

  {
    const double v2 = second_difference_at_zero(model.potential);
    bool min_at_zero = true;
    for (double x = -10.0; x <= 10.0; x += 0.01)
      if (model.potential.V(x) < model.potential.V(0.0)) min_at_zero = false;
    std::ostringstream os;
    os << "V''(0)=" << v2 << ", V(0) is the sampled minimum: " << (min_at_zero ? "yes" : "no");
    rep.items.push_back({"VA_minimum", v2 > 0.0 && min_at_zero, v2, os.str()});
  }

  {
    // log|V| slope over [4, 6] must be at least linear in x
    const double x1 = 4.0, x2 = 6.0;
    const double rate = -(std::log(std::abs(model.potential.V(x2))) - std::log(std::abs(model.potential.V(x1)))) /
                        (x2 - x1);
    std::ostringstream os;
    os << "tail decay rate of |V| on [4,6]: " << rate;
    rep.items.push_back({"VB_decay", rate > 0.0, rate, os.str()});
  }

  {
    const bool above_inf = model.lambda > -model.potential.inf();
    const bool in_I0 = mu > 0.0;  // I0 = (0, inf)
    std::ostringstream os;
    os << "lambda=" << model.lambda << ", -inf V=" << -model.potential.inf() << ", lambda+V(0)=" << mu;
    rep.items.push_back({"lambda_in_I0V", above_inf && in_I0, model.lambda, os.str()});
  }
  return rep;
}

}  // namespace solitonlab
