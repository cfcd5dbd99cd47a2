#include "catch_amalgamated.hpp"

#include "solitonlab/errors.hpp"
#include "solitonlab/ground_state.hpp"
#include "solitonlab/modulation.hpp"

#include <cmath>
#include <functional>

using namespace solitonlab;

namespace {

ModelConfig default_model() {
  ModelConfig m;
  m.lambda = 0.3;
  m.potential.depth = 0.15;
  m.potential.h = 0.6;
  return m;
}

const ModulationBasis& basis() {
  static const ModulationBasis b(default_model(), Grid::line(2048, 80.0), 0.3);
  return b;
}

// RK4 samples of z' = rhs(z) every `every` time units
CVec integrate_z(const std::function<cplx(cplx)>& rhs, cplx z0, double T, double every, std::vector<double>& t) {
  const double h = every / 20.0;
  const int n = static_cast<int>(std::lround(T / every));
  CVec out(n + 1);
  cplx z = z0;
  t.clear();
  for (int i = 0; i <= n; ++i) {
    out[i] = z;
    t.push_back(i * every);
    for (int k = 0; k < 20; ++k) {
      const cplx k1 = rhs(z), k2 = rhs(z + 0.5 * h * k1), k3 = rhs(z + 0.5 * h * k2), k4 = rhs(z + h * k3);
      z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("basis interpolation between nodes") {
  const auto& b = basis();
  const double lam = 0.3013;
  const auto s = b.at(lam);
  ModelConfig m = default_model();
  const auto op = linearize(m, b.grid(), lam);
  const auto sp = discrete_spectrum(op);
  REQUIRE((s.phi - op.phi).cwiseAbs().maxCoeff() <= 1e-9);
  REQUIRE((s.xi - sp.xi).cwiseAbs().maxCoeff() <= 1e-7);
  REQUIRE(std::abs(s.epsilon - sp.epsilon) <= 1e-9);
  REQUIRE(s.ddelta > 0.0);
  REQUIRE_THROWS_AS(b.at(0.4), NumericalError);
}

TEST_CASE("decomposition") {
  const auto& b = basis();
  const auto& g = b.grid();
  SECTION("exact manifold point") {
    const double th = 1.3, lam = 0.3013;
    const auto phi = perturbed_soliton(b, lam, 0.0);
    const ComplexField psi(g, std::polar(1.0, th) * phi.values);
    const auto p = decompose(psi, b, {th + 0.02, lam - 0.001, cplx(1e-3, 1e-3)});
    REQUIRE(std::abs(std::remainder(p.theta - th, 2 * M_PI)) <= 1e-10);
    REQUIRE(std::abs(p.lambda - lam) <= 1e-10);
    REQUIRE(std::abs(p.z) <= 1e-10);
  }
  SECTION("constructed perturbation") {
    const cplx z(6e-4, -8e-4);
    const auto base = perturbed_soliton(b, 0.3, z);
    const ComplexField psi(g, std::polar(1.0, -0.4) * base.values);
    const auto p = decompose(psi, b, {-0.4, 0.3, 0.0});
    REQUIRE(std::abs(p.z - z) <= 1e-5);
    for (double r : p.residuals) REQUIRE(r <= 1e-10);
  }
  SECTION("gauge consistency and reconstruction") {
    CVec v = perturbed_soliton(b, 0.3, cplx(0.03, 0.01)).values;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      const double x = g->nodes()[j];
      v[j] += cplx(0.01, 0.02) * std::exp(-0.3 * (x - 2) * (x - 2));
    }
    DecomposeOptions opt;
    opt.keep_R = true;
    const auto p = decompose(ComplexField(g, v), b, {0.0, 0.3, cplx(0.03, 0.01)}, opt);
    const double alpha = 0.9;
    const auto q = decompose(ComplexField(g, std::polar(1.0, alpha) * v), b, {alpha, 0.3, cplx(0.03, 0.01)}, opt);
    REQUIRE(std::abs(q.theta - p.theta - alpha) <= 1e-10);
    REQUIRE(std::abs(q.lambda - p.lambda) <= 1e-10);
    REQUIRE(std::abs(q.z - p.z) <= 1e-10);
    REQUIRE(std::abs(q.R_w2norm - p.R_w2norm) <= 1e-10);
    const auto back = reconstruct(p, b);
    REQUIRE((back.values - v).cwiseAbs().maxCoeff() <= 1e-12);
    for (double r : p.residuals) REQUIRE(r <= 1e-10);
  }
  SECTION("far from the soliton family") {
    CVec v(g->size());
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = 3.0 * std::exp(-0.01 * std::pow(g->nodes()[j] - 30.0, 2));
    REQUIRE_THROWS_AS(decompose(ComplexField(g, v), b, {0.0, 0.3, 0.0}), NumericalError);
  }
}

TEST_CASE("tracking") {
  const auto& b = basis();
  const ModelConfig m = default_model();
  SECTION("exact soliton") {
    EvolveOptions opt;
    opt.T = 20.0;
    const auto ev = evolve_nls(m, perturbed_soliton(b, 0.3, 0.0), opt);
    const auto s = track(ev, b, {0.0, 0.3, 0.0});
    REQUIRE_FALSE(s.truncated);
    REQUIRE(s.points.size() == 41);
    for (const auto& p : s.points) {
      REQUIRE(std::abs(p.z) <= 1e-8);
      REQUIRE(std::abs(p.lambda - 0.3) <= 1e-8);
    }
    // unwrapped phase follows lambda t
    REQUIRE(std::abs(s.points.back().theta - 0.3 * 20.0) <= 1e-4);
  }
  SECTION("perturbed soliton over a short run") {
    const cplx z0(0.05, 0.0);
    EvolveOptions opt;
    opt.T = 200.0;
    opt.layer = {true, 0.3, 0.15};
    const auto ev = evolve_nls(m, perturbed_soliton(b, 0.3, z0), opt);
    const auto s = track(ev, b, {0.0, 0.3, z0});
    REQUIRE_FALSE(s.truncated);
    const double eps = b.at(0.3).epsilon;
    const auto c = fit_z_ode({&s});
    REQUIRE(std::abs(c.linear - cplx(0.0, eps)) <= 0.05 * eps);
    // gamma' = O(|z|^2)
    const auto t = s.times();
    double integral = 0.0, worst = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
      integral += 0.5 * (s.points[i].lambda + s.points[i - 1].lambda) * (t[i] - t[i - 1]);
      const double gamma = s.points[i].theta - integral;
      worst = std::max(worst, std::abs(gamma) / (t[i] * std::norm(z0)));
    }
    REQUIRE(worst < 1.0);
    const auto lr = lambda_dot_regression(s);
    CAPTURE(lr.coeffs.transpose(), lr.diagonal_t);
    REQUIRE(lr.diagonal_ratio < 1e-2);
  }
}

TEST_CASE("z-ODE regression") {
  std::vector<double> t1, t2;
  SECTION("pure rotation") {
    const double eps = 0.22;
    auto rhs = [&](cplx z) { return cplx(0, eps) * z; };
    const CVec a = integrate_z(rhs, 0.05, 300.0, 0.5, t1);
    const CVec b = integrate_z(rhs, cplx(0.0, 0.02), 300.0, 0.5, t2);
    const auto c = fit_z_ode({a, b}, {t1, t2});
    REQUIRE(std::abs(c.linear.imag() / eps - 1.0) <= 0.005);
    REQUIRE(std::abs(c.linear.real()) <= 1e-6);
    REQUIRE(c.max_quadratic() <= 1e-6);
    REQUIRE(std::abs(c.cubic) <= 1e-6);
    // a single constant-amplitude series cannot separate z from |z|^2 z
    REQUIRE_THROWS_AS(fit_z_ode({a}, {t1}), NumericalError);
  }
  SECTION("too few points") {
    auto rhs = [&](cplx z) { return cplx(0, 0.2) * z; };
    const CVec a = integrate_z(rhs, 0.05, 50.0, 0.5, t1);
    REQUIRE_THROWS_AS(fit_z_ode({a}, {t1}), ConfigError);
  }
}

TEST_CASE("normal form and Riccati fit") {
  const double eps = 0.2;
  const cplx I(0, 1);
  const cplx q20 = 0.03 * I, q11 = -0.02 * I, q02 = 0.01 * I, Y(-0.01, 0.05);
  auto rhs = [&](cplx z) {
    return I * eps * z + q20 * z * z + q11 * std::norm(z) + q02 * std::conj(z) * std::conj(z) + Y * std::norm(z) * z;
  };
  std::vector<double> t1, t2;
  const CVec a = integrate_z(rhs, 0.05, 1000.0, 0.5, t1);
  const CVec b = integrate_z(rhs, 0.025, 1000.0, 0.5, t2);
  const auto c = fit_z_ode({a, b}, {t1, t2});
  REQUIRE(std::abs(c.q20 - q20) <= 0.05 * std::abs(q20));
  const auto nf = normal_form_quadratic({a, b}, {t1, t2}, c);
  REQUIRE(nf.quadratic_reduction >= 10.0);
  REQUIRE(nf.near_identity <= 5.0);
  REQUIRE(nf.imag_ratio <= 0.05);
  const auto r = riccati_fit(t1, nf.beta[0], {100.0, 1000.0});
  REQUIRE(std::abs(r.ReY1 / Y.real() - 1.0) <= 0.05);
  REQUIRE(r.r2 >= 0.98);

  SECTION("exact Riccati solution") {
    std::vector<double> t;
    const CVec beta = integrate_z([&](cplx z) { return I * eps * z + cplx(-0.01, 0.0) * std::norm(z) * z; }, 0.05,
                                  1000.0, 0.5, t);
    const auto f = riccati_fit(t, beta, {100.0, 1000.0});
    REQUIRE(std::abs(f.ReY1 / -0.01 - 1.0) <= 0.01);
    REQUIRE(std::abs(f.beta0 - 0.05) <= 1e-6);
    const CVec grow = integrate_z([&](cplx z) { return I * eps * z + cplx(0.01, 0.0) * std::norm(z) * z; }, 0.05,
                                  100.0, 0.5, t);
    REQUIRE_THROWS_AS(riccati_fit(t, grow), NumericalError);
  }
  SECTION("small denominators are rejected") {
    ZOdeCoefficients bad = c;
    bad.linear = cplx(0.0, 1e-9);
    REQUIRE_THROWS_AS(normal_form_quadratic({a, b}, {t1, t2}, bad), NumericalError);
  }
}

TEST_CASE("lambda limit") {
  const auto& b = basis();
  ModulationSeries s;
  for (int i = 0; i <= 1000; ++i) {
    ModulationPoint p;
    p.t = i;
    p.lambda = 0.3 + 0.01 * std::pow(1.0 + i, -0.5);
    s.points.push_back(p);
  }
  const auto l = lambda_limit(s, b, 100.0);
  REQUIRE(l.lambda_inf == s.points.back().lambda);
  REQUIRE(l.decreasing);
  REQUIRE(l.tail.exponent <= -0.3);
  REQUIRE(l.on_stable_branch);

  for (auto& p : s.points) p.lambda = 0.3;
  const auto c = lambda_limit(s, b, 100.0);
  REQUIRE(c.constant);
  REQUIRE(std::abs(c.lambda_inf - 0.3) <= 1e-8);

  // growing oscillation around the end value
  for (auto& p : s.points) p.lambda = 0.3 + 1e-4 * (p.t / 1000.0) * std::sin(0.3 * (p.t - 1000.0));
  REQUIRE_THROWS_AS(lambda_limit(s, b, 100.0), NumericalError);
}

TEST_CASE("effective Newton law") {
  const double eps = 0.2144;
  std::vector<SeriesRow> rows;
  for (int i = 0; i <= 1000; ++i) {
    SeriesRow r;
    r.t = i;
    r.a = 0.07 * std::exp(-2e-4 * r.t) * std::cos(eps * r.t + 0.3);
    r.p = 0.5 * 0.07 * std::exp(-2e-4 * r.t) * (-2e-4 * std::cos(eps * r.t + 0.3) - eps * std::sin(eps * r.t + 0.3));
    rows.push_back(r);
  }
  const auto rep = newton_law_check(rows, eps);
  REQUIRE(rep.relative_frequency_error <= 1e-6);
  REQUIRE(rep.adot_mismatch <= 1e-3);
  REQUIRE(rep.amplitude_late < rep.amplitude_early);
  for (auto& r : rows) r.a = 1e-3 * r.t;
  REQUIRE_THROWS_AS(newton_law_check(rows, eps), NumericalError);
}
