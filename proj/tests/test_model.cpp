#include "catch_amalgamated.hpp"

#include "solitonlab/ground_state.hpp"
#include "solitonlab/model.hpp"

#include <cmath>
#include <random>

using namespace solitonlab;

namespace {
ModelConfig default_model() {
  ModelConfig m;
  m.lambda = 0.3;
  m.potential.depth = 0.15;
  m.potential.h = 0.6;
  return m;
}

ComplexField bump(const GridPtr& g, double p0) {
  CVec v(g->nodes().size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double x = g->nodes()[j];
    v[j] = std::polar(std::exp(-0.3 * (x - 0.5) * (x - 0.5)), p0 * x + 0.1 * x * x);
  }
  return {g, v};
}
}  // namespace

TEST_CASE("nonlinearity evaluators") {
  const auto cubic = cubic_nonlinearity();
  const auto sat = saturable_nonlinearity(4, 1.0);
  const auto poly = power_series_nonlinearity({1.0, 0.0, 0.0, 0.5});
  for (const auto* f : {&cubic, &sat, &poly}) {
    REQUIRE(f->f(0.0) == 0.0);
    for (double u : {0.1, 0.7, 1.3, 2.9}) {
      const double e = 1e-5;
      const double dF = (f->F(u + e) - f->F(u - e)) / (2 * e);
      REQUIRE(std::abs(dF - 0.5 * f->f(u)) <= 1e-8);
      const double df = (f->f(u + e) - f->f(u - e)) / (2 * e);
      REQUIRE(std::abs(df - f->fprime(u)) <= 1e-8);
      const double d2 = (f->fprime(u + e) - f->fprime(u - e)) / (2 * e);
      REQUIRE(std::abs(d2 - f->fsecond(u)) <= 1e-7);
    }
    REQUIRE_THROWS_AS(f->f(-1.0), std::invalid_argument);
  }
  SECTION("cubic F(u) = u^2/4") {
    for (double u : {0.0, 0.5, 3.0}) REQUIRE(cubic.F(u) == u * u / 4.0);
  }
  SECTION("saturable q=4 is flat to third order at zero") {
    // one-sided stencils of 6th order on s >= 0, weights from the Vandermonde system
    const double e = 1e-2;
    auto stencil = [&](int deriv) {
      const int m = deriv + 6;
      Eigen::MatrixXd A(m, m);
      Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) A(r, c) = std::pow(static_cast<double>(c), r);
      b[deriv] = std::tgamma(deriv + 1.0);
      const Eigen::VectorXd w = A.fullPivLu().solve(b);
      double acc = 0.0;
      for (int c = 0; c < m; ++c) acc += w[c] * sat.f(c * e);
      return acc / std::pow(e, deriv);
    };
    const double d2 = stencil(2), d3 = stencil(3);
    REQUIRE(std::abs(d2) <= 1e-6);
    REQUIRE(std::abs(d3) <= 1e-6);
    REQUIRE(sat.derivative_at_zero(2) == 0.0);
    REQUIRE(sat.derivative_at_zero(3) == 0.0);
    REQUIRE(sat.derivative_at_zero(4) == -24.0);
  }
}

TEST_CASE("conserved quantities") {
  auto g = Grid::line(2048, 80.0);
  ModelConfig m = default_model();
  SECTION("zero field") {
    const auto c = conserved(m, ComplexField(g));
    REQUIRE(c.energy == 0.0);
    REQUIRE(c.mass == 0.0);
  }
  SECTION("free sech mass 4 sqrt(mu)") {
    m.potential.h = 0.0;
    const double mu = m.lambda + m.potential.V(0.0);
    const auto phi = free_soliton_cubic(g, mu);
    const auto c = conserved(m, ComplexField(g, phi.values.cast<cplx>()));
    REQUIRE(std::abs(c.mass - 4.0 * std::sqrt(mu)) <= 1e-8);
  }
  SECTION("gauge invariance") {
    const auto psi = bump(g, 0.4);
    const auto c0 = conserved(m, psi);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ud(0.0, 6.28);
    for (int t = 0; t < 4; ++t) {
      const double a = ud(rng);
      const ComplexField rot(g, psi.values * std::polar(1.0, a));
      const auto c = conserved(m, rot);
      REQUIRE(std::abs(c.energy - c0.energy) <= 1e-12 * std::max(1.0, std::abs(c0.energy)));
      REQUIRE(std::abs(c.mass - c0.mass) <= 1e-12 * c0.mass);
      // finite difference in alpha
      const double e = 1e-4;
      const auto cp = conserved(m, ComplexField(g, psi.values * std::polar(1.0, a + e)));
      const auto cm = conserved(m, ComplexField(g, psi.values * std::polar(1.0, a - e)));
      REQUIRE(std::abs(cp.energy - cm.energy) / (2 * e) <= 1e-10);
      REQUIRE(std::abs(cp.mass - cm.mass) / (2 * e) <= 1e-10);
    }
  }
}

TEST_CASE("right-hand side") {
  auto g = Grid::line(2048, 80.0);
  const ModelConfig m = default_model();
  REQUIRE(sup_norm(rhs(m, ComplexField(g), Frame::lab, 0.0).values) == 0.0);
  const auto psi = bump(g, 0.3);
  const auto lab = rhs(m, psi, Frame::lab, m.lambda);
  const auto rot = rhs(m, psi, Frame::rotating, m.lambda);
  REQUIRE((rot.values - (lab.values - cplx(0, 1) * m.lambda * psi.values)).cwiseAbs().maxCoeff() <= 1e-12);
  const cplx ph = std::polar(1.0, 0.77);
  const auto r2 = rhs(m, ComplexField(g, ph * psi.values), Frame::lab, 0.0);
  REQUIRE((r2.values - ph * lab.values).cwiseAbs().maxCoeff() <= 1e-12);

  const auto sol = solve_soliton(m, g, m.lambda);
  const auto G = rhs(m, ComplexField(g, sol.phi.values.cast<cplx>()), Frame::rotating, m.lambda);
  REQUIRE(norm2(G) <= 1e-8);
}

TEST_CASE("hypothesis checks") {
  ModelConfig m = default_model();
  SECTION("default scenario satisfies every hypothesis") {
    const auto rep = check_conditions(m, 1);
    std::string msg;
    for (const auto& i : rep.items) msg += i.name + ": " + i.detail + "\n";
    INFO(msg);
    REQUIRE(rep.all_passed());
    REQUIRE(rep.item("fC_flatness").value == 0.0);
  }
  SECTION("second difference of the well") {
    Potential v;
    v.depth = 0.1;
    REQUIRE(std::abs(second_difference_at_zero(v) - 0.2) <= 1e-8);
  }
  SECTION("lambda below -inf V fails membership") {
    m.potential.depth = 0.1;
    m.lambda = 0.05;
    const auto rep = check_conditions(m, 1);
    REQUIRE_FALSE(rep.item("lambda_in_I0V").passed);
  }
  SECTION("saturable in 1D breaks flatness at N=1 but not in 3D") {
    m.nonlinearity = saturable_nonlinearity(4, 1.0);
    REQUIRE_FALSE(check_conditions(m, 1).item("fC_flatness").passed);
    m.dimension = GridMode::radial3d;
    REQUIRE(check_conditions(m, 1).item("fC_flatness").passed);
  }
}
