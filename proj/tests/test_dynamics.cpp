#include "catch_amalgamated.hpp"

#include "solitonlab/dynamics.hpp"
#include "solitonlab/errors.hpp"
#include "solitonlab/fitting.hpp"
#include "solitonlab/ground_state.hpp"

#include <cmath>

using namespace solitonlab;

namespace {

ModelConfig default_model() {
  ModelConfig m;
  m.lambda = 0.3;
  m.potential.depth = 0.15;
  m.potential.h = 0.6;
  return m;
}

const GridPtr& line_grid() {
  static const GridPtr g = Grid::line(2048, 80.0);
  return g;
}

const RealField& default_phi() {
  static const RealField phi = solve_soliton(default_model(), line_grid(), 0.3).phi;
  return phi;
}

const LinearizedOperator& default_op() {
  static const LinearizedOperator op = linearize(default_model(), line_grid(), 0.3);
  return op;
}

// boosted, displaced copy of the trapped soliton
ComplexField kicked_soliton(const GridPtr& g, double shift, double p0) {
  const auto& phi = default_phi();
  RVec pts = g->nodes().array() - shift;
  const RVec moved = fourier_interpolate(*phi.grid, phi.values, pts);
  CVec v(g->size());
  for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = std::polar(moved[j], p0 * g->nodes()[j]);
  return {g, v};
}

double sup_diff(const CVec& a, const CVec& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("observables") {
  const auto& g = line_grid();
  const ModelConfig m = default_model();
  const double mu = 0.45;
  auto sech_profile = [&](double a0, double p0) {
    CVec v(g->size());
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      const double x = g->nodes()[j];
      v[j] = std::polar(std::sqrt(2 * mu) / std::cosh(std::sqrt(mu) * (x - a0)), p0 * x);
    }
    return ComplexField(g, v);
  };
  REQUIRE(std::abs(observables(m, sech_profile(0.0, 0.0)).a) <= 1e-12);
  REQUIRE(std::abs(observables(m, sech_profile(0.0, 0.3)).p - 0.3) <= 1e-10);
  REQUIRE(std::abs(observables(m, sech_profile(2.5, 0.0)).a - 2.5) <= 1e-8);
  REQUIRE_THROWS_AS(observables(m, ComplexField(g)), NumericalError);
}

TEST_CASE("NLS conservation and convergence order") {
  const ModelConfig m = default_model();
  const auto psi0 = kicked_soliton(line_grid(), 1.0, 0.1);
  EvolveOptions opt;
  opt.T = 100.0;
  opt.snapshot_every = 0.0;
  const auto r1 = evolve_nls(m, psi0, opt);
  opt.dt = 0.0025;
  const auto r2 = evolve_nls(m, psi0, opt);
  REQUIRE(r1.series.size() == 101);
  REQUIRE(r1.max_relative_mass_drift() <= 1e-11);
  REQUIRE(r1.max_relative_energy_drift() <= 1e-6);
  const double ratio = r1.max_relative_energy_drift() / r2.max_relative_energy_drift();
  CAPTURE(r1.max_relative_energy_drift(), ratio);
  REQUIRE(ratio > 3.5);
  REQUIRE(ratio < 4.5);
}

TEST_CASE("trapped soliton is stationary") {
  const ModelConfig m = default_model();
  const auto& phi = default_phi();
  EvolveOptions opt;
  opt.T = 50.0;
  opt.snapshot_every = 1.0;
  const auto r = evolve_nls(m, ComplexField(phi.grid, phi.values.cast<cplx>()), opt);
  double worst = 0.0;
  for (const auto& s : r.snapshots) worst = std::max(worst, (s.values.cwiseAbs() - phi.values).cwiseAbs().maxCoeff());
  REQUIRE(worst <= 1e-6);
  REQUIRE(r.snapshot_times.size() == 51);
  for (std::size_t i = 1; i < r.snapshot_times.size(); ++i)
    REQUIRE(r.snapshot_times[i] > r.snapshot_times[i - 1]);
  // e^{i lambda t} phase, up to the O(dt^2) splitting phase error
  const cplx ph = r.final_state.values[1024] / phi.values[1024];
  REQUIRE(std::abs(ph - std::polar(1.0, 0.3 * 50.0)) <= 1e-4);
}

TEST_CASE("NLS symmetries") {
  const ModelConfig m = default_model();
  const auto psi0 = kicked_soliton(line_grid(), 1.0, 0.1);
  EvolveOptions opt;
  opt.T = 10.0;
  opt.snapshot_every = 0.0;
  SECTION("time reversal without potential and nonlinearity") {
    ModelConfig lin = m;
    lin.potential.depth = 0.0;
    lin.nonlinearity = power_series_nonlinearity({0.0});
    const auto fwd = evolve_nls(lin, psi0, opt);
    const auto back = evolve_nls(lin, ComplexField(psi0.grid, fwd.final_state.values.conjugate()), opt);
    REQUIRE(sup_diff(back.final_state.values.conjugate(), psi0.values) <= 1e-10);
  }
  SECTION("gauge equivariance") {
    const cplx g = std::polar(1.0, 0.7);
    const auto a = evolve_nls(m, psi0, opt);
    const auto b = evolve_nls(m, ComplexField(psi0.grid, g * psi0.values), opt);
    REQUIRE(sup_diff(b.final_state.values, g * a.final_state.values) <= 1e-10);
  }
  SECTION("grid refinement") {
    const GridPtr coarse = Grid::line(1024, 80.0);
    const auto a = evolve_nls(m, kicked_soliton(coarse, 1.0, 0.1), opt);
    const auto b = evolve_nls(m, psi0, opt);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < 1024; ++j)
      worst = std::max(worst, std::abs(a.final_state.values[j] - b.final_state.values[2 * j]));
    REQUIRE(worst < 1e-8);
  }
}

TEST_CASE("NLS failure modes") {
  const ModelConfig m = default_model();
  const auto& g = line_grid();
  EvolveOptions opt;
  opt.T = 20.0;
  opt.snapshot_every = 0.0;
  SECTION("non-finite input") {
    CVec v = CVec::Ones(g->size());
    v[3] = cplx(std::nan(""), 0.0);
    REQUIRE_THROWS_AS(evolve_nls(m, ComplexField(g, v), opt), NumericalError);
  }
  SECTION("growth is caught") {
    // an amplifying layer forces exponential growth
    opt.layer = {true, -5.0, 0.15};
    try {
      evolve_nls(m, ComplexField(g, CVec::Constant(g->size(), cplx(0.01, 0.0))), opt);
      FAIL("no exception");
    } catch (const NumericalError& e) {
      REQUIRE(e.kind() == ErrorKind::BlowupDetected);
    }
  }
  SECTION("bad time step") {
    opt.dt = 0.0;
    REQUIRE_THROWS_AS(evolve_nls(m, kicked_soliton(g, 0.0, 0.0), opt), ConfigError);
  }
}

TEST_CASE("linearized evolution") {
  const auto& op = default_op();
  const auto& g = op.grid;
  const CVec zero = CVec::Zero(g->size());
  SECTION("zero mode is stationary") {
    const TwoComponentField w0(g, zero, op.phi.cast<cplx>());
    LinearEvolveOptions opt;
    opt.T = 50.0;
    opt.snapshot_every = 5.0;
    const auto r = evolve_linearized(op, w0, opt);
    double worst = 0.0;
    for (const auto& s : r.snapshots) worst = std::max(worst, norm2(s - w0) / norm2(w0));
    REQUIRE(worst <= 1e-8);
  }
  SECTION("internal mode rotates at eps") {
    const auto sp = discrete_spectrum(op);
    const TwoComponentField w0(g, sp.xi.cast<cplx>(), cplx(0, 1) * sp.eta.cast<cplx>());
    LinearEvolveOptions opt;
    opt.T = 150.0;
    opt.snapshot_every = 0.5;
    const auto r = evolve_linearized(op, w0, opt);
    const double n0 = norm2(w0);
    std::vector<double> t, proj;
    double worst = 0.0;
    for (std::size_t i = 0; i < r.snapshots.size(); ++i) {
      worst = std::max(worst, std::abs(norm2(r.snapshots[i]) / n0 - 1.0));
      t.push_back(r.snapshot_times[i]);
      proj.push_back(dot(*g, RVec(r.snapshots[i].first.real()), sp.xi) / dot(*g, sp.xi, sp.xi));
    }
    REQUIRE(worst <= 1e-6);
    const auto fit = fit_damped_sinusoid(t, proj);
    REQUIRE(std::abs(fit.omega / sp.epsilon - 1.0) <= 0.01);
  }
  SECTION("Strang scheme agrees over a short time") {
    const auto sp = discrete_spectrum(op);
    const TwoComponentField w0(g, sp.xi.cast<cplx>(), cplx(0, 1) * sp.eta.cast<cplx>());
    LinearEvolveOptions opt;
    opt.T = 10.0;
    const auto a = evolve_linearized(op, w0, opt);
    opt.scheme = LinearScheme::strang;
    const auto b = evolve_linearized(op, w0, opt);
    REQUIRE(b.scheme == "strang");
    REQUIRE(norm2(a.final_state - b.final_state) <= 1e-4 * norm2(w0));
  }
}

TEST_CASE("decay exponent") {
  std::vector<double> t, y;
  SECTION("exact power law") {
    for (int i = 0; i <= 200; ++i) {
      t.push_back(10.0 * std::pow(100.0, i / 200.0));
      y.push_back(std::pow(t.back(), -1.5));
    }
    const auto d = decay_exponent(t, y, 10.0, 1000.0);
    REQUIRE(std::abs(d.exponent + 1.5) <= 1e-6);
    REQUIRE(d.samples == 201);
  }
  SECTION("constant") {
    for (int i = 1; i <= 100; ++i) {
      t.push_back(i);
      y.push_back(3.0);
    }
    const auto d = decay_exponent(t, y, 1.0, 100.0);
    REQUIRE(std::abs(d.exponent) <= 1e-9);
  }
  SECTION("shifted power law") {
    for (int i = 100; i <= 1000; ++i) {
      t.push_back(i);
      y.push_back(std::pow(1.0 + 0.2 * i, -0.5));
    }
    const auto d = decay_exponent(t, y, 100.0, 1000.0);
    REQUIRE(d.exponent >= -0.55);
    REQUIRE(d.exponent <= -0.45);
  }
  SECTION("short window") {
    for (int i = 1; i <= 100; ++i) {
      t.push_back(i);
      y.push_back(1.0 / i);
    }
    REQUIRE_THROWS_AS(decay_exponent(t, y, 10.0, 25.0), NumericalError);
  }
}
