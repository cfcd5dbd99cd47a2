#include "catch_amalgamated.hpp"

#include "solitonlab/errors.hpp"
#include "solitonlab/ground_state.hpp"
#include "solitonlab/linearization.hpp"

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

const LinearizedOperator& default_op() {
  static const LinearizedOperator op = linearize(default_model(), Grid::line(2048, 80.0), 0.3);
  return op;
}

const SpectralData& default_spec() {
  static const SpectralData s = discrete_spectrum(default_op());
  return s;
}

TwoComponentField random_field(const GridPtr& g, std::mt19937_64& rng, bool localized) {
  std::normal_distribution<double> nd;
  CVec a(g->size()), b(g->size());
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const double x = g->nodes()[j];
    const double env = localized ? std::exp(-0.05 * x * x) : 1.0;
    a[j] = env * cplx(nd(rng), nd(rng));
    b[j] = env * cplx(nd(rng), nd(rng));
  }
  return {g, a, b};
}

}  // namespace

TEST_CASE("operator basics") {
  const auto& op = default_op();
  const auto& g = op.grid;
  const CVec zero = CVec::Zero(g->size());
  SECTION("zero mode and associated mode") {
    const auto l0 = op.apply_L(TwoComponentField(g, zero, op.phi.cast<cplx>()));
    REQUIRE(norm2(l0) <= 1e-8 * norm2(*g, op.phi));
    const auto l1 = op.apply_L(TwoComponentField(g, op.dphi.cast<cplx>(), zero));
    const auto diff = l1 - TwoComponentField(g, zero, op.phi.cast<cplx>());
    REQUIRE(norm2(diff) <= 1e-6 * norm2(*g, op.phi));
  }
  SECTION("L+ and L- are symmetric") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 5; ++t) {
      RVec u(g->size()), v(g->size());
      for (auto& x : u) x = nd(rng);
      for (auto& x : v) x = nd(rng);
      const double scale = norm2(*g, u) * norm2(*g, v);
      REQUIRE(std::abs(dot(*g, op.apply_plus(u), v) - dot(*g, u, op.apply_plus(v))) <= 1e-10 * scale);
      REQUIRE(std::abs(dot(*g, op.apply_minus(u), v) - dot(*g, u, op.apply_minus(v))) <= 1e-10 * scale);
    }
  }
  SECTION("conjugation symmetry conj(Lw) = -s3 L s3 conj(w)") {
    std::mt19937_64 rng(6);
    const auto w = random_field(g, rng, true);
    const auto lhs = conj(op.apply_L(w));
    const auto cw = conj(w);
    const auto s3cw = TwoComponentField(g, cw.first, -cw.second);
    auto r = op.apply_L(s3cw);
    r = TwoComponentField(g, -r.first, r.second);
    REQUIRE(norm2(lhs - r) <= 1e-12 * norm2(lhs));
  }
  SECTION("free problem: translation zero mode") {
    ModelConfig m = default_model();
    m.potential.h = 0.0;
    const auto op0 = linearize(m, g, m.lambda);
    const RVec px = derivative(*g, op0.phi);
    REQUIRE(norm2(*g, op0.apply_plus(px)) <= 1e-8);
    REQUIRE_THROWS_AS(discrete_spectrum(op0), NumericalError);
  }
  SECTION("radial grids are rejected") {
    ModelConfig m = default_model();
    m.dimension = GridMode::radial3d;
    REQUIRE_THROWS_AS(linearize(m, Grid::radial(256, 20.0), 0.3), ConfigError);
  }
}

TEST_CASE("internal mode") {
  const auto& op = default_op();
  const auto& s = default_spec();
  const Grid& g = *op.grid;
  REQUIRE(s.epsilon > 0.0);
  REQUIRE(s.epsilon < op.lambda);
  REQUIRE(s.N == 1);
  REQUIRE(s.residual_plus <= 1e-8);
  REQUIRE(s.residual_minus <= 1e-8);
  REQUIRE(s.pairing_xi_eta > 0.0);
  const double alt = dot(g, op.apply_minus(s.eta), s.eta) / s.epsilon;
  REQUIRE(std::abs(s.pairing_xi_eta - alt) <= 1e-8);
  REQUIRE(std::abs(dot(g, op.phi, s.xi)) <= 1e-10);
  REQUIRE(std::abs(dot(g, op.dphi, s.eta)) <= 1e-10);
  REQUIRE(dot(g, s.xi, derivative(g, op.phi)) > 0.0);

  SECTION("dense odd-sector oracle") {
    const auto d = dense_discrete_spectrum(op);
    REQUIRE(std::abs(d.epsilon / s.epsilon - 1.0) <= 1e-8);
    REQUIRE((d.xi - s.xi).cwiseAbs().maxCoeff() <= 1e-6 * s.xi.cwiseAbs().maxCoeff());
  }
  SECTION("leading-order frequency: discrepancy shrinks with h") {
    const GridPtr grid = op.grid;
    auto rel = [&](double h) {
      ModelConfig m = default_model();
      m.potential.h = h;
      const auto sp = discrete_spectrum(linearize(m, grid, m.lambda));
      return std::abs(sp.epsilon / (h * std::sqrt(2.0 * m.potential.second_derivative_at_zero())) - 1.0);
    };
    const double r1 = rel(0.6), r2 = rel(0.3), r3 = rel(0.15);
    REQUIRE(r2 < r1);
    REQUIRE(r3 < r2);
  }
  SECTION("order of the resonance") {
    REQUIRE(fgr_order(0.21, 0.3) == 1);
    REQUIRE(fgr_order(0.14, 0.3) == 2);
    REQUIRE(fgr_order(0.099, 0.3) == 3);
  }
}

TEST_CASE("discrete mode count and stability") {
  const auto c = discrete_mode_count(default_op());
  REQUIRE(c.total == 4);
  REQUIRE(c.zero_modes == 1);
  REQUIRE(c.internal_pairs == 1);
  REQUIRE(c.max_real_part <= 1e-6);
}

TEST_CASE("Riesz projection") {
  const auto& op = default_op();
  const RieszProjection P(op, default_spec());
  const auto& g = op.grid;
  std::mt19937_64 rng(8);
  SECTION("discrete space is fixed and annihilated by Pc") {
    for (const auto& e : P.basis()) {
      REQUIRE(norm2(P.discrete(e) - e) <= 1e-8 * norm2(e));
      REQUIRE(norm2(P.continuous(e)) <= 1e-8 * norm2(e));
    }
  }
  SECTION("idempotent on 100 random vectors") {
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const auto w = random_field(g, rng, false);
      const auto p = P.discrete(w);
      worst = std::max(worst, norm2(P.discrete(p) - p) / norm2(w));
    }
    REQUIRE(worst <= 1e-8);
  }
  SECTION("commutes with L") {
    for (int t = 0; t < 5; ++t) {
      const auto w = random_field(g, rng, true);
      const auto lhs = P.discrete(op.apply_L(w));
      const auto rhs = op.apply_L(P.discrete(w));
      REQUIRE(norm2(lhs - rhs) <= 1e-6 * norm2(w));
    }
  }
  SECTION("degenerate pairing is rejected") {
    SpectralData bad = default_spec();
    bad.pairing_xi_eta = 0.0;
    REQUIRE_THROWS_AS(RieszProjection(op, bad), NumericalError);
  }
}

TEST_CASE("threshold resonance probe") {
  const auto& op = default_op();
  SECTION("free operator is resonant") {
    const auto p = resonance_indicator(op, 1, 1e-3, true);
    REQUIRE(p.indicator <= 1e-10);
    REQUIRE(p.resonance);
  }
  SECTION("default scenario is not resonant at either threshold") {
    for (int s : {1, -1}) {
      const auto p = resonance_indicator(op, s);
      REQUIRE(p.indicator >= 1e-2);
      REQUIRE_FALSE(p.resonance);
    }
  }
  SECTION("continuous in lambda") {
    const auto op2 = linearize(default_model(), op.grid, 0.301);
    const double a = resonance_indicator(op, 1).indicator, b = resonance_indicator(op2, 1).indicator;
    REQUIRE(std::abs(a - b) < 1e-2);
  }
}
