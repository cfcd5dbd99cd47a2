#include "catch_amalgamated.hpp"

#include "solitonlab/errors.hpp"
#include "solitonlab/resolvent.hpp"

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

struct Setup {
  LinearizedOperator op;
  SpectralData spec;
  Setup(std::size_t n, double L) : op(linearize(default_model(), Grid::line(n, L), 0.3)), spec(discrete_spectrum(op)) {}
};

const Setup& base() {
  static const Setup s(2048, 80.0);
  return s;
}

const FgrResult& base_fgr() {
  static const FgrResult r = [] {
    FgrResult f = fgr_coefficient(base().op, base().spec);
    fgr_box_check(f, default_model(), 2048, 120.0);
    return f;
  }();
  return r;
}

TwoComponentField bump(const GridPtr& g, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  const double c1 = nd(rng), c2 = nd(rng), c3 = nd(rng), c4 = nd(rng);
  CVec a(g->size()), b(g->size());
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const double x = g->nodes()[j];
    a[j] = cplx(c1, c2) * std::exp(-0.4 * (x - 0.7) * (x - 0.7));
    b[j] = cplx(c3, c4) * x * std::exp(-0.3 * x * x);
  }
  return {g, a, b};
}

}  // namespace

TEST_CASE("gap-point resolvent") {
  const auto& S = base();
  const RieszProjection P(S.op, S.spec);
  std::mt19937_64 rng(12);
  const auto g = bump(S.op.grid, rng);
  ResolventRequest req;
  req.layer.enabled = false;
  SECTION("mu = 0 back-substitution") {
    const auto sol = resolvent_apply(S.op, P, req, g);
    TwoComponentField r = S.op.apply_L(sol.w) - P.continuous(g);
    REQUIRE(norm2(r) <= 1e-8);
    REQUIRE(norm2(P.discrete(sol.w)) <= 1e-8 * norm2(sol.w));
  }
  SECTION("resolvent identity") {
    ResolventRequest r1 = req, r2 = req;
    r1.mu = 0.05;
    r2.mu = -0.12;
    const auto w1 = resolvent_apply(S.op, P, r1, g).w;
    const auto w2 = resolvent_apply(S.op, P, r2, g).w;
    const auto v = resolvent_apply(S.op, P, r2, w1).w;
    const auto lhs = w1 - w2;
    const auto rhs = cplx(0.0, r1.mu - r2.mu) * v;
    REQUIRE(norm2(lhs - rhs) <= 1e-6 * norm2(lhs));
  }
  SECTION("discrete eigen-direction") {
    const TwoComponentField vplus(S.op.grid, S.spec.xi.cast<cplx>(), cplx(0, 1) * S.spec.eta.cast<cplx>());
    req.mu = S.spec.epsilon;
    const auto sol = resolvent_apply(S.op, P, req, vplus);
    REQUIRE(norm2(sol.w) <= 1e-8 * norm2(vplus));
    req.project = false;
    REQUIRE_THROWS_AS(resolvent_apply(S.op, P, req, vplus), NumericalError);
    try {
      resolvent_apply(S.op, P, req, vplus);
    } catch (const NumericalError& e) {
      REQUIRE(e.kind() == ErrorKind::SpectralPointOnDiscrete);
    }
  }
  SECTION("admissible output for i-admissible sources in the gap") {
    // (i real, real) in, (real, i real) out
    const Grid& grid = *S.op.grid;
    CVec a(grid.size()), b(grid.size());
    for (Eigen::Index j = 0; j < a.size(); ++j) {
      const double x = grid.nodes()[j];
      a[j] = cplx(0.0, std::exp(-x * x) * (1.0 + 0.3 * x));
      b[j] = std::exp(-0.5 * x * x) * std::cos(x);
    }
    const TwoComponentField src(S.op.grid, a, b);
    for (double mu : {0.0, 0.1, -0.25, 0.29}) {
      ResolventRequest r = req;
      r.mu = mu;
      const auto w = resolvent_apply(S.op, P, r, src).w;
      REQUIRE(admissibility_residual(w) <= 1e-8);
    }
  }
}

TEST_CASE("admissibility residual") {
  auto g = Grid::line(256, 20.0);
  const RVec u = g->nodes().array().unaryExpr([](double x) { return std::exp(-x * x); });
  const CVec zero = CVec::Zero(256);
  REQUIRE(admissibility_residual(TwoComponentField(g, u.cast<cplx>(), cplx(0, 1) * u.cast<cplx>())) == 0.0);
  REQUIRE(admissibility_residual(TwoComponentField(g, cplx(0, 1) * u.cast<cplx>(), zero)) == Catch::Approx(1.0));
  REQUIRE(admissibility_residual(TwoComponentField(g)) == 0.0);
}

TEST_CASE("limiting absorption at 2 eps") {
  const auto& S = base();
  const RieszProjection P(S.op, S.spec);
  const auto F = internal_mode_source(S.op, S.spec);
  std::vector<TwoComponentField> ws;
  for (double d : {1e-2, 5e-3, 2.5e-3}) {
    ResolventRequest req;
    req.mu = 2.0 * S.spec.epsilon;
    req.delta = d;
    req.layer = resolvent_layer();
    ws.push_back(resolvent_apply(S.op, P, req, F).w);
  }
  const double d1 = weighted_norm(ws[1] - ws[0], 4.0), d2 = weighted_norm(ws[2] - ws[1], 4.0);
  REQUIRE(d2 < d1);
  // linear convergence in delta: successive differences halve
  REQUIRE(d2 / d1 == Catch::Approx(0.5).margin(0.15));
}

TEST_CASE("Fermi Golden Rule coefficient") {
  const auto& f = base_fgr();
  REQUIRE(f.N == 1);
  REQUIRE(f.Y.real() < 0.0);
  REQUIRE(f.richardson_spread < 0.05);
  REQUIRE(f.box_sensitivity >= 0.0);
  REQUIRE(f.box_sensitivity < 0.05);
  for (const auto& e : f.minus) REQUIRE(e.Y.real() < 0.0);
  // the opposite approach direction flips the sign
  REQUIRE(f.Y_plus.real() == Catch::Approx(-f.Y.real()).epsilon(1e-6));
  SECTION("grid refinement n -> 2n") {
    const Setup coarse(1024, 80.0);
    FgrOptions o;
    o.compute_plus = false;
    const auto fc = fgr_coefficient(coarse.op, coarse.spec, o);
    REQUIRE(std::abs(fc.Y.real() / f.Y.real() - 1.0) < 0.05);
  }
  SECTION("damping sequence must decrease") {
    FgrOptions o;
    o.deltas = {1e-3, 2e-3};
    REQUIRE_THROWS_AS(fgr_coefficient(base().op, base().spec, o), std::invalid_argument);
  }
}

TEST_CASE("quadratic expansion coefficients") {
  const auto& S = base();
  const auto& f = base_fgr();
  const auto r11 = compute_Rmn(S.op, S.spec, 1, 1, &f);
  REQUIRE(r11.admissibility <= 1e-8);
  REQUIRE(r11.tail_rate >= 0.8 * std::sqrt(S.op.lambda));
  const auto r20 = compute_Rmn(S.op, S.spec, 2, 0, &f);
  const auto r02 = compute_Rmn(S.op, S.spec, 0, 2, &f);
  REQUIRE((r02.field.first - r20.field.first.conjugate()).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((r02.field.second - r20.field.second.conjugate()).cwiseAbs().maxCoeff() == 0.0);
  SECTION("2 eps inside the gap gives an admissible R20") {
    // a shallower well (h = 0.15) puts 2 eps below the threshold (N = 2)
    ModelConfig m = default_model();
    m.potential.h = 0.15;
    const auto op = linearize(m, S.op.grid, m.lambda);
    const auto sp = discrete_spectrum(op);
    REQUIRE(2.0 * sp.epsilon < m.lambda);
    const auto r = compute_Rmn(op, sp, 2, 0);
    REQUIRE(r.admissibility <= 1e-8);
  }
  SECTION("unsupported indices") { REQUIRE_THROWS_AS(compute_Rmn(S.op, S.spec, 3, 0, &f), std::invalid_argument); }
}
