#include "solitonlab/ground_state.hpp"

#include "solitonlab/errors.hpp"
#include "solitonlab/fft.hpp"
#include "solitonlab/krylov.hpp"
#include "solitonlab/parallel.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <sstream>

namespace solitonlab {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

SpMat radial_laplacian_matrix(const Grid& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  std::vector<Eigen::Triplet<double>> trip;
  RVec e = RVec::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    const RVec col = laplacian(g, e);
    e[j] = 0.0;
    for (Eigen::Index i = std::max<Eigen::Index>(0, j - 3); i < std::min(n, j + 4); ++i)
      if (col[i] != 0.0) trip.emplace_back(i, j, col[i]);
  }
  SpMat m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

RVec lplus_potential(const ModelConfig& model, const Grid& g, double lambda, const RVec& phi) {
  const RVec V = model.potential.samples(g);
  RVec q(phi.size());
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    const double s = phi[j] * phi[j];
    q[j] = lambda + V[j] - model.nonlinearity.f(s) - 2.0 * model.nonlinearity.fprime(s) * s;
  }
  return q;
}

// Solves (-Delta + q) u = b; line grids by preconditioned GMRES, radial by sparse LU.
RVec solve_schrodinger(const Grid& g, const RVec& q, double shift, const RVec& b, double tol, bool& ok) {
  if (g.mode() == GridMode::radial3d) {
    SpMat A = -radial_laplacian_matrix(g);
    for (Eigen::Index j = 0; j < q.size(); ++j) A.coeffRef(j, j) += q[j];
    A.makeCompressed();
    Eigen::SparseLU<SpMat> lu;
    lu.compute(A);
    ok = lu.info() == Eigen::Success;
    if (!ok) return RVec::Zero(b.size());
    RVec x = lu.solve(b);
    ok = lu.info() == Eigen::Success && x.allFinite();
    return x;
  }
  const auto& F = fourier(g.size());
  const RVec k2 = g.wavenumbers().array().square();
  const RVec pre = (k2.array() + shift).inverse();
  auto A = [&](const RVec& u) -> RVec { return -laplacian(g, u) + RVec(q.array() * u.array()); };
  auto M = [&](const RVec& u) -> RVec { return F.apply_multiplier(CVec(u.cast<cplx>()), pre).real(); };
  auto res = gmres(A, b, M, RVec(RVec::Zero(b.size())), tol, 80, 2000);
  ok = res.converged;
  return res.x;
}

void symmetrize(const Grid& g, RVec& u) {
  if (g.mode() == GridMode::line1d) u = even_part(g, u);
}

// far-field value of the Schrodinger potential
double preconditioner_shift(const ModelConfig&, double lambda) { return std::max(lambda, 1e-2); }

SolitonSolve newton(const ModelConfig& model, const GridPtr& grid, double lambda, RVec phi,
                    const NewtonOptions& opt) {
  const Grid& g = *grid;
  symmetrize(g, phi);
  RVec F = soliton_residual(model, g, lambda, phi);
  double res = F.cwiseAbs().maxCoeff();
  int it = 0;
  const double shift = preconditioner_shift(model, lambda);
  for (; it < opt.max_iterations && res > opt.tol; ++it) {
    const RVec q = lplus_potential(model, g, lambda, phi);
    bool ok = false;
    RVec step = solve_schrodinger(g, q, shift, RVec(-F), 1e-13, ok);
    symmetrize(g, step);
    // backtracking on the sup residual
    double t = 1.0;
    RVec trial;
    double trial_res = 0.0;
    for (int bt = 0; bt < 12; ++bt) {
      trial = phi + t * step;
      const RVec Ft = soliton_residual(model, g, lambda, trial);
      trial_res = Ft.allFinite() ? Ft.cwiseAbs().maxCoeff() : INFINITY;
      if (trial_res < res || trial_res <= opt.tol) {
        F = Ft;
        break;
      }
      t *= 0.5;
    }
    if (!(trial_res < res) && trial_res > opt.tol) {
      // a full unit step that fails to reduce the residual below roundoff ends the iteration
      if (res < 1e2 * opt.tol) break;
      std::ostringstream os;
      os << "residual stalled at " << res << " for lambda=" << lambda;
      throw NumericalError(ErrorKind::NewtonDiverged, os.str());
    }
    phi = trial;
    res = trial_res;
  }
  if (!(res <= opt.tol) && !(res < 1e2 * opt.tol)) {
    std::ostringstream os;
    os << "no convergence after " << it << " iterations (residual " << res << ") at lambda=" << lambda;
    throw NumericalError(ErrorKind::NewtonDiverged, os.str());
  }
  const double peak = phi.maxCoeff();
  if (!(peak > 0.0) || phi.minCoeff() < -1e-9 * peak) {
    std::ostringstream os;
    os << "Newton limit is sign-indefinite (min " << phi.minCoeff() << ", max " << peak << ") at lambda=" << lambda;
    throw NumericalError(ErrorKind::NegativeSolution, os.str());
  }
  return {RealField(grid, phi), res, it};
}

}  // namespace

RealField free_soliton_cubic(const GridPtr& grid, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("free soliton needs mu > 0");
  RVec v(grid->nodes().size());
  const double a = std::sqrt(2.0 * mu), s = std::sqrt(mu);
  for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = a / std::cosh(s * grid->nodes()[j]);
  return {grid, v};
}

RealField free_soliton_cubic_dmu(const GridPtr& grid, double mu) {
  RVec v(grid->nodes().size());
  const double s = std::sqrt(mu);
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double x = grid->nodes()[j];
    const double sech = 1.0 / std::cosh(s * x);
    // d/dmu [sqrt(2mu) sech(sqrt(mu) x)]
    v[j] = sech / std::sqrt(2.0 * mu) - std::sqrt(2.0 * mu) * sech * std::tanh(s * x) * x / (2.0 * s);
  }
  return {grid, v};
}

RVec soliton_residual(const ModelConfig& model, const Grid& grid, double lambda, const RVec& phi) {
  const RVec V = model.potential.samples(grid);
  RVec out = -laplacian(grid, phi);
  for (Eigen::Index j = 0; j < out.size(); ++j)
    out[j] += (lambda + V[j] - model.nonlinearity.f(phi[j] * phi[j])) * phi[j];
  return out;
}

SolitonSolve solve_soliton(const ModelConfig& model, const GridPtr& grid, double lambda, const RealField* seed,
                           const NewtonOptions& opt) {
  if (!(lambda > -model.potential.inf()) || !(lambda + model.potential.V(0.0) > 0.0)) {
    std::ostringstream os;
    os << "lambda=" << lambda << " outside the existence window (needs lambda > " << -model.potential.inf() << ")";
    throw NumericalError(ErrorKind::NewtonDiverged, os.str());
  }
  if (seed) {
    require_same_grid(*seed->grid, *grid);
    if (seed->values.minCoeff() < 0.0 && seed->values.minCoeff() < -1e-9 * seed->values.maxCoeff())
      throw std::invalid_argument("soliton seed must be positive");
    return newton(model, grid, lambda, seed->values, opt);
  }
  const double mu = lambda + model.potential.V(0.0);
  RVec phi = free_soliton_cubic(grid, mu).values;
  const double h_target = model.potential.h;
  ModelConfig m = model;
  m.potential.h = 0.0;
  SolitonSolve sol = newton(m, grid, lambda, phi, opt);
  if (h_target == 0.0) return sol;
  const int steps = std::max(1, static_cast<int>(std::ceil(h_target / opt.h_step)));
  for (int s = 1; s <= steps; ++s) {
    m.potential.h = h_target * static_cast<double>(s) / static_cast<double>(steps);
    sol = newton(m, grid, lambda, sol.phi.values, opt);
  }
  return sol;
}

RealField dlambda_phi(const ModelConfig& model, const RealField& phi, double lambda) {
  const Grid& g = *phi.grid;
  const RVec q = lplus_potential(model, g, lambda, phi.values);
  bool ok = false;
  RVec u = solve_schrodinger(g, q, preconditioner_shift(model, lambda), RVec(-phi.values), 1e-13, ok);
  symmetrize(g, u);
  const double nu = norm2(g, u), np = norm2(g, phi.values);
  const RVec r = -laplacian(g, u) + RVec(q.array() * u.array()) + phi.values;
  if (!u.allFinite() || nu > 1e8 * np || norm2(g, r) > 1e-9 * np) {
    std::ostringstream os;
    os << "L+ solve failed on the symmetric sector at lambda=" << lambda;
    throw NumericalError(ErrorKind::SingularSystem, os.str());
  }
  return {phi.grid, u};
}

DecayFitResult decay_fit(const RealField& phi) {
  const Grid& g = *phi.grid;
  const double peak = phi.values.cwiseAbs().maxCoeff();
  const bool radial = g.mode() == GridMode::radial3d;
  std::vector<double> xs, ys;
  for (Eigen::Index j = 0; j < phi.values.size(); ++j) {
    const double x = g.nodes()[j];
    if (x <= 0.0 || x > 0.9 * g.half_width()) continue;
    const double v = phi.values[j];
    if (!(v > 1e-10 * peak) || v > 1e-3 * peak) continue;
    xs.push_back(x);
    ys.push_back(std::log(radial ? v * x : v));
  }
  if (xs.size() < 20) {
    std::ostringstream os;
    os << "tail window has " << xs.size() << " points";
    throw NumericalError(ErrorKind::TailTooShort, os.str());
  }
  const auto n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / n;
  double rss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) rss += std::pow(ys[i] - icpt - slope * xs[i], 2);
  return {-slope, std::sqrt(rss / n), xs.size()};
}

bool SolitonBranch::stable() const {
  for (bool u : unstable)
    if (u) return false;
  return true;
}

SolitonBranch branch(const ModelConfig& model, const GridPtr& grid, double lambda_min, double lambda_max, int steps,
                     double dlambda, const NewtonOptions& opt) {
  if (steps < 1 || !(lambda_max >= lambda_min)) throw std::invalid_argument("invalid branch range");
  SolitonBranch b;
  const int npts = steps + 1;
  for (int i = 0; i < npts; ++i)
    b.lambda.push_back(steps == 0 ? lambda_min
                                  : lambda_min + (lambda_max - lambda_min) * static_cast<double>(i) / steps);
  // serial continuation pass provides seeds
  std::vector<SolitonSolve> sols;
  for (int i = 0; i < npts; ++i) {
    try {
      if (i == 0) sols.push_back(solve_soliton(model, grid, b.lambda[0], nullptr, opt));
      else sols.push_back(solve_soliton(model, grid, b.lambda[static_cast<std::size_t>(i)], &sols.back().phi, opt));
    } catch (const NumericalError& e) {
      std::ostringstream os;
      os << "branch point lambda=" << b.lambda[static_cast<std::size_t>(i)] << ": " << e.what();
      throw NumericalError(e.kind(), os.str());
    }
  }
  b.phi.resize(static_cast<std::size_t>(npts));
  b.dphi.resize(static_cast<std::size_t>(npts));
  b.delta.resize(static_cast<std::size_t>(npts));
  b.ddelta.resize(static_cast<std::size_t>(npts));
  b.ddelta_pairing.resize(static_cast<std::size_t>(npts));
  b.decay_rate.resize(static_cast<std::size_t>(npts));
  b.residual.resize(static_cast<std::size_t>(npts));
  b.unstable.resize(static_cast<std::size_t>(npts));
  parallel_for(static_cast<std::size_t>(npts), [&](std::size_t i) {
    const double lam = b.lambda[i];
    const auto& phi = sols[i].phi;
    const auto up = solve_soliton(model, grid, lam + dlambda, &phi, opt);
    const auto dn = solve_soliton(model, grid, lam - dlambda, &phi, opt);
    b.phi[i] = phi;
    b.residual[i] = sols[i].residual;
    b.delta[i] = std::pow(norm2(*grid, phi.values), 2);
    b.ddelta[i] = (std::pow(norm2(*grid, up.phi.values), 2) - std::pow(norm2(*grid, dn.phi.values), 2)) /
                  (2.0 * dlambda);
    b.dphi[i] = dlambda_phi(model, phi, lam);
    b.ddelta_pairing[i] = 2.0 * dot(*grid, phi.values, b.dphi[i].values);
    b.unstable[i] = !(b.ddelta[i] > 0.0);
    try {
      b.decay_rate[i] = decay_fit(phi).rate;
    } catch (const NumericalError&) {
      b.decay_rate[i] = NAN;
    }
  });
  return b;
}

GradientFlowResult normalized_gradient_flow(const ModelConfig& model, const GridPtr& grid, double mass,
                                            const RealField* seed, double tau, int max_iterations, double tol) {
  if (!(mass > 0.0)) throw std::invalid_argument("gradient flow needs a positive mass");
  const Grid& g = *grid;
  const RVec V = model.potential.samples(g);
  RVec phi;
  if (seed) {
    phi = seed->values;
  } else {
    phi.resize(g.nodes().size());
    for (Eigen::Index j = 0; j < phi.size(); ++j) phi[j] = std::exp(-0.5 * g.nodes()[j] * g.nodes()[j]);
  }
  auto normalize = [&](RVec& u) { u *= std::sqrt(mass) / norm2(g, u); };
  normalize(phi);
  // backward Euler with f frozen: (1 + tau (-Delta + V - f(phi^2))) phi* = phi, then renormalize.
  // The whole operator sits on the implicit side so the fixed point does not depend on tau.
  SpMat lap;
  if (g.mode() == GridMode::radial3d) lap = radial_laplacian_matrix(g);
  RVec pre;
  if (g.mode() == GridMode::line1d) pre = (1.0 + tau * g.wavenumbers().array().square()).inverse();
  GradientFlowResult out;
  int it = 0;
  double change = INFINITY;
  for (; it < max_iterations && change > tol; ++it) {
    RVec diag(phi.size());
    for (Eigen::Index j = 0; j < diag.size(); ++j) diag[j] = 1.0 + tau * (V[j] - model.nonlinearity.f(phi[j] * phi[j]));
    RVec next;
    if (g.mode() == GridMode::line1d) {
      auto A = [&](const RVec& u) { return RVec(diag.cwiseProduct(u) - tau * laplacian(g, u)); };
      auto M = [&](const RVec& u) { return fourier(g.size()).apply_multiplier(CVec(u.cast<cplx>()), pre).real().eval(); };
      const auto sol = pcg(A, phi, M, phi, 1e-14, 500);
      next = sol.x;
    } else {
      SpMat A = -tau * lap;
      for (Eigen::Index j = 0; j < A.rows(); ++j) A.coeffRef(j, j) += diag[j];
      A.makeCompressed();
      Eigen::SparseLU<SpMat> lu(A);
      if (lu.info() != Eigen::Success) throw NumericalError(ErrorKind::SingularSystem, "gradient flow step");
      next = lu.solve(phi);
    }
    symmetrize(g, next);
    normalize(next);
    change = (next - phi).cwiseAbs().maxCoeff();
    phi = next;
  }
  RVec H = -laplacian(g, phi);
  for (Eigen::Index j = 0; j < H.size(); ++j) H[j] += (V[j] - model.nonlinearity.f(phi[j] * phi[j])) * phi[j];
  out.lambda = -dot(g, phi, H) / mass;
  out.phi = RealField(grid, phi);
  out.iterations = it;
  out.change = change;
  return out;
}

double max_continuable_h(const ModelConfig& model, const GridPtr& grid, double lambda, double h_max,
                         const NewtonOptions& opt) {
  auto works = [&](double h) {
    ModelConfig m = model;
    m.potential.h = h;
    try {
      solve_soliton(m, grid, lambda, nullptr, opt);
      return true;
    } catch (const NumericalError&) {
      return false;
    }
  };
  double lo = 0.0, hi = std::min(0.25, h_max);
  while (hi < h_max && works(hi)) {
    lo = hi;
    hi = std::min(2.0 * hi, h_max);
  }
  if (works(hi)) return hi;
  for (int it = 0; it < 8; ++it) {
    const double mid = 0.5 * (lo + hi);
    (works(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace solitonlab
