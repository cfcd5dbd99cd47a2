#include "solitonlab/resolvent.hpp"

#include "solitonlab/collocation.hpp"
#include "solitonlab/errors.hpp"
#include "solitonlab/parallel.hpp"

#include <cmath>
#include <sstream>

namespace solitonlab {

namespace {

// rank correction weight; any c with c, c +- i eps away from i mu + delta works
constexpr double kRankShift = 1.0;

bool near_discrete(const ResolventRequest& r, double eps) {
  if (r.delta != 0.0 || (r.layer.enabled && r.layer.strength != 0.0)) return false;
  return std::abs(r.mu) < 1e-6 || std::abs(r.mu - eps) < 1e-6 || std::abs(r.mu + eps) < 1e-6;
}

}  // namespace

ResolventSolver::ResolventSolver(const LinearizedOperator& op, const RieszProjection& P, const ResolventRequest& req)
    : op_(op), P_(P), req_(req), W_(req.layer.profile(*op.grid)) {
  if (!req.project && near_discrete(req, P.epsilon())) {
    std::ostringstream os;
    os << "mu = " << req.mu << " is a discrete eigenvalue of L and the right-hand side is not projected";
    throw NumericalError(ErrorKind::SpectralPointOnDiscrete, os.str());
  }
}

const Eigen::PartialPivLU<Eigen::MatrixXcd>& ResolventSolver::factor(bool even) const {
  auto& slot = lu_[even ? 0 : 1];
  if (slot) return *slot;
  const ParitySector sec(op_.grid, even);
  const Eigen::Index s = sec.size();
  const Eigen::MatrixXd Lm = sec.schrodinger(op_.q_minus);
  const Eigen::MatrixXd Lp = sec.schrodinger(op_.q_plus);
  const RVec Wr = sec.restrict_to(W_);
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(2 * s, 2 * s);
  M.topRightCorner(s, s) = Lm.cast<cplx>();
  M.bottomLeftCorner(s, s) = -Lp.cast<cplx>();
  const cplx shift(req_.delta, req_.mu);
  for (Eigen::Index i = 0; i < s; ++i) {
    M(i, i) -= shift + Wr[i];
    M(s + i, s + i) -= shift + Wr[i];
  }
  if (req_.project) {
    // + c sum_k e_k f_k^T, restricted to the sector
    const auto basis = P_.basis();
    const auto fun = P_.functionals();
    const RVec& wts = sec.weights();
    // zero-mode pair is even, the internal-mode pair odd
    for (std::size_t k = even ? 0 : 2; k < (even ? 2u : 4u); ++k) {
      Eigen::VectorXcd e(2 * s), f(2 * s);
      e << sec.restrict_to(basis[k].first), sec.restrict_to(basis[k].second);
      f << sec.restrict_to(fun[k].first).cwiseProduct(wts.cast<cplx>()),
          sec.restrict_to(fun[k].second).cwiseProduct(wts.cast<cplx>());
      M.noalias() += kRankShift * e * f.transpose();
    }
  }
  slot = std::make_unique<Eigen::PartialPivLU<Eigen::MatrixXcd>>(M);
  return *slot;
}

ResolventSolution ResolventSolver::solve(const TwoComponentField& g) const {
  require_same_grid(*g.grid, *op_.grid);
  const Grid& grid = *op_.grid;
  const TwoComponentField rhs = req_.project ? P_.continuous(g) : g;
  TwoComponentField w(op_.grid);
  for (bool even : {true, false}) {
    const CVec a = even ? even_part(grid, rhs.first) : odd_part(grid, rhs.first);
    const CVec b = even ? even_part(grid, rhs.second) : odd_part(grid, rhs.second);
    if (a.cwiseAbs().maxCoeff() == 0.0 && b.cwiseAbs().maxCoeff() == 0.0) continue;
    const ParitySector sec(op_.grid, even);
    const Eigen::Index s = sec.size();
    Eigen::VectorXcd r(2 * s);
    r << sec.restrict_to(a), sec.restrict_to(b);
    const Eigen::VectorXcd x = factor(even).solve(r);
    w.first += sec.extend(CVec(x.head(s)));
    w.second += sec.extend(CVec(x.tail(s)));
  }
  // matrix-free residual of the unmodified operator
  const cplx shift(req_.delta, req_.mu);
  TwoComponentField res = op_.apply_L(w);
  res.first -= CVec((shift + W_.cast<cplx>().array()).matrix().cwiseProduct(w.first));
  res.second -= CVec((shift + W_.cast<cplx>().array()).matrix().cwiseProduct(w.second));
  if (req_.project) res += kRankShift * P_.discrete(w);
  res -= rhs;
  ResolventSolution out{w, 0.0};
  const double scale = norm2(rhs);
  out.residual = scale > 0.0 ? norm2(res) / scale : norm2(res);
  if (!w.finite() || out.residual > 1e-8) {
    std::ostringstream os;
    os << "resolvent solve at mu = " << req_.mu << ", delta = " << req_.delta << " left relative residual "
       << out.residual;
    throw NumericalError(ErrorKind::SolveFailed, os.str());
  }
  return out;
}

ResolventSolution resolvent_apply(const LinearizedOperator& op, const RieszProjection& P, const ResolventRequest& req,
                                  const TwoComponentField& g) {
  return ResolventSolver(op, P, req).solve(g);
}

double admissibility_residual(const TwoComponentField& u) {
  const Grid& g = *u.grid;
  const double total = norm2(u);
  if (total == 0.0) return 0.0;
  return (norm2(g, RVec(u.first.imag())) + norm2(g, RVec(u.second.real()))) / total;
}

namespace {

RVec fprime_phi(const LinearizedOperator& op) {
  RVec v(op.phi.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = op.model.nonlinearity.fprime(op.phi[j] * op.phi[j]) * op.phi[j];
  return v;
}

RVec fsecond_term(const LinearizedOperator& op, const RVec& xi) {
  RVec v(op.phi.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double p = op.phi[j];
    v[j] = 2.0 * op.model.nonlinearity.fsecond(p * p) * p * p * p * xi[j] * xi[j];
  }
  return v;
}

}  // namespace

TwoComponentField internal_mode_source(const LinearizedOperator& op, const SpectralData& spec) {
  const RVec fp = fprime_phi(op);
  const RVec xe = spec.xi.cwiseProduct(spec.eta);
  const CVec first = cplx(0.0, -2.0) * fp.cwiseProduct(xe).cast<cplx>();
  const RVec second = fp.cwiseProduct(RVec(3.0 * spec.xi.array().square() - spec.eta.array().square())) +
                      fsecond_term(op, spec.xi);
  return {op.grid, first, second.cast<cplx>()};
}

TwoComponentField mixed_source(const LinearizedOperator& op, const SpectralData& spec) {
  const RVec fp = fprime_phi(op);
  const RVec second = fp.cwiseProduct(RVec(3.0 * spec.xi.array().square() + spec.eta.array().square())) +
                      fsecond_term(op, spec.xi);
  return {op.grid, CVec::Zero(op.phi.size()), second.cast<cplx>()};
}

namespace {

// <s1 a, b> = int conj(s1 a) . b with s1 a = (-a2, a1)
cplx sigma1_pairing(const TwoComponentField& a, const TwoComponentField& b) {
  const Grid& g = *a.grid;
  return integrate(g, CVec((-a.second).conjugate().cwiseProduct(b.first) + a.first.conjugate().cwiseProduct(b.second)));
}

struct SequenceOut {
  std::vector<FgrEstimate> est;
  std::vector<TwoComponentField> fields;
};

SequenceOut run_sequence(const LinearizedOperator& op, const RieszProjection& P, const SpectralData& spec,
                         const FgrOptions& opt, double sign) {
  const TwoComponentField G = internal_mode_source(op, spec);
  const TwoComponentField F = (1.0 / (2.0 * std::sqrt(spec.pairing_xi_eta))) * P.continuous(G);
  SequenceOut out;
  out.est.resize(opt.deltas.size());
  out.fields.resize(opt.deltas.size());
  parallel_for(opt.deltas.size(), [&](std::size_t i) {
    ResolventRequest req;
    req.mu = 2.0 * spec.epsilon;
    req.delta = sign * opt.deltas[i];
    req.layer = opt.layer;
    req.layer.strength = sign * opt.layer.strength;
    const auto sol = ResolventSolver(op, P, req).solve(F);
    out.est[i] = {req.delta, cplx(sigma1_pairing(F, sol.w).imag(), 0.0)};
    out.fields[i] = sol.w;
  });
  // imaginary part of Y from the real part of the same pairing
  for (std::size_t i = 0; i < out.est.size(); ++i)
    out.est[i].Y = cplx(out.est[i].Y.real(), sigma1_pairing(F, out.fields[i]).real());
  return out;
}

template <class T>
T richardson(const T& coarse, const T& fine, double ratio) {
  return (ratio * fine - coarse) * (1.0 / (ratio - 1.0));
}

TwoComponentField richardson_field(const TwoComponentField& coarse, const TwoComponentField& fine, double ratio) {
  return TwoComponentField(coarse.grid, (ratio * fine.first - coarse.first) / (ratio - 1.0),
                           (ratio * fine.second - coarse.second) / (ratio - 1.0));
}

}  // namespace

FgrResult fgr_coefficient(const LinearizedOperator& op, const SpectralData& spec, const FgrOptions& opt) {
  if (opt.deltas.size() < 2) throw std::invalid_argument("fgr needs at least two damping values");
  for (std::size_t i = 1; i < opt.deltas.size(); ++i)
    if (!(opt.deltas[i] < opt.deltas[i - 1] && opt.deltas[i] > 0.0))
      throw std::invalid_argument("damping sequence must be positive and decreasing");
  FgrResult res;
  res.N = spec.N;
  if (spec.N != 1) {
    std::ostringstream os;
    os << "the resonant source is implemented for N = 1 only (N = " << spec.N << ")";
    throw ConfigError(os.str());
  }
  const RieszProjection P(op, spec);
  const auto minus = run_sequence(op, P, spec, opt, 1.0);
  res.minus = minus.est;
  if (opt.compute_plus) res.plus = run_sequence(op, P, spec, opt, -1.0).est;
  const std::size_t k = opt.deltas.size();
  auto extrapolate = [&](const std::vector<FgrEstimate>& e, std::size_t i) {
    return richardson(e[i - 1].Y, e[i].Y, opt.deltas[i - 1] / opt.deltas[i]);
  };
  res.Y = extrapolate(res.minus, k - 1);
  if (opt.compute_plus) res.Y_plus = extrapolate(res.plus, k - 1);
  res.resolvent_2eps = richardson_field(minus.fields[k - 2], minus.fields[k - 1], opt.deltas[k - 2] / opt.deltas[k - 1]);
  if (k >= 3) {
    const cplx prev = extrapolate(res.minus, k - 2);
    res.richardson_spread = std::abs(res.Y.real() - prev.real()) / std::abs(res.Y.real());
  }
  for (std::size_t i = 1; i < k; ++i)
    res.max_step_change = std::max(res.max_step_change, std::abs(res.minus[i].Y.real() - res.minus[i - 1].Y.real()) /
                                                            std::abs(res.minus[i].Y.real()));
  if (res.max_step_change > 0.2) {
    std::ostringstream os;
    os << "successive estimates of Re Y differ by " << 100.0 * res.max_step_change << "%";
    throw NumericalError(ErrorKind::ExtrapolationUnstable, os.str());
  }
  return res;
}

void fgr_box_check(FgrResult& res, const ModelConfig& model, std::size_t n, double half_width, const FgrOptions& opt) {
  const auto grid = Grid::line(n, half_width);
  const auto op = linearize(model, grid, model.lambda);
  const auto spec = discrete_spectrum(op);
  FgrOptions o = opt;
  o.compute_plus = false;
  const auto other = fgr_coefficient(op, spec, o);
  res.compare_half_width = half_width;
  res.Y_compare = other.Y;
  res.box_sensitivity = std::abs(other.Y.real() - res.Y.real()) / std::abs(res.Y.real());
}

double tail_decay_rate(const TwoComponentField& u, double fraction) {
  const Grid& g = *u.grid;
  const RVec mag = (u.first.cwiseAbs2() + u.second.cwiseAbs2()).cwiseSqrt();
  const double peak = mag.maxCoeff();
  if (peak == 0.0) return 0.0;
  const double xmax = (1.0 - fraction) * g.half_width();
  std::vector<double> xs, ys;
  for (Eigen::Index j = static_cast<Eigen::Index>(g.center()); j < mag.size(); ++j) {
    const double x = g.nodes()[j], r = mag[j] / peak;
    if (x > xmax) break;
    if (r <= 1e-3 && r > 1e-12) {
      xs.push_back(x);
      ys.push_back(std::log(mag[j]));
    }
  }
  if (xs.size() < 20) return 0.0;
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ExpansionCoefficient compute_Rmn(const LinearizedOperator& op, const SpectralData& spec, int m, int n,
                                 const FgrResult* fgr, const FgrOptions& opt) {
  ExpansionCoefficient out;
  out.m = m;
  out.n = n;
  if (m == 1 && n == 1) {
    const RieszProjection P(op, spec);
    ResolventRequest req;
    req.layer.enabled = false;
    const auto sol = ResolventSolver(op, P, req).solve(mixed_source(op, spec));
    out.field = cplx(-0.5, 0.0) * sol.w;
  } else if ((m == 2 && n == 0) || (m == 0 && n == 2)) {
    TwoComponentField w;
    if (2.0 * spec.epsilon < op.lambda) {
      // 2 eps in the gap: a plain solve
      const RieszProjection P(op, spec);
      ResolventRequest req;
      req.mu = 2.0 * spec.epsilon;
      req.layer.enabled = false;
      w = ResolventSolver(op, P, req).solve(internal_mode_source(op, spec)).w;
    } else {
      FgrOptions o = opt;
      o.compute_plus = false;
      const FgrResult local = fgr ? FgrResult{} : fgr_coefficient(op, spec, o);
      const TwoComponentField& r = fgr ? fgr->resolvent_2eps : local.resolvent_2eps;
      // resolvent_2eps was computed for F = Pc G / (2 sqrt<xi,eta>)
      w = cplx(2.0 * std::sqrt(spec.pairing_xi_eta), 0.0) * r;
    }
    out.field = cplx(-0.25, 0.0) * w;
    if (m == 0) out.field = conj(out.field);
  } else {
    throw std::invalid_argument("only (2,0), (1,1) and (0,2) are implemented");
  }
  out.admissibility = admissibility_residual(out.field);
  out.tail_rate = tail_decay_rate(out.field);
  return out;
}

}  // namespace solitonlab
