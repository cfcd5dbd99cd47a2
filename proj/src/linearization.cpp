#include "solitonlab/linearization.hpp"

#include "solitonlab/collocation.hpp"
#include "solitonlab/errors.hpp"
#include "solitonlab/fft.hpp"
#include "solitonlab/ground_state.hpp"
#include "solitonlab/krylov.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace solitonlab {

namespace {

void require_line(const ModelConfig& model, const Grid& g) {
  if (model.dimension != GridMode::line1d || g.mode() != GridMode::line1d)
    throw ConfigError("linearization, resolvent and dynamics support dimension = line1d only");
}

}  // namespace

RVec LinearizedOperator::apply_plus(const RVec& u) const {
  return -laplacian(*grid, u) + RVec(q_plus.cwiseProduct(u));
}
RVec LinearizedOperator::apply_minus(const RVec& u) const {
  return -laplacian(*grid, u) + RVec(q_minus.cwiseProduct(u));
}
CVec LinearizedOperator::apply_plus(const CVec& u) const {
  return -laplacian(*grid, u) + CVec(q_plus.cast<cplx>().cwiseProduct(u));
}
CVec LinearizedOperator::apply_minus(const CVec& u) const {
  return -laplacian(*grid, u) + CVec(q_minus.cast<cplx>().cwiseProduct(u));
}

TwoComponentField LinearizedOperator::apply_L(const TwoComponentField& w) const {
  require_same_grid(*w.grid, *grid);
  return TwoComponentField(grid, apply_minus(w.second), -apply_plus(w.first));
}

LinearizedOperator linearize(const ModelConfig& model, const GridPtr& grid, double lambda) {
  require_line(model, *grid);
  const auto sol = solve_soliton(model, grid, lambda);
  return linearize(model, sol.phi, lambda);
}

LinearizedOperator linearize(const ModelConfig& model, const RealField& phi, double lambda) {
  require_line(model, *phi.grid);
  LinearizedOperator op;
  op.model = model;
  op.grid = phi.grid;
  op.lambda = lambda;
  op.phi = phi.values;
  const RVec V = model.potential.samples(*phi.grid);
  op.q_minus.resize(V.size());
  op.q_plus.resize(V.size());
  for (Eigen::Index j = 0; j < V.size(); ++j) {
    const double s = phi.values[j] * phi.values[j];
    op.q_minus[j] = lambda + V[j] - model.nonlinearity.f(s);
    op.q_plus[j] = op.q_minus[j] - 2.0 * model.nonlinearity.fprime(s) * s;
  }
  op.dphi = dlambda_phi(model, phi, lambda).values;
  op.ddelta = 2.0 * dot(*phi.grid, op.phi, op.dphi);
  return op;
}

int fgr_order(double epsilon, double lambda) {
  if (!(epsilon > 0.0)) throw NumericalError(ErrorKind::GapEmpty, "epsilon must be positive");
  int N = 1;
  while ((N + 1) * epsilon <= lambda) ++N;
  return N;
}

namespace {

// Fixes scale and sign of xi, builds eta and the diagnostics.
SpectralData finish_mode(const LinearizedOperator& op, RVec xi, double eps2) {
  const Grid& g = *op.grid;
  if (!(eps2 > 0.0)) {
    std::ostringstream os;
    os << "no positive eigenvalue of L-L+ in the odd sector (eps^2 = " << eps2 << ")";
    throw NumericalError(ErrorKind::GapEmpty, os.str());
  }
  const RVec phix = derivative(g, op.phi);
  xi *= std::sqrt(2.0) * norm2(g, phix) / norm2(g, xi);
  if (dot(g, xi, phix) < 0.0) xi = -xi;
  SpectralData s;
  s.lambda = op.lambda;
  s.epsilon = std::sqrt(eps2);
  if (s.epsilon >= op.lambda) {
    std::ostringstream os;
    os << "internal mode eps = " << s.epsilon << " is not below lambda = " << op.lambda;
    throw NumericalError(ErrorKind::EmbeddedMode, os.str());
  }
  s.xi = xi;
  s.eta = op.apply_plus(xi) / s.epsilon;
  s.pairing_xi_eta = dot(g, s.xi, s.eta);
  s.ddelta = op.ddelta;
  s.N = fgr_order(s.epsilon, op.lambda);
  s.residual_plus = norm2(g, RVec(op.apply_plus(s.xi) - s.epsilon * s.eta));
  s.residual_minus = norm2(g, RVec(op.apply_minus(s.eta) - s.epsilon * s.xi));
  return s;
}

}  // namespace

SpectralData discrete_spectrum(const LinearizedOperator& op) {
  const Grid& g = *op.grid;
  if (!(op.model.potential.h > 0.0))
    throw NumericalError(ErrorKind::GapEmpty, "h = 0: the odd mode is the translation zero mode");
  const auto& F = fourier(g.size());
  const RVec k2 = g.wavenumbers().array().square();
  const RVec pre_minus = (k2.array() + op.lambda).inverse();
  auto odd = [&](const RVec& u) { return odd_part(g, u); };
  auto Lminus_inv = [&](const RVec& b) {
    auto A = [&](const RVec& u) { return op.apply_minus(u); };
    auto M = [&](const RVec& u) { return F.apply_multiplier(CVec(u.cast<cplx>()), pre_minus).real().eval(); };
    auto r = pcg(A, b, M, RVec(RVec::Zero(b.size())), 1e-14, 2000);
    return odd(r.x);
  };
  auto product = [&](const RVec& u) { return op.apply_minus(op.apply_plus(u)); };

  RVec xi = odd(derivative(g, op.phi));
  double sigma = 0.0, prev_res = INFINITY, res = INFINITY;
  int it = 0;
  for (; it < 40; ++it) {
    xi /= xi.norm();
    sigma = op.apply_plus(xi).dot(xi) / Lminus_inv(xi).dot(xi);
    res = (product(xi) - sigma * xi).norm();
    if (res < 1e-11 || (it > 3 && res > 0.5 * prev_res && res < 1e-9)) break;
    prev_res = res;
    const RVec pre = ((k2.array() + op.lambda).square() - sigma).inverse();
    auto A = [&](const RVec& v) { return RVec(product(v) - sigma * v); };
    auto M = [&](const RVec& v) { return F.apply_multiplier(CVec(v.cast<cplx>()), pre).real().eval(); };
    auto y = gmres(A, xi, M, RVec(xi), 1e-12, 200, 4000);
    xi = odd(y.x);
  }
  if (!(res < 1e-9)) {
    std::ostringstream os;
    os << "Rayleigh quotient iteration stalled at residual " << res;
    throw NumericalError(ErrorKind::GapEmpty, os.str());
  }
  auto s = finish_mode(op, xi, sigma);
  s.iterations = it;
  return s;
}

SectorSpectrum dense_sector_spectrum(const LinearizedOperator& op, bool even) {
  const ParitySector sec(op.grid, even);
  // the reduced operators are symmetric in the sector quadrature; symmetrize by W^(1/2)
  const RVec w = sec.weights().cwiseSqrt();
  const RVec winv = w.cwiseInverse();
  auto sym = [&](const Eigen::MatrixXd& A) {
    Eigen::MatrixXd S = w.asDiagonal() * A * winv.asDiagonal();
    return Eigen::MatrixXd(0.5 * (S + S.transpose()));
  };
  const Eigen::MatrixXd Sm = sym(sec.schrodinger(op.q_minus));
  const Eigen::MatrixXd Sp = sym(sec.schrodinger(op.q_plus));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(Sm);
  const RVec root = em.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd M = em.eigenvectors() * root.asDiagonal() * em.eigenvectors().transpose();
  const Eigen::MatrixXd T = M * Sp * M;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> et(0.5 * (T + T.transpose()));
  SectorSpectrum out;
  out.even = even;
  out.nu = et.eigenvalues();
  out.vectors = winv.asDiagonal() * M * et.eigenvectors();
  return out;
}

SpectralData dense_discrete_spectrum(const LinearizedOperator& op) {
  const auto sp = dense_sector_spectrum(op, false);
  const ParitySector sec(op.grid, false);
  for (Eigen::Index i = 0; i < sp.nu.size(); ++i) {
    if (sp.nu[i] > 1e-9) return finish_mode(op, sec.extend(RVec(sp.vectors.col(i))), sp.nu[i]);
  }
  throw NumericalError(ErrorKind::GapEmpty, "no positive eigenvalue in the odd sector");
}

ModeCount discrete_mode_count(const LinearizedOperator& op, double zero_tol) {
  ModeCount c;
  c.min_nu = INFINITY;
  const double edge = op.lambda * op.lambda;
  for (bool even : {true, false}) {
    const auto sp = dense_sector_spectrum(op, even);
    c.min_nu = std::min(c.min_nu, sp.nu[0]);
    for (Eigen::Index i = 0; i < sp.nu.size() && sp.nu[i] < edge; ++i) {
      if (std::abs(sp.nu[i]) < zero_tol) {
        ++c.zero_modes;
      } else {
        if (sp.nu[i] > 0.0) ++c.internal_pairs;
        // the zero cluster is a Jordan block whose splitting is sqrt(roundoff); only detached
        // negative nu signal a real eigenvalue pair
        c.max_real_part = std::max(c.max_real_part, std::sqrt(std::max(0.0, -sp.nu[i])));
      }
    }
  }
  // a zero of L-L+ carries the standard and the associated eigenvector
  c.total = 2 * c.zero_modes + 2 * c.internal_pairs;
  return c;
}

RieszProjection::RieszProjection(const LinearizedOperator& op, const SpectralData& spec)
    : grid_(op.grid), phi_(op.phi), dphi_(op.dphi), xi_(spec.xi), eta_(spec.eta),
      ddelta_(op.ddelta), pairing_(spec.pairing_xi_eta), eps_(spec.epsilon) {
  if (!(ddelta_ > 1e-8) || !(pairing_ > 1e-8)) {
    std::ostringstream os;
    os << "delta' = " << ddelta_ << ", <xi,eta> = " << pairing_;
    throw NumericalError(ErrorKind::DegeneratePairing, os.str());
  }
}

std::vector<cplx> RieszProjection::coefficients(const TwoComponentField& w) const {
  require_same_grid(*w.grid, *grid_);
  const Grid& g = *grid_;
  auto integ = [&](const RVec& a, const CVec& b) { return integrate(g, CVec(a.cast<cplx>().cwiseProduct(b))); };
  const cplx i(0.0, 1.0);
  const cplx a = (2.0 / ddelta_) * integ(dphi_, w.second);
  const cplx b = (2.0 / ddelta_) * integ(phi_, w.first);
  const cplx cp = (integ(eta_, w.first) - i * integ(xi_, w.second)) / (2.0 * pairing_);
  const cplx cm = (integ(eta_, w.first) + i * integ(xi_, w.second)) / (2.0 * pairing_);
  return {a, b, cp, cm};
}

std::vector<TwoComponentField> RieszProjection::functionals() const {
  const cplx i(0.0, 1.0);
  const CVec zero = CVec::Zero(phi_.size());
  const double s = 1.0 / (2.0 * pairing_);
  return {TwoComponentField(grid_, zero, (2.0 / ddelta_) * dphi_.cast<cplx>()),
          TwoComponentField(grid_, (2.0 / ddelta_) * phi_.cast<cplx>(), zero),
          TwoComponentField(grid_, s * eta_.cast<cplx>(), -i * s * xi_.cast<cplx>()),
          TwoComponentField(grid_, s * eta_.cast<cplx>(), i * s * xi_.cast<cplx>())};
}

std::vector<TwoComponentField> RieszProjection::basis() const {
  const cplx i(0.0, 1.0);
  const CVec zero = CVec::Zero(phi_.size());
  return {TwoComponentField(grid_, zero, phi_.cast<cplx>()), TwoComponentField(grid_, dphi_.cast<cplx>(), zero),
          TwoComponentField(grid_, xi_.cast<cplx>(), i * eta_.cast<cplx>()),
          TwoComponentField(grid_, xi_.cast<cplx>(), -i * eta_.cast<cplx>())};
}

TwoComponentField RieszProjection::discrete(const TwoComponentField& w) const {
  const auto c = coefficients(w);
  const auto e = basis();
  TwoComponentField out(grid_);
  for (std::size_t k = 0; k < 4; ++k) out += c[k] * e[k];
  return out;
}

TwoComponentField RieszProjection::continuous(const TwoComponentField& w) const { return w - discrete(w); }

namespace {

struct Shot {
  cplx growth;  // coefficient of exp(kappa x) in the growing channel, scaled by exp(-kappa X)
  cplx slope;   // derivative of the linear channel
};

Shot shoot(const RVec& qp_nodes, const RVec& qm_nodes, const RVec& qp_mid, const RVec& qm_mid, double dx,
           double lambda, int sign, Eigen::Vector4cd y) {
  const cplx mu(0.0, sign * lambda);
  auto f = [&](double qp, double qm, const Eigen::Vector4cd& s) {
    Eigen::Vector4cd d;
    d << s[2], s[3], qp * s[0] + mu * s[1], qm * s[1] - mu * s[0];
    return d;
  };
  const Eigen::Index steps = qp_mid.size();
  for (Eigen::Index j = 0; j < steps; ++j) {
    const Eigen::Vector4cd k1 = f(qp_nodes[j], qm_nodes[j], y);
    const Eigen::Vector4cd k2 = f(qp_mid[j], qm_mid[j], y + 0.5 * dx * k1);
    const Eigen::Vector4cd k3 = f(qp_mid[j], qm_mid[j], y + 0.5 * dx * k2);
    const Eigen::Vector4cd k4 = f(qp_nodes[j + 1], qm_nodes[j + 1], y + dx * k3);
    y += dx / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  const double kappa = std::sqrt(2.0 * lambda);
  const double X = dx * static_cast<double>(steps);
  const cplx si(0.0, sign);
  const cplx ug = y[0] + si * y[1], ugp = y[2] + si * y[3];
  const cplx ulp = y[2] - si * y[3];
  return {0.5 * (ug + ugp / kappa) * std::exp(-kappa * X), ulp};
}

double sector_indicator(const RVec& qpn, const RVec& qmn, const RVec& qpm, const RVec& qmm, double dx,
                        double lambda, int sign, bool even) {
  const double kappa = std::sqrt(2.0 * lambda);
  Eigen::Matrix2cd M;
  for (int c = 0; c < 2; ++c) {
    Eigen::Vector4cd y = Eigen::Vector4cd::Zero();
    if (even)
      y[c] = 1.0;
    else
      y[2 + c] = kappa;
    const Shot s = shoot(qpn, qmn, qpm, qmm, dx, lambda, sign, y);
    M(0, c) = 2.0 * s.growth;
    M(1, c) = s.slope / kappa;
  }
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(M);
  const auto sv = svd.singularValues();
  return sv[0] > 0.0 ? sv[1] / sv[0] : 0.0;
}

}  // namespace

ResonanceProbe resonance_indicator(const LinearizedOperator& op, int sign, double threshold, bool free_problem) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("threshold sign must be +1 or -1");
  const Grid& g = *op.grid;
  const double dx = g.dx();
  // the far field starts where the soliton and the well are below roundoff
  const double X = std::min(0.5 * g.half_width(), 40.0);
  const auto steps = static_cast<Eigen::Index>(std::floor(X / dx));
  RVec qpn(steps + 1), qmn(steps + 1), mid(steps);
  for (Eigen::Index j = 0; j <= steps; ++j) {
    const auto idx = static_cast<Eigen::Index>(g.center()) + j;
    qpn[j] = op.q_plus[idx];
    qmn[j] = op.q_minus[idx];
  }
  for (Eigen::Index j = 0; j < steps; ++j) mid[j] = (static_cast<double>(j) + 0.5) * dx;
  RVec qpm = fourier_interpolate(g, op.q_plus, mid);
  RVec qmm = fourier_interpolate(g, op.q_minus, mid);

  auto evaluate = [&](bool free_case) {
    if (!free_case)
      return std::pair{sector_indicator(qpn, qmn, qpm, qmm, dx, op.lambda, sign, true),
                       sector_indicator(qpn, qmn, qpm, qmm, dx, op.lambda, sign, false)};
    const RVec cn = RVec::Constant(steps + 1, op.lambda), cm = RVec::Constant(steps, op.lambda);
    return std::pair{sector_indicator(cn, cn, cm, cm, dx, op.lambda, sign, true),
                     sector_indicator(cn, cn, cm, cm, dx, op.lambda, sign, false)};
  };

  const auto self = evaluate(true);
  if (!(std::min(self.first, self.second) < 1e-10)) {
    std::ostringstream os;
    os << "free threshold problem gives indicator " << std::min(self.first, self.second) << " instead of 0";
    throw NumericalError(ErrorKind::IllConditioned, os.str());
  }
  ResonanceProbe p;
  p.sign = sign;
  p.threshold = threshold;
  p.matching_point = dx * static_cast<double>(steps);
  const auto v = free_problem ? self : evaluate(false);
  p.indicator_even = v.first;
  p.indicator_odd = v.second;
  p.indicator = std::min(v.first, v.second);
  p.resonance = p.indicator < threshold;
  return p;
}

}  // namespace solitonlab
