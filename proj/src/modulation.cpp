#include "solitonlab/modulation.hpp"

#include "solitonlab/errors.hpp"
#include "solitonlab/ground_state.hpp"

#include <cmath>
#include <limits>

namespace solitonlab {

namespace {

constexpr double kFdStep = 2.5e-4;

struct ModeAt {
  RVec phi, dphi, xi, eta;
  double epsilon = 0.0;
};

ModeAt mode_at(const ModelConfig& model, const GridPtr& grid, double lambda, const RealField* seed) {
  ModelConfig m = model;
  m.lambda = lambda;
  const auto sol = solve_soliton(m, grid, lambda, seed);
  const auto op = linearize(m, sol.phi, lambda);
  const auto sp = discrete_spectrum(op);
  return {op.phi, op.dphi, sp.xi, sp.eta, sp.epsilon};
}

// cubic Hermite weights for value and derivative on [0, 1] scaled by the node spacing
struct Hermite {
  double h00, h10, h01, h11;
  double d00, d10, d01, d11;
};

Hermite hermite(double s, double step) {
  Hermite h;
  const double s2 = s * s, s3 = s2 * s;
  h.h00 = 2 * s3 - 3 * s2 + 1;
  h.h10 = (s3 - 2 * s2 + s) * step;
  h.h01 = -2 * s3 + 3 * s2;
  h.h11 = (s3 - s2) * step;
  h.d00 = (6 * s2 - 6 * s) / step;
  h.d10 = 3 * s2 - 4 * s + 1;
  h.d01 = (-6 * s2 + 6 * s) / step;
  h.d11 = 3 * s2 - 2 * s;
  return h;
}

}  // namespace

ModulationBasis::ModulationBasis(const ModelConfig& model, const GridPtr& grid, double lambda0, double spacing,
                                 double half_range)
    : model_(model), grid_(grid), lambda0_(lambda0), spacing_(spacing), half_range_(half_range) {
  if (grid->mode() != GridMode::line1d) throw ConfigError("modulation: line1d grid required");
  if (!(spacing > kFdStep * 2) || !(half_range > spacing)) throw ConfigError("modulation basis spacing");
}

const ModulationBasis::Node& ModulationBasis::node(int k) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto& slot = nodes_[k];
  if (slot) return *slot;
  const double lam = lambda0_ + spacing_ * k;
  const ModeAt c = mode_at(model_, grid_, lam, nullptr);
  const RealField seed(grid_, c.phi);
  const ModeAt p = mode_at(model_, grid_, lam + kFdStep, &seed);
  const ModeAt m = mode_at(model_, grid_, lam - kFdStep, &seed);
  auto node = std::make_unique<Node>();
  BasisSample& s = node->s;
  s.lambda = lam;
  s.phi = c.phi;
  s.dphi = c.dphi;
  s.xi = c.xi;
  s.eta = c.eta;
  s.epsilon = c.epsilon;
  s.phi_l = c.dphi;
  s.dphi_l = (p.dphi - m.dphi) / (2 * kFdStep);
  s.xi_l = (p.xi - m.xi) / (2 * kFdStep);
  s.eta_l = (p.eta - m.eta) / (2 * kFdStep);
  s.epsilon_l = (p.epsilon - m.epsilon) / (2 * kFdStep);
  s.ddelta = 2.0 * dot(*grid_, s.phi, s.dphi);
  slot = std::move(node);
  return *slot;
}

BasisSample ModulationBasis::at(double lambda) const {
  if (!std::isfinite(lambda) || std::abs(lambda - lambda0_) > half_range_)
    throw NumericalError(ErrorKind::BranchExhausted, "lambda = " + std::to_string(lambda) + " outside [" +
                                                         std::to_string(lambda_min()) + ", " +
                                                         std::to_string(lambda_max()) + "]");
  const double u = (lambda - lambda0_) / spacing_;
  const int k = static_cast<int>(std::floor(u));
  const double s = u - k;
  const auto& a = node(k).s;
  if (s == 0.0) return a;
  const auto& b = node(k + 1).s;
  const Hermite h = hermite(s, spacing_);
  BasisSample out;
  out.lambda = lambda;
  auto val = [&](const RVec& y0, const RVec& m0, const RVec& y1, const RVec& m1) -> RVec {
    return h.h00 * y0 + h.h10 * m0 + h.h01 * y1 + h.h11 * m1;
  };
  auto der = [&](const RVec& y0, const RVec& m0, const RVec& y1, const RVec& m1) -> RVec {
    return h.d00 * y0 + h.d10 * m0 + h.d01 * y1 + h.d11 * m1;
  };
  out.phi = val(a.phi, a.phi_l, b.phi, b.phi_l);
  out.phi_l = der(a.phi, a.phi_l, b.phi, b.phi_l);
  out.dphi = val(a.dphi, a.dphi_l, b.dphi, b.dphi_l);
  out.dphi_l = der(a.dphi, a.dphi_l, b.dphi, b.dphi_l);
  out.xi = val(a.xi, a.xi_l, b.xi, b.xi_l);
  out.xi_l = der(a.xi, a.xi_l, b.xi, b.xi_l);
  out.eta = val(a.eta, a.eta_l, b.eta, b.eta_l);
  out.eta_l = der(a.eta, a.eta_l, b.eta, b.eta_l);
  out.epsilon = h.h00 * a.epsilon + h.h10 * a.epsilon_l + h.h01 * b.epsilon + h.h11 * b.epsilon_l;
  out.epsilon_l = h.d00 * a.epsilon + h.d10 * a.epsilon_l + h.d01 * b.epsilon + h.d11 * b.epsilon_l;
  out.ddelta = 2.0 * dot(*grid_, out.phi, out.dphi);
  return out;
}

ComplexField perturbed_soliton(const ModulationBasis& basis, double lambda, cplx z) {
  const auto s = basis.at(lambda);
  const double z1 = z.real(), z2 = -z.imag();
  CVec v(s.phi.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = cplx(s.phi[j] + z1 * s.xi[j], z2 * s.eta[j]);
  return {basis.grid(), v};
}

ModulationPoint decompose(const ComplexField& psi, const ModulationBasis& basis, const ModulationGuess& guess,
                          const DecomposeOptions& opt) {
  const Grid& g = *basis.grid();
  require_same_grid(g, *psi.grid);
  if (!psi.finite()) throw NumericalError(ErrorKind::NonFiniteState, "decompose input");
  const double scale = norm2(g, psi.values);
  if (!(scale > 0.0)) throw NumericalError(ErrorKind::ZeroMass, "decompose of a zero field");

  Eigen::Vector4d u(guess.theta, guess.lambda, guess.z.real(), -guess.z.imag());
  Eigen::Vector4d G;
  BasisSample s;
  RVec R1, R2;
  int it = 0;
  for (;; ++it) {
    s = basis.at(u[1]);
    const CVec Psi = std::polar(1.0, -u[0]) * psi.values;
    const RVec P1 = Psi.real(), P2 = Psi.imag();
    R1 = P1 - s.phi - u[2] * s.xi;
    R2 = P2 - u[3] * s.eta;
    G << dot(g, R1, s.phi), dot(g, R2, s.dphi), dot(g, R1, s.eta), dot(g, R2, s.xi);
    G /= scale;
    if (!G.allFinite()) throw NumericalError(ErrorKind::NewtonDiverged, "non-finite conditions");
    if (G.cwiseAbs().maxCoeff() <= opt.tol) break;
    if (it >= opt.max_iterations) break;
    const RVec dR1 = -s.phi_l - u[2] * s.xi_l;
    const RVec dR2 = -u[3] * s.eta_l;
    Eigen::Matrix4d J;
    J << dot(g, P2, s.phi), dot(g, dR1, s.phi) + dot(g, R1, s.phi_l), -dot(g, s.xi, s.phi), 0.0,
        -dot(g, P1, s.dphi), dot(g, dR2, s.dphi) + dot(g, R2, s.dphi_l), 0.0, -dot(g, s.eta, s.dphi),
        dot(g, P2, s.eta), dot(g, dR1, s.eta) + dot(g, R1, s.eta_l), -dot(g, s.xi, s.eta), 0.0,
        -dot(g, P1, s.xi), dot(g, dR2, s.xi) + dot(g, R2, s.xi_l), 0.0, -dot(g, s.eta, s.xi);
    J /= scale;
    const Eigen::Vector4d step = J.partialPivLu().solve(-G);
    if (!step.allFinite()) throw NumericalError(ErrorKind::NewtonDiverged, "singular Jacobian");
    u += step;
    // below roundoff the conditions cannot improve further
    if (step.cwiseAbs().maxCoeff() < 1e-15 && G.cwiseAbs().maxCoeff() <= opt.accept) break;
  }
  if (!(G.cwiseAbs().maxCoeff() <= opt.accept))
    throw NumericalError(ErrorKind::NewtonDiverged, "conditions " + std::to_string(G.cwiseAbs().maxCoeff()) +
                                                        " after " + std::to_string(it) + " iterations");
  ModulationPoint p;
  p.theta = u[0];
  p.lambda = u[1];
  p.z = cplx(u[2], -u[3]);
  p.iterations = it;
  for (int i = 0; i < 4; ++i) p.residuals[i] = std::abs(G[i]);
  CVec R(R1.size());
  for (Eigen::Index j = 0; j < R.size(); ++j) R[j] = cplx(R1[j], R2[j]);
  const ComplexField Rf(basis.grid(), R);
  p.R_w2norm = weighted_norm(Rf, opt.nu);
  p.R_inf = sup_norm(R);
  if (opt.keep_R) p.R = Rf;
  return p;
}

ComplexField reconstruct(const ModulationPoint& p, const ModulationBasis& basis) {
  if (!p.R.grid) throw std::invalid_argument("reconstruct needs the stored remainder");
  const auto base = perturbed_soliton(basis, p.lambda, p.z);
  return {basis.grid(), std::polar(1.0, p.theta) * (base.values + p.R.values)};
}

std::vector<double> ModulationSeries::times() const {
  std::vector<double> t;
  for (const auto& p : points) t.push_back(p.t);
  return t;
}

CVec ModulationSeries::z() const {
  CVec z(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) z[static_cast<Eigen::Index>(i)] = points[i].z;
  return z;
}

std::vector<double> ModulationSeries::lambda() const {
  std::vector<double> l;
  for (const auto& p : points) l.push_back(p.lambda);
  return l;
}

Tracker::Tracker(const ModulationBasis& basis, const ModulationGuess& initial, const DecomposeOptions& opt)
    : basis_(basis), guess_(initial), opt_(opt) {}

bool Tracker::push(double t, const ComplexField& psi) {
  if (series_.truncated) return false;
  ModulationGuess g = guess_;
  if (!series_.points.empty()) {
    const auto& last = series_.points.back();
    const double dt = t - last.t;
    const double eps = basis_.at(last.lambda).epsilon;
    g.theta = last.theta + last.lambda * dt;
    g.lambda = last.lambda;
    g.z = last.z * std::polar(1.0, eps * dt);
  }
  try {
    auto p = decompose(psi, basis_, g, opt_);
    p.t = t;
    series_.points.push_back(std::move(p));
    return true;
  } catch (const NumericalError& e) {
    series_.truncated = true;
    series_.failure_time = t;
    series_.failure = e.what();
    return false;
  }
}

ModulationSeries track(const EvolutionResult& evolution, const ModulationBasis& basis, const ModulationGuess& initial,
                       const DecomposeOptions& opt) {
  if (evolution.snapshots.empty()) throw std::invalid_argument("track: no snapshots");
  Tracker tr(basis, initial, opt);
  for (std::size_t i = 0; i < evolution.snapshots.size(); ++i)
    if (!tr.push(evolution.snapshot_times[i], evolution.snapshots[i])) break;
  return tr.take();
}

double ZOdeCoefficients::max_quadratic() const {
  return std::max({std::abs(q20), std::abs(q11), std::abs(q02)});
}

ZOdeCoefficients fit_z_ode(const std::vector<CVec>& z, const std::vector<std::vector<double>>& t,
                           const FitWindow& window) {
  if (z.size() != t.size() || z.empty()) throw std::invalid_argument("fit_z_ode: series mismatch");
  std::vector<cplx> zs, dz;
  double zmin = std::numeric_limits<double>::infinity(), zmax = 0.0;
  for (std::size_t s = 0; s < z.size(); ++s) {
    const CVec d = centered_derivative(t[s], z[s]);
    for (Eigen::Index i = 2; i + 2 < z[s].size(); ++i) {
      const double ti = t[s][static_cast<std::size_t>(i)];
      if (ti < window.t1 || ti > window.t2) continue;
      zs.push_back(z[s][i]);
      dz.push_back(d[i]);
      zmin = std::min(zmin, std::abs(z[s][i]));
      zmax = std::max(zmax, std::abs(z[s][i]));
    }
  }
  if (zs.size() < 200) throw ConfigError("fit_z_ode needs >= 200 points, got " + std::to_string(zs.size()));
  if (!(zmin > 0.0) || zmax / zmin > 10.0)
    throw ConfigError("fit_z_ode: |z| spans more than one decade");
  const auto m = static_cast<Eigen::Index>(zs.size());
  Eigen::MatrixXcd A(m, 5);
  CVec b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const cplx v = zs[static_cast<std::size_t>(i)];
    const double a2 = std::norm(v);
    A(i, 0) = v;
    A(i, 1) = v * v;
    A(i, 2) = a2;
    A(i, 3) = std::conj(v) * std::conj(v);
    A(i, 4) = a2 * v;
    b[i] = dz[static_cast<std::size_t>(i)];
  }
  const auto r = complex_least_squares(A, b);
  if (!(r.condition < 1e12))
    throw NumericalError(ErrorKind::IllConditionedRegression, "condition " + std::to_string(r.condition));
  ZOdeCoefficients c;
  c.linear = r.coeffs[0];
  c.q20 = r.coeffs[1];
  c.q11 = r.coeffs[2];
  c.q02 = r.coeffs[3];
  c.cubic = r.coeffs[4];
  c.standard_error = r.standard_error;
  c.residual_rms = r.residual_rms;
  c.derivative_rms = r.rhs_rms;
  c.condition = r.condition;
  c.samples = zs.size();
  return c;
}

ZOdeCoefficients fit_z_ode(const std::vector<const ModulationSeries*>& series, const FitWindow& window) {
  std::vector<CVec> z;
  std::vector<std::vector<double>> t;
  for (const auto* s : series) {
    z.push_back(s->z());
    t.push_back(s->times());
  }
  return fit_z_ode(z, t, window);
}

cplx apply_normal_form(const NormalFormModel& nf, cplx z) {
  return z + nf.b20 * z * z + nf.b11 * std::norm(z) + nf.b02 * std::conj(z) * std::conj(z);
}

NormalFormModel normal_form_quadratic(const std::vector<CVec>& z, const std::vector<std::vector<double>>& t,
                                      const ZOdeCoefficients& coeffs, const FitWindow& window) {
  NormalFormModel nf;
  nf.epsilon = coeffs.epsilon_fit();
  const cplx I(0.0, 1.0);
  auto coef = [&](cplx q, int m, int n) {
    const double den = static_cast<double>(m - n - 1) * nf.epsilon;
    if (std::abs(den) < 1e-6) throw NumericalError(ErrorKind::SmallDenominator, "|(m-n-1) eps| < 1e-6");
    return -q / (I * den);
  };
  nf.b20 = coef(coeffs.q20, 2, 0);
  nf.b11 = coef(coeffs.q11, 1, 1);
  nf.b02 = coef(coeffs.q02, 0, 2);
  nf.z_fit = coeffs;
  for (const auto& zs : z) {
    CVec b(zs.size());
    for (Eigen::Index i = 0; i < zs.size(); ++i) {
      b[i] = apply_normal_form(nf, zs[i]);
      if (zs[i] != cplx(0.0)) nf.near_identity = std::max(nf.near_identity, std::abs(b[i] - zs[i]) / std::norm(zs[i]));
    }
    nf.beta.push_back(b);
  }
  nf.beta_fit = fit_z_ode(nf.beta, t, window);
  nf.quadratic_reduction = coeffs.max_quadratic() / nf.beta_fit.max_quadratic();
  for (cplx b : {nf.b20, nf.b11, nf.b02})
    if (std::abs(b) > 0.0) nf.imag_ratio = std::max(nf.imag_ratio, std::abs(b.imag()) / std::abs(b));
  return nf;
}

RiccatiFit riccati_fit(const std::vector<double>& t, const CVec& beta, const FitWindow& window) {
  if (static_cast<Eigen::Index>(t.size()) != beta.size()) throw std::invalid_argument("riccati_fit: size mismatch");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window.t1 || t[i] > window.t2) continue;
    x.push_back(t[i]);
    y.push_back(1.0 / std::norm(beta[static_cast<Eigen::Index>(i)]));
  }
  if (x.size() < 20) throw NumericalError(ErrorKind::WindowTooShort, "riccati window");
  const auto f = linear_fit(x, y);
  if (!(f.slope > 0.0)) throw NumericalError(ErrorKind::NotDecaying, "|beta|^-2 slope " + std::to_string(f.slope));
  RiccatiFit r;
  r.slope = f.slope;
  r.slope_stderr = f.slope_stderr;
  r.ReY1 = -0.5 * f.slope;
  r.beta0 = f.intercept > 0.0 ? 1.0 / std::sqrt(f.intercept) : 0.0;
  r.r2 = f.r2;
  r.samples = f.samples;
  return r;
}

LambdaLimit lambda_limit(const ModulationSeries& series, const ModulationBasis& basis, double t1, double margin) {
  if (series.points.size() < 2) throw std::invalid_argument("lambda_limit: series too short");
  LambdaLimit out;
  const double t_end = series.points.back().t;
  out.lambda_inf = series.points.back().lambda;
  const auto s = basis.at(out.lambda_inf);
  out.ddelta = s.ddelta;
  out.on_stable_branch = out.ddelta > 0.0;
  std::vector<double> t, d;
  double worst = 0.0;
  double early = 0.0, late = 0.0;
  int ne = 0, nl = 0;
  for (const auto& p : series.points) {
    const double e = std::abs(p.lambda - out.lambda_inf);
    worst = std::max(worst, e);
    if (p.t >= 0.5 * t_end && p.t < 0.75 * t_end) {
      early += e;
      ++ne;
    } else if (p.t >= 0.75 * t_end) {
      late += e;
      ++nl;
    }
    if (p.t >= t1 && p.t <= t_end - margin) {
      t.push_back(p.t);
      d.push_back(e);
    }
  }
  out.early_mean = ne ? early / ne : 0.0;
  out.late_mean = nl ? late / nl : 0.0;
  if (worst < 1e-12) {
    out.constant = true;
    out.decreasing = true;
    return out;
  }
  out.decreasing = out.late_mean < out.early_mean;
  if (!out.decreasing)
    throw NumericalError(ErrorKind::NonConvergent, "|lambda - lambda_inf| not decreasing over the last half");
  // exact zeros (the end point itself) carry no information on the rate
  std::vector<double> tt, dd;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (d[i] > 0.0) {
      tt.push_back(t[i]);
      dd.push_back(d[i]);
    }
  out.tail = decay_exponent(tt, dd, t1, t_end - margin);
  return out;
}

NewtonLawReport newton_law_check(const std::vector<SeriesRow>& series, double epsilon, const FitWindow& window,
                                 double t_early, double t_late) {
  std::vector<double> t, a, p, all_t, all_a;
  for (const auto& r : series) {
    all_t.push_back(r.t);
    all_a.push_back(r.a);
    if (r.t < window.t1 || r.t > window.t2) continue;
    t.push_back(r.t);
    a.push_back(r.a);
    p.push_back(r.p);
  }
  NewtonLawReport rep;
  rep.epsilon = epsilon;
  rep.t_early = t_early;
  rep.t_late = t_late;
  rep.fit = fit_damped_sinusoid(t, a);
  rep.relative_frequency_error = std::abs(rep.fit.omega - epsilon) / epsilon;
  const auto da = centered_derivative(t, a);
  double worst = 0.0, pmax = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    pmax = std::max(pmax, std::abs(p[i]));
    if (std::isfinite(da[i])) worst = std::max(worst, std::abs(0.5 * da[i] - p[i]));
  }
  rep.adot_mismatch = pmax > 0.0 ? worst / pmax : std::numeric_limits<double>::infinity();
  // half the peak-to-peak excursion over one period centred at t
  const double period = 2.0 * std::acos(-1.0) / rep.fit.omega;
  auto amplitude = [&](double tc) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < all_t.size(); ++i)
      if (std::abs(all_t[i] - tc) <= 0.5 * period) {
        lo = std::min(lo, all_a[i]);
        hi = std::max(hi, all_a[i]);
      }
    return hi >= lo ? 0.5 * (hi - lo) : 0.0;
  };
  rep.amplitude_early = amplitude(t_early);
  rep.amplitude_late = amplitude(t_late);
  return rep;
}

LambdaDotRegression lambda_dot_regression(const ModulationSeries& series, const FitWindow& window) {
  const auto t = series.times();
  const auto lam = series.lambda();
  const auto dl = centered_derivative(t, lam);
  std::vector<Eigen::Vector3d> rows;
  std::vector<double> rhs;
  for (std::size_t i = 2; i + 2 < t.size(); ++i) {
    if (t[i] < window.t1 || t[i] > window.t2) continue;
    const cplx z = series.points[i].z;
    const cplx z2 = z * z;
    rows.emplace_back(z2.real(), z2.imag(), std::norm(z));
    rhs.push_back(dl[i]);
  }
  if (rows.size() < 20) throw NumericalError(ErrorKind::WindowTooShort, "lambda regression window");
  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd A(m, 3);
  RVec b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    A.row(i) = rows[static_cast<std::size_t>(i)].transpose();
    b[i] = rhs[static_cast<std::size_t>(i)];
  }
  LambdaDotRegression out;
  out.samples = rows.size();
  out.coeffs = A.colPivHouseholderQr().solve(b);
  const RVec r = b - A * out.coeffs;
  const double s2 = r.squaredNorm() / static_cast<double>(m - 3);
  const Eigen::Matrix3d cov = (A.transpose() * A).inverse() * s2;
  for (int k = 0; k < 3; ++k) out.standard_error[k] = std::sqrt(std::abs(cov(k, k)));
  out.diagonal_t = out.standard_error[2] > 0.0 ? std::abs(out.coeffs[2]) / out.standard_error[2] : 0.0;
  const double off = std::hypot(out.coeffs[0], out.coeffs[1]);
  out.diagonal_ratio = off > 0.0 ? std::abs(out.coeffs[2]) / off : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace solitonlab
