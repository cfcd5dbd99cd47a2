#include "solitonlab/dynamics.hpp"

#include "solitonlab/errors.hpp"
#include "solitonlab/fft.hpp"
#include "solitonlab/fitting.hpp"

#include <cmath>

namespace solitonlab {

Observables observables(const ModelConfig& model, const ComplexField& psi) {
  const Grid& g = *psi.grid;
  if (g.mode() != GridMode::line1d) throw ConfigError("observables: line1d grid required");
  const auto c = conserved(model, psi);
  if (!(c.mass > 0.0)) throw NumericalError(ErrorKind::ZeroMass, "observables of a zero field");
  const RVec rho = psi.values.cwiseAbs2();
  Observables o;
  o.mass = c.mass;
  o.energy = c.energy;
  o.a = integrate(g, RVec(g.nodes().array() * rho.array())) / c.mass;
  const CVec dpsi = derivative(g, psi.values);
  o.p = integrate(g, CVec(psi.values.conjugate().array() * dpsi.array())).imag() / c.mass;
  return o;
}

double sup_norm(const TwoComponentField& w) {
  return std::sqrt((w.first.cwiseAbs2() + w.second.cwiseAbs2()).maxCoeff());
}

double EvolutionResult::max_relative_mass_drift() const {
  double d = 0.0;
  for (const auto& r : series) d = std::max(d, std::abs(r.mass - series.front().mass) / std::abs(series.front().mass));
  return d;
}

double EvolutionResult::max_relative_energy_drift() const {
  double d = 0.0;
  for (const auto& r : series)
    d = std::max(d, std::abs(r.energy - series.front().energy) / std::abs(series.front().energy));
  return d;
}

namespace {

long long stride_of(double every, double dt) {
  if (every <= 0.0) return 0;
  return std::max(1LL, std::llround(every / dt));
}

void check_time_step(double T, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) throw ConfigError("T must be non-negative");
}

}  // namespace

EvolutionResult evolve_nls(const ModelConfig& model, const ComplexField& psi0, const EvolveOptions& opt) {
  const GridPtr grid = psi0.grid;
  const Grid& g = *grid;
  if (g.mode() != GridMode::line1d) throw ConfigError("evolve_nls: line1d grid required");
  check_time_step(opt.T, opt.dt);
  if (!psi0.finite()) throw NumericalError(ErrorKind::NonFiniteState, "initial state");

  const double dt = opt.dt;
  const long long steps = std::llround(opt.T / dt);
  const long long rec = stride_of(opt.record_every, dt);
  const long long snap = stride_of(opt.snapshot_every, dt);
  const Fourier& fft = fourier(g.size());
  const cplx I(0.0, 1.0);

  const CVec half = (-I * g.wavenumbers().array().square().cast<cplx>() * (0.5 * dt)).exp().matrix();
  const RVec V = model.potential.samples(g);
  const RVec W = opt.layer.profile(g);
  const RVec damp = (-W.array() * dt).exp().matrix();
  const bool layer_on = W.size() > 0 && W.cwiseAbs().maxCoeff() > 0.0;

  EvolutionResult res;
  res.dt = dt;
  res.scheme = "strang";
  res.layer = opt.layer;
  res.layer.enabled = layer_on;

  CVec psi = psi0.values;
  const double sup0 = sup_norm(psi);

  auto record = [&](long long k) {
    const double t = static_cast<double>(k) * dt;
    const ComplexField u(grid, psi);
    if (!u.finite()) throw NumericalError(ErrorKind::NonFiniteState, "at t = " + std::to_string(t));
    const double sup = sup_norm(psi);
    if (sup > 1e3 * sup0) throw NumericalError(ErrorKind::BlowupDetected, "at t = " + std::to_string(t));
    if (rec && k % rec == 0) {
      const auto o = observables(model, u);
      res.series.push_back({t, o.mass, o.energy, o.a, o.p, sup});
    }
    if (snap && k % snap == 0) {
      if (opt.store_snapshots) {
        res.snapshot_times.push_back(t);
        res.snapshots.push_back(u);
      }
      if (opt.on_snapshot) opt.on_snapshot(t, u);
    }
  };

  record(0);
  CVec hat = fft.forward(psi);
  for (long long k = 1; k <= steps; ++k) {
    hat.array() *= half.array();
    fft.backward(hat.data(), psi.data());
    for (Eigen::Index j = 0; j < psi.size(); ++j) {
      const double theta = dt * (V[j] - model.nonlinearity.f(std::norm(psi[j])));
      psi[j] *= std::polar(layer_on ? damp[j] : 1.0, -theta);
    }
    fft.forward(psi.data(), hat.data());
    hat.array() *= half.array();
    if ((rec && k % rec == 0) || (snap && k % snap == 0) || k == steps) {
      fft.backward(hat.data(), psi.data());
      record(k);
    }
  }
  if (steps == 0) psi = psi0.values;
  res.final_state = ComplexField(grid, psi);
  return res;
}

LinearEvolutionResult evolve_linearized(const LinearizedOperator& op, const TwoComponentField& w0,
                                        const LinearEvolveOptions& opt) {
  const GridPtr grid = op.grid;
  const Grid& g = *grid;
  if (g.mode() != GridMode::line1d) throw ConfigError("evolve_linearized: line1d grid required");
  require_same_grid(g, *w0.grid);
  check_time_step(opt.T, opt.dt);
  if (!w0.finite()) throw NumericalError(ErrorKind::NonFiniteState, "initial state");

  const double dt = opt.dt;
  const long long steps = std::llround(opt.T / dt);
  const long long rec = stride_of(opt.record_every, dt);
  const long long snap = stride_of(opt.snapshot_every, dt);
  const Fourier& fft = fourier(g.size());

  const RVec omega = (g.wavenumbers().array().square() + op.lambda).matrix();
  const RVec c_half = (omega * (0.5 * dt)).array().cos().matrix();
  const RVec s_half = (omega * (0.5 * dt)).array().sin().matrix();
  const RVec Vm = (op.q_minus.array() - op.lambda).matrix();
  const RVec Vp = (op.q_plus.array() - op.lambda).matrix();
  const RVec W = opt.layer.profile(g);

  // rotation of every Fourier mode by omega dt / 2
  auto rotate = [&](const CVec& a, const CVec& b, CVec& oa, CVec& ob) {
    CVec ha = fft.forward(a), hb = fft.forward(b);
    const CVec ra = c_half.cast<cplx>().cwiseProduct(ha) + s_half.cast<cplx>().cwiseProduct(hb);
    const CVec rb = c_half.cast<cplx>().cwiseProduct(hb) - s_half.cast<cplx>().cwiseProduct(ha);
    oa = fft.backward(ra);
    ob = fft.backward(rb);
  };
  auto nonlinear = [&](const CVec& a, const CVec& b, CVec& oa, CVec& ob) {
    oa = Vm.cast<cplx>().cwiseProduct(b) - W.cast<cplx>().cwiseProduct(a);
    ob = -Vp.cast<cplx>().cwiseProduct(a) - W.cast<cplx>().cwiseProduct(b);
  };

  // Strang potential substep: exp(dt [[-W, Vm], [-Vp, -W]]) pointwise
  RVec pc, pa, pb;
  if (opt.scheme == LinearScheme::strang) {
    pc.resize(W.size());
    pa.resize(W.size());
    pb.resize(W.size());
    for (Eigen::Index j = 0; j < W.size(); ++j) {
      const cplx s = std::sqrt(cplx(Vm[j] * Vp[j], 0.0));
      const double damp = std::exp(-W[j] * dt);
      const cplx sinc = std::abs(s) * dt < 1e-8 ? cplx(dt, 0.0) : std::sin(s * dt) / s;
      pc[j] = damp * std::cos(s * dt).real();
      pa[j] = damp * (sinc * Vm[j]).real();
      pb[j] = -damp * (sinc * Vp[j]).real();
    }
  }

  LinearEvolutionResult res;
  res.dt = dt;
  res.scheme = opt.scheme == LinearScheme::strang ? "strang" : "if-rk4";
  res.layer = opt.layer;

  CVec a = w0.first, b = w0.second;
  const double sup0 = sup_norm(w0);

  auto record = [&](long long k) {
    const double t = static_cast<double>(k) * dt;
    const TwoComponentField w(grid, a, b);
    if (!w.finite()) throw NumericalError(ErrorKind::NonFiniteState, "at t = " + std::to_string(t));
    const double sup = sup_norm(w);
    if (sup > 1e3 * sup0) throw NumericalError(ErrorKind::BlowupDetected, "at t = " + std::to_string(t));
    if (rec && k % rec == 0) res.series.push_back({t, norm2(w), weighted_norm(w, opt.nu), sup});
    if (snap && k % snap == 0) {
      res.snapshot_times.push_back(t);
      res.snapshots.push_back(w);
      if (opt.on_snapshot) opt.on_snapshot(t, w);
    }
  };

  record(0);
  CVec ea, eb, k1a, k1b, ek1a, ek1b, k2a, k2b, k3a, k3b, k4a, k4b, ta, tb, ua, ub;
  for (long long k = 1; k <= steps; ++k) {
    if (opt.scheme == LinearScheme::strang) {
      rotate(a, b, ta, tb);
      ua = pc.cast<cplx>().cwiseProduct(ta) + pa.cast<cplx>().cwiseProduct(tb);
      ub = pb.cast<cplx>().cwiseProduct(ta) + pc.cast<cplx>().cwiseProduct(tb);
      rotate(ua, ub, a, b);
    } else {
      // Lawson RK4 with E = exp(L0 dt / 2)
      rotate(a, b, ea, eb);
      nonlinear(a, b, k1a, k1b);
      rotate(k1a, k1b, ek1a, ek1b);
      nonlinear(ea + 0.5 * dt * ek1a, eb + 0.5 * dt * ek1b, k2a, k2b);
      nonlinear(ea + 0.5 * dt * k2a, eb + 0.5 * dt * k2b, k3a, k3b);
      rotate(ea + dt * k3a, eb + dt * k3b, ta, tb);
      nonlinear(ta, tb, k4a, k4b);
      rotate(ea + (dt / 6.0) * (ek1a + 2.0 * k2a + 2.0 * k3a), eb + (dt / 6.0) * (ek1b + 2.0 * k2b + 2.0 * k3b), ua,
             ub);
      a = ua + (dt / 6.0) * k4a;
      b = ub + (dt / 6.0) * k4b;
    }
    if ((rec && k % rec == 0) || (snap && k % snap == 0) || k == steps) record(k);
  }
  res.final_state = TwoComponentField(grid, a, b);
  return res;
}

DecayFit decay_exponent(const std::vector<double>& t, const std::vector<double>& y, double t1, double t2) {
  if (t.size() != y.size()) throw std::invalid_argument("decay_exponent: size mismatch");
  if (!(t1 > 0.0) || !(t2 > t1)) throw ConfigError("decay window must satisfy 0 < t1 < t2");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t1 || t[i] > t2) continue;
    if (!(y[i] > 0.0) || !std::isfinite(y[i]))
      throw std::invalid_argument("decay_exponent: series must be positive in the window");
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(y[i]));
  }
  if (lx.size() < 20)
    throw NumericalError(ErrorKind::WindowTooShort, std::to_string(lx.size()) + " samples in [" + std::to_string(t1) +
                                                        ", " + std::to_string(t2) + "]");
  const auto f = linear_fit(lx, ly);
  DecayFit d;
  d.t1 = t1;
  d.t2 = t2;
  d.exponent = f.slope;
  d.stderr_exponent = f.slope_stderr;
  d.r2 = f.r2;
  d.samples = f.samples;
  return d;
}

}  // namespace solitonlab
