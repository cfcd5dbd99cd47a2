#include "solitonlab/harness.hpp"

#include "solitonlab/acceptance.hpp"
#include "solitonlab/dynamics.hpp"
#include "solitonlab/errors.hpp"
#include "solitonlab/ground_state.hpp"
#include "solitonlab/io.hpp"
#include "solitonlab/linearization.hpp"
#include "solitonlab/modulation.hpp"
#include "solitonlab/parallel.hpp"
#include "solitonlab/resolvent.hpp"

#include <Eigen/Core>
#include <fftw3.h>

#include <chrono>
#include <cmath>
#include <map>
#include <random>

namespace solitonlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string without_kind(const std::string& what) {
  const auto pos = what.find(": ");
  return pos == std::string::npos ? what : what.substr(pos + 2);
}

json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json decay_json(const DecayFit& d) {
  return {{"t1", d.t1}, {"t2", d.t2}, {"exponent", d.exponent}, {"stderr", d.stderr_exponent}, {"r2", d.r2},
          {"samples", d.samples}};
}

json error_json(const std::exception& e) { return {{"error", e.what()}}; }

// Runs fn and stores its result under key, or the numerical failure that stopped it.
template <class F>
void diagnostic(json& out, const std::string& key, F&& fn) {
  try {
    out[key] = fn();
  } catch (const NumericalError& e) {
    out[key] = error_json(e);
  } catch (const ConfigError& e) {
    out[key] = error_json(e);
  }
}

void write_json(const fs::path& dir, const std::string& name, const json& j, StageResult& r) {
  atomic_write(dir / name, dump_json(j));
  r.files.push_back(name);
}

void write_table(const fs::path& dir, const std::string& name, const CsvTable& t, StageResult& r) {
  write_csv(dir / name, t);
  r.files.push_back(name);
}

CsvTable timeseries_table(const std::vector<SeriesRow>& rows) {
  CsvTable t;
  t.columns = {"t", "mass", "energy", "a", "p", "sup_norm"};
  for (const auto& r : rows) t.rows.push_back({r.t, r.mass, r.energy, r.a, r.p, r.sup_norm});
  return t;
}

json versions() {
  return {{"solitonlab", "1.0.0"},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"fftw", std::string(fftw_version)},
          {"compiler", __VERSION__}};
}

void update_manifest(const fs::path& dir, const StageResult& r, const ExperimentConfig& c) {
  const fs::path path = dir / "manifest.json";
  json m = json::object();
  if (fs::exists(path)) {
    try {
      m = read_json(path);
    } catch (const std::exception&) {
      m = json::object();
    }
  }
  m["tool"] = "solitonlab";
  m["versions"] = versions();
  json files = json::object();
  for (const auto& f : r.files) files[f] = file_checksum(dir / f);
  m["stages"][r.stage] = {{"config", to_config_text(c)},
                          {"config_checksum", checksum_text(to_config_text(c))},
                          {"wall_clock_seconds", r.wall_clock},
                          {"timings", r.timings},
                          {"workers", worker_count()},
                          {"files", files}};
  // criteria read timings from the manifest itself
  atomic_write(path, dump_json(m));
  json table = json::array();
  for (const auto& cr : evaluate_available(dir))
    table.push_back({{"id", cr.id}, {"name", cr.name}, {"passed", cr.passed}, {"detail", cr.detail}});
  m["acceptance"] = table;
  atomic_write(path, dump_json(m));
}

ComplexField initial_perturbation(const ExperimentConfig& c, const ModulationBasis& basis, cplx z) {
  ComplexField psi = perturbed_soliton(basis, c.model.lambda, z);
  if (c.initial.r0_amplitude == 0.0) return psi;
  const GridPtr& g = basis.grid();
  const auto op = linearize(c.model, g, c.model.lambda);
  const RieszProjection P(op, discrete_spectrum(op));
  CVec bump(g->size());
  for (Eigen::Index j = 0; j < bump.size(); ++j) {
    const double x = g->nodes()[j] / c.initial.r0_width;
    bump[j] = c.initial.r0_amplitude * std::exp(-x * x);
  }
  const auto w = P.continuous(TwoComponentField(g, bump, CVec::Zero(g->size())));
  const CVec R = w.first.real().cast<cplx>() + cplx(0, 1) * w.second.real().cast<cplx>();
  const double bound = c.initial.smallness * std::norm(z);
  if (norm2(*g, R) > bound)
    throw ConfigError("[initial] ||R0|| = " + fmt17(norm2(*g, R)) + " exceeds smallness * |z0|^2 = " + fmt17(bound));
  psi.values += R;
  return psi;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s = {"ground-state", "spectrum",         "fgr",   "evolve",
                                             "modulate",     "propagator-decay", "report"};
  return s;
}

const std::vector<std::string>& report_inputs() {
  static const std::vector<std::string> f = {"manifest.json", "ground_state.json", "branch.csv",
                                             "spectrum.json", "fgr.json",          "evolve.json",
                                             "normal_form.json", "modulation.csv", "modulate_timeseries.csv",
                                             "propagator.json"};
  return f;
}

StageResult run_ground_state(const ExperimentConfig& c, const fs::path& out) {
  StageResult r;
  r.stage = "ground-state";
  const GridPtr g = c.grid();
  json j;

  const auto sol = solve_soliton(c.model, g, c.model.lambda);
  const auto dphi = dlambda_phi(c.model, sol.phi, c.model.lambda);
  j["lambda"] = c.model.lambda;
  j["residual"] = sol.residual;
  j["iterations"] = sol.iterations;
  j["mass"] = integrate(*g, RVec(sol.phi.values.cwiseAbs2()));
  j["delta_prime"] = 2.0 * dot(*g, sol.phi.values, dphi.values);
  diagnostic(j, "decay", [&] {
    const auto d = decay_fit(sol.phi);
    return json{{"rate", d.rate}, {"expected", std::sqrt(c.model.lambda)}, {"residual", d.residual}, {"points", d.points}};
  });
  json cond = json::object();
  for (const auto& it : check_conditions(c.model).items)
    cond[it.name] = {{"passed", it.passed}, {"value", it.value}, {"detail", it.detail}};
  j["conditions"] = cond;

  CsvTable prof;
  prof.columns = {g->mode() == GridMode::line1d ? "x" : "r", "phi", "dphi"};
  for (Eigen::Index k = 0; k < sol.phi.values.size(); ++k)
    prof.rows.push_back({g->nodes()[k], sol.phi.values[k], dphi.values[k]});
  write_table(out, "soliton.csv", prof, r);

  const auto b = branch(c.model, g, c.branch.lambda_min, c.branch.lambda_max, c.branch.steps);
  CsvTable bt;
  bt.columns = {"lambda", "delta", "ddelta", "ddelta_pairing", "decay_rate", "residual"};
  for (std::size_t i = 0; i < b.lambda.size(); ++i)
    bt.rows.push_back({b.lambda[i], b.delta[i], b.ddelta[i], b.ddelta_pairing[i], b.decay_rate[i], b.residual[i]});
  write_table(out, "branch.csv", bt, r);
  j["branch_stable"] = b.stable();

  // closed-form checks with h = 0, where V_h is the constant V(0)
  if (g->mode() == GridMode::line1d && c.model.nonlinearity.kind == NonlinearityKind::cubic) {
    ModelConfig flat = c.model;
    flat.potential.h = 0.0;
    const double mu = c.model.lambda + flat.potential.V(0.0);
    json fc;
    if (mu > 0.0) {
      const RealField seed = free_soliton_cubic(g, 1.1 * mu);
      const auto t0 = Clock::now();
      const auto fs_ = solve_soliton(flat, g, c.model.lambda, &seed);
      r.timings["free_soliton_seconds"] = seconds_since(t0);
      fc["mu"] = mu;
      fc["sup_error"] = (fs_.phi.values - free_soliton_cubic(g, mu).values).cwiseAbs().maxCoeff();
      fc["residual"] = fs_.residual;
    }
    j["free_check"] = fc;
    diagnostic(j, "free_branch", [&] {
      const auto fb = branch(flat, g, c.branch.lambda_min, c.branch.lambda_max, c.branch.steps);
      double worst = 0.0;
      for (std::size_t i = 0; i < fb.lambda.size(); ++i) {
        const double m = fb.lambda[i] + flat.potential.V(0.0);
        worst = std::max(worst, std::abs(fb.delta[i] / (4.0 * std::sqrt(m)) - 1.0));
      }
      return json{{"max_relative_mass_error", worst}, {"points", fb.lambda.size()}};
    });
  }
  write_json(out, "ground_state.json", j, r);
  return r;
}

StageResult run_spectrum(const ExperimentConfig& c, const fs::path& out) {
  StageResult r;
  r.stage = "spectrum";
  const GridPtr g = c.grid();
  const auto op = linearize(c.model, g, c.model.lambda);
  const auto sp = discrete_spectrum(op);
  const Grid& gr = *g;
  json j;
  j["lambda"] = c.model.lambda;
  j["epsilon"] = sp.epsilon;
  j["N"] = sp.N;
  j["pairing_xi_eta"] = sp.pairing_xi_eta;
  j["pairing_from_L_minus"] = dot(gr, op.apply_minus(sp.eta), sp.eta) / sp.epsilon;
  j["delta_prime"] = op.ddelta;
  j["eigen_residuals"] = {{"plus", sp.residual_plus}, {"minus", sp.residual_minus}};

  const CVec zero = CVec::Zero(g->size());
  const double nphi = norm2(gr, op.phi);
  const auto l0 = op.apply_L(TwoComponentField(g, zero, op.phi.cast<cplx>()));
  const auto l1 = op.apply_L(TwoComponentField(g, op.dphi.cast<cplx>(), zero)) -
                  TwoComponentField(g, zero, op.phi.cast<cplx>());
  j["zero_mode_residuals"] = {{"L_phi", norm2(l0) / nphi}, {"L_dphi_minus_phi", norm2(l1) / nphi}};

  auto leading = [&](const ModelConfig& m, double eps) {
    const double pred = m.potential.h * std::sqrt(2.0 * m.potential.second_derivative_at_zero());
    return json{{"h", m.potential.h}, {"epsilon", eps}, {"prediction", pred}, {"relative_discrepancy", eps / pred - 1.0}};
  };
  j["leading_order"] = leading(c.model, sp.epsilon);
  diagnostic(j, "leading_order_half_h", [&] {
    ModelConfig half = c.model;
    half.potential.h *= 0.5;
    return leading(half, discrete_spectrum(linearize(half, g, half.lambda)).epsilon);
  });

  const auto count = discrete_mode_count(op);
  j["mode_count"] = {{"total", count.total},
                     {"zero_modes", count.zero_modes},
                     {"internal_pairs", count.internal_pairs},
                     {"min_nu", count.min_nu},
                     {"max_real_part", count.max_real_part}};

  const RieszProjection P(op, sp);
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> nd;
  double idem = 0.0;
  for (int t = 0; t < 100; ++t) {
    CVec a(g->size()), b(g->size());
    for (Eigen::Index k = 0; k < a.size(); ++k) {
      a[k] = cplx(nd(rng), nd(rng));
      b[k] = cplx(nd(rng), nd(rng));
    }
    const TwoComponentField w(g, a, b);
    const auto p = P.discrete(w);
    idem = std::max(idem, norm2(P.discrete(p) - p) / norm2(w));
  }
  double annihilate = 0.0;
  for (const auto& e : P.basis()) annihilate = std::max(annihilate, norm2(P.continuous(e)) / norm2(e));
  j["projection"] = {{"idempotency", idem}, {"continuous_on_discrete", annihilate}, {"samples", 100}};

  json res;
  for (int s : {1, -1}) {
    const auto p = resonance_indicator(op, s);
    res[s > 0 ? "plus" : "minus"] = {{"indicator", p.indicator}, {"even", p.indicator_even}, {"odd", p.indicator_odd},
                                     {"resonance", p.resonance}};
  }
  const auto fp = resonance_indicator(op, 1, 1e-3, true);
  res["free"] = {{"indicator", fp.indicator}, {"resonance", fp.resonance}};
  res["indicator"] = std::min(res["plus"]["indicator"].get<double>(), res["minus"]["indicator"].get<double>());
  j["resonance_indicator"] = res;
  write_json(out, "spectrum.json", j, r);

  CsvTable modes;
  modes.columns = {"x", "phi", "dphi", "xi", "eta"};
  for (Eigen::Index k = 0; k < op.phi.size(); ++k)
    modes.rows.push_back({gr.nodes()[k], op.phi[k], op.dphi[k], sp.xi[k], sp.eta[k]});
  write_table(out, "modes.csv", modes, r);
  return r;
}

StageResult run_fgr(const ExperimentConfig& c, const fs::path& out) {
  StageResult r;
  r.stage = "fgr";
  const GridPtr g = c.grid();
  const auto op = linearize(c.model, g, c.model.lambda);
  const auto sp = discrete_spectrum(op);
  FgrOptions opt;
  opt.deltas = c.fgr.deltas;
  opt.layer = {true, c.fgr.layer_strength, c.fgr.layer_fraction};
  auto f = fgr_coefficient(op, sp, opt);
  if (c.fgr.box_half_width > 0.0) {
    FgrOptions o2 = opt;
    o2.compute_plus = false;
    fgr_box_check(f, c.model, c.n, c.fgr.box_half_width, o2);
  }
  json j;
  j["N"] = f.N;
  j["epsilon"] = sp.epsilon;
  j["ReY"] = f.Y.real();
  j["ImY"] = f.Y.imag();
  j["extrapolated"] = complex_json(f.Y);
  json seq = json::array();
  for (const auto& e : f.minus) seq.push_back({{"delta", e.delta}, {"ReY", e.Y.real()}, {"ImY", e.Y.imag()}});
  j["delta_sequence"] = seq;
  json plus = json::array();
  for (const auto& e : f.plus) plus.push_back({{"delta", e.delta}, {"ReY", e.Y.real()}, {"ImY", e.Y.imag()}});
  j["plus_sequence"] = plus;
  j["plus_limit"] = complex_json(f.Y_plus);
  j["richardson_spread"] = f.richardson_spread;
  j["max_step_change"] = f.max_step_change;
  j["box_sensitivity"] = f.box_sensitivity;
  j["box_L"] = f.compare_half_width;
  j["box_value"] = complex_json(f.Y_compare);

  json adm;
  std::map<std::string, ExpansionCoefficient> R;
  for (auto [m, n] : {std::pair{2, 0}, std::pair{1, 1}, std::pair{0, 2}}) {
    const std::string key = "R" + std::to_string(m) + std::to_string(n);
    R[key] = compute_Rmn(op, sp, m, n, &f, opt);
    adm[key] = {{"residual", R[key].admissibility}, {"tail_rate", R[key].tail_rate}};
  }
  const double conj_mismatch =
      std::max((R["R02"].field.first - R["R20"].field.first.conjugate()).cwiseAbs().maxCoeff(),
               (R["R02"].field.second - R["R20"].field.second.conjugate()).cwiseAbs().maxCoeff());
  adm["R02_conj_R20_mismatch"] = conj_mismatch;
  j["admissibility"] = adm;
  write_json(out, "fgr.json", j, r);

  CsvTable t;
  t.columns = {"x", "R20_1_re", "R20_1_im", "R20_2_re", "R20_2_im", "R11_1_re", "R11_1_im", "R11_2_re", "R11_2_im"};
  const auto& a = R["R20"].field;
  const auto& b = R["R11"].field;
  for (Eigen::Index k = 0; k < a.first.size(); ++k)
    t.rows.push_back({g->nodes()[k], a.first[k].real(), a.first[k].imag(), a.second[k].real(), a.second[k].imag(),
                      b.first[k].real(), b.first[k].imag(), b.second[k].real(), b.second[k].imag()});
  write_table(out, "expansion_coefficients.csv", t, r);
  return r;
}

StageResult run_evolve(const ExperimentConfig& c, const fs::path& out) {
  StageResult r;
  r.stage = "evolve";
  const GridPtr g = c.grid();
  const ModulationBasis basis(c.model, g, c.model.lambda, c.diagnostics.basis_spacing, c.diagnostics.basis_half_range);
  const cplx z0(c.initial.z1, -c.initial.z2);
  const auto psi0 = initial_perturbation(c, basis, z0);
  EvolveOptions opt;
  opt.T = c.integrator.T;
  opt.dt = c.integrator.dt;
  opt.record_every = c.integrator.record_every;
  opt.snapshot_every = 0.0;
  opt.layer = c.integrator.layer.enabled ? c.integrator.layer : no_layer();
  const auto t0 = Clock::now();
  const auto ev = evolve_nls(c.model, psi0, opt);
  r.timings["evolve_seconds"] = seconds_since(t0);
  write_table(out, "evolution.csv", timeseries_table(ev.series), r);

  json j;
  j["T"] = opt.T;
  j["dt"] = opt.dt;
  j["scheme"] = ev.scheme;
  j["layer"] = ev.layer.enabled;
  j["mass_drift"] = ev.max_relative_mass_drift();
  j["energy_drift"] = ev.max_relative_energy_drift();
  if (!ev.layer.enabled) {
    // second run at dt/2 for the order of the energy error
    EvolveOptions half = opt;
    half.dt = 0.5 * opt.dt;
    const auto eh = evolve_nls(c.model, psi0, half);
    j["energy_drift_half_dt"] = eh.max_relative_energy_drift();
    j["energy_drift_ratio"] = ev.max_relative_energy_drift() / eh.max_relative_energy_drift();
  }
  const auto& last = ev.series.back();
  j["final"] = {{"t", last.t}, {"mass", last.mass}, {"energy", last.energy}, {"a", last.a}, {"p", last.p}};
  write_json(out, "evolve.json", j, r);
  return r;
}

namespace {

struct TrackedRun {
  EvolutionResult evolution;
  ModulationSeries series;
};

TrackedRun tracked_run(const ExperimentConfig& c, const ModulationBasis& basis, cplx z0) {
  EvolveOptions opt;
  opt.T = c.integrator.T;
  opt.dt = c.integrator.dt;
  opt.record_every = c.integrator.record_every;
  opt.snapshot_every = c.integrator.snapshot_every;
  opt.store_snapshots = false;
  opt.layer = c.integrator.layer.enabled ? c.integrator.layer : no_layer();
  DecomposeOptions dopt;
  dopt.nu = c.diagnostics.nu;
  Tracker tracker(basis, {0.0, c.model.lambda, z0}, dopt);
  opt.on_snapshot = [&](double t, const ComplexField& psi) { tracker.push(t, psi); };
  TrackedRun run;
  run.evolution = evolve_nls(c.model, initial_perturbation(c, basis, z0), opt);
  run.series = tracker.take();
  return run;
}

CsvTable modulation_table(const ModulationSeries& s, const NormalFormModel* nf) {
  CsvTable t;
  t.columns = {"t",       "theta",   "lambda",   "z_re",  "z_im", "beta_re", "beta_im",
               "R_w2norm", "R_inf", "res1", "res2", "res3",  "res4"};
  for (const auto& p : s.points) {
    const cplx beta = nf ? apply_normal_form(*nf, p.z) : p.z;
    t.rows.push_back({p.t, p.theta, p.lambda, p.z.real(), p.z.imag(), beta.real(), beta.imag(), p.R_w2norm, p.R_inf,
                      p.residuals[0], p.residuals[1], p.residuals[2], p.residuals[3]});
  }
  if (s.truncated) t.comments.push_back("truncated at t = " + fmt17(s.failure_time) + ": " + s.failure);
  return t;
}

json coefficients_json(const ZOdeCoefficients& z) {
  return {{"linear", complex_json(z.linear)},
          {"q20", complex_json(z.q20)},
          {"q11", complex_json(z.q11)},
          {"q02", complex_json(z.q02)},
          {"cubic", complex_json(z.cubic)},
          {"max_quadratic", z.max_quadratic()},
          {"residual_rms", z.residual_rms},
          {"derivative_rms", z.derivative_rms},
          {"condition", z.condition},
          {"samples", z.samples}};
}

}  // namespace

StageResult run_modulate(const ExperimentConfig& c, const fs::path& out) {
  StageResult r;
  r.stage = "modulate";
  const GridPtr g = c.grid();
  if (g->mode() != GridMode::line1d) throw ConfigError("modulate: line1d grid required");
  const ModulationBasis basis(c.model, g, c.model.lambda, c.diagnostics.basis_spacing, c.diagnostics.basis_half_range);
  const cplx z0(c.initial.z1, -c.initial.z2);
  const double eps = basis.at(c.model.lambda).epsilon;

  const auto t0 = Clock::now();
  std::vector<TrackedRun> runs(2);
  const std::vector<cplx> starts = {z0, c.diagnostics.companion_scale * z0};
  parallel_for(2, [&](std::size_t i) { runs[i] = tracked_run(c, basis, starts[i]); });
  r.timings["evolve_and_track_seconds"] = seconds_since(t0);
  const auto& main = runs[0].series;
  const auto& comp = runs[1].series;

  json j;
  j["epsilon_spectral"] = eps;
  j["z0"] = complex_json(z0);
  j["companion_z0"] = complex_json(starts[1]);
  j["points"] = main.points.size();
  j["truncated"] = main.truncated;
  if (main.truncated) j["failure"] = {{"t", main.failure_time}, {"what", main.failure}};
  j["companion_truncated"] = comp.truncated;
  double worst_res = 0.0;
  for (const auto& p : main.points)
    for (double v : p.residuals) worst_res = std::max(worst_res, v);
  j["max_orthogonality_residual"] = worst_res;

  const FitWindow whole;
  std::optional<NormalFormModel> nf;
  try {
    const auto coeffs = fit_z_ode({&main, &comp}, whole);
    j["epsilon_fit"] = coeffs.epsilon_fit();
    j["P1_coeffs"] = coefficients_json(coeffs);
    std::vector<CVec> zs = {main.z(), comp.z()};
    std::vector<std::vector<double>> ts = {main.times(), comp.times()};
    nf = normal_form_quadratic(zs, ts, coeffs, whole);
    j["normal_form"] = {{"b20", complex_json(nf->b20)},
                        {"b11", complex_json(nf->b11)},
                        {"b02", complex_json(nf->b02)},
                        {"beta_coeffs", coefficients_json(nf->beta_fit)},
                        {"quadratic_reduction", nf->quadratic_reduction},
                        {"near_identity", nf->near_identity},
                        {"imag_ratio", nf->imag_ratio}};
  } catch (const NumericalError& e) {
    j["P1_coeffs"] = error_json(e);
  } catch (const ConfigError& e) {
    j["P1_coeffs"] = error_json(e);
  }

  const auto t = main.times();
  diagnostic(j, "riccati", [&] {
    CVec beta = main.z();
    if (nf) beta = nf->beta[0];
    const auto f = riccati_fit(t, beta, {c.diagnostics.riccati_t1, c.diagnostics.riccati_t2});
    return json{{"ReY1_dyn", f.ReY1}, {"beta0", f.beta0}, {"slope", f.slope}, {"slope_stderr", f.slope_stderr},
                {"r2", f.r2}, {"samples", f.samples}, {"on_beta", nf.has_value()}};
  });
  if (j["riccati"].contains("ReY1_dyn")) j["ReY1_dyn"] = j["riccati"]["ReY1_dyn"];

  json ex = json::object();
  std::vector<double> absz, rn;
  for (const auto& p : main.points) {
    absz.push_back(std::abs(p.z));
    rn.push_back(p.R_w2norm);
  }
  diagnostic(ex, "z", [&] { return decay_json(decay_exponent(t, absz, c.diagnostics.fit_t1, c.diagnostics.fit_t2)); });
  diagnostic(ex, "R", [&] { return decay_json(decay_exponent(t, rn, c.diagnostics.fit_t1, c.diagnostics.fit_t2)); });
  diagnostic(j, "lambda_limit", [&] {
    const auto l = lambda_limit(main, basis, c.diagnostics.lambda_t1);
    j["lambda_inf"] = l.lambda_inf;
    return json{{"lambda_inf", l.lambda_inf},   {"constant", l.constant},       {"decreasing", l.decreasing},
                {"early_mean", l.early_mean},   {"late_mean", l.late_mean},     {"delta_prime", l.ddelta},
                {"on_stable_branch", l.on_stable_branch}, {"tail", decay_json(l.tail)}};
  });
  if (j["lambda_limit"].contains("tail")) ex["lambda"] = j["lambda_limit"]["tail"];
  else ex["lambda"] = j["lambda_limit"];
  j["exponents"] = ex;

  diagnostic(j, "newton_law", [&] {
    const auto nl = newton_law_check(runs[0].evolution.series, eps, whole, c.diagnostics.newton_t_early,
                                     c.diagnostics.newton_t_late);
    return json{{"omega", nl.fit.omega},
                {"damping", nl.fit.damping},
                {"fit_r2", nl.fit.r2},
                {"epsilon", nl.epsilon},
                {"relative_frequency_error", nl.relative_frequency_error},
                {"adot_mismatch", nl.adot_mismatch},
                {"amplitude_early", nl.amplitude_early},
                {"amplitude_late", nl.amplitude_late},
                {"t_early", nl.t_early},
                {"t_late", nl.t_late}};
  });
  diagnostic(j, "lambda_dot", [&] {
    const auto l = lambda_dot_regression(main, whole);
    return json{{"coeffs", {l.coeffs[0], l.coeffs[1], l.coeffs[2]}},
                {"standard_error", {l.standard_error[0], l.standard_error[1], l.standard_error[2]}},
                {"diagonal_t", l.diagonal_t},
                {"diagonal_ratio", l.diagonal_ratio},
                {"samples", l.samples}};
  });
  diagnostic(j, "gauge_drift", [&] {
    // gamma = Theta - int lambda, expected to drift at a rate O(|z|^2)
    std::vector<double> tt, gamma;
    double integral = 0.0;
    for (std::size_t i = 0; i < main.points.size(); ++i) {
      if (i) integral += 0.5 * (main.points[i].lambda + main.points[i - 1].lambda) * (t[i] - t[i - 1]);
      tt.push_back(t[i]);
      gamma.push_back(main.points[i].theta - integral);
    }
    if (tt.size() < 3) throw NumericalError(ErrorKind::WindowTooShort, "gauge drift");
    const auto f = linear_fit(tt, gamma);
    const double z2 = std::norm(z0);
    return json{{"rate", f.slope}, {"rate_over_z0_squared", z2 > 0.0 ? f.slope / z2 : 0.0}};
  });

  write_table(out, "modulation.csv", modulation_table(main, nf ? &*nf : nullptr), r);
  write_table(out, "modulation_companion.csv", modulation_table(comp, nullptr), r);
  write_table(out, "modulate_timeseries.csv", timeseries_table(runs[0].evolution.series), r);
  write_json(out, "normal_form.json", j, r);
  return r;
}

StageResult run_propagator_decay(const ExperimentConfig& c, const fs::path& out) {
  StageResult r;
  r.stage = "propagator-decay";
  const auto& p = c.propagator;
  const GridPtr g = Grid::line(p.n, p.half_width);
  const auto op = linearize(c.model, g, c.model.lambda);
  const auto sp = discrete_spectrum(op);
  const RieszProjection P(op, sp);
  CVec a(g->size()), b(g->size());
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double x = g->nodes()[k];
    a[k] = std::exp(-(x - 1.0) * (x - 1.0));
    b[k] = 0.5 * std::exp(-(x + 0.5) * (x + 0.5));
  }
  const auto w0 = P.continuous(TwoComponentField(g, a, b));
  LinearEvolveOptions opt;
  opt.T = p.T;
  opt.dt = p.dt;
  opt.record_every = p.record_every;
  opt.nu = c.diagnostics.nu;
  opt.layer = p.layer.enabled ? p.layer : no_layer();
  const auto t0 = Clock::now();
  const auto res = evolve_linearized(op, w0, opt);
  r.timings["evolve_seconds"] = seconds_since(t0);

  CsvTable t;
  t.columns = {"t", "l2", "weighted", "sup_norm"};
  std::vector<double> tt, wn, sn;
  for (const auto& row : res.series) {
    t.rows.push_back({row.t, row.l2, row.weighted, row.sup_norm});
    tt.push_back(row.t);
    wn.push_back(row.weighted);
    sn.push_back(row.sup_norm);
  }
  write_table(out, "propagator.csv", t, r);

  json j;
  j["grid"] = {{"n", p.n}, {"L", p.half_width}};
  j["dt"] = p.dt;
  j["T"] = p.T;
  j["scheme"] = res.scheme;
  j["nu"] = c.diagnostics.nu;
  j["layer"] = {{"enabled", opt.layer.enabled}, {"strength", opt.layer.strength}, {"fraction", opt.layer.fraction}};
  j["initial_continuous_fraction"] = norm2(w0) / norm2(TwoComponentField(g, a, b));
  json ex;
  diagnostic(ex, "weighted", [&] { return decay_json(decay_exponent(tt, wn, p.t1, p.t2)); });
  diagnostic(ex, "sup", [&] { return decay_json(decay_exponent(tt, sn, p.t1, p.t2)); });
  j["exponents"] = ex;
  write_json(out, "propagator.json", j, r);
  return r;
}

json build_report(const fs::path& dir) {
  for (const auto& f : report_inputs())
    if (!fs::exists(dir / f)) throw MissingArtifact((dir / f).string());
  json rep;
  json rows = json::array();
  for (int id = 1; id <= criterion_count; ++id) {
    const auto cr = evaluate_criterion(id, dir);
    rows.push_back({{"id", cr.id}, {"name", cr.name}, {"passed", cr.passed}, {"detail", cr.detail}, {"values", cr.values}});
  }
  rep["criteria"] = rows;
  const json nf = read_json(dir / "normal_form.json");
  const json fg = read_json(dir / "fgr.json");
  const json pr = read_json(dir / "propagator.json");
  rep["ReY1"] = {{"resolvent", fg.value("ReY", json())}, {"dynamics", nf.value("ReY1_dyn", json())}};
  rep["lambda_inf"] = nf.value("lambda_inf", json());
  rep["exponents"] = {{"z", nf["exponents"].value("z", json())},
                      {"R", nf["exponents"].value("R", json())},
                      {"lambda", nf["exponents"].value("lambda", json())},
                      {"propagator_weighted", pr["exponents"].value("weighted", json())},
                      {"propagator_sup", pr["exponents"].value("sup", json())}};
  int passed = 0;
  for (const auto& row : rows) passed += row["passed"].get<bool>() ? 1 : 0;
  rep["passed"] = passed;
  rep["total"] = criterion_count;
  return rep;
}

StageResult run_report(const ExperimentConfig&, const fs::path& out) {
  StageResult r;
  r.stage = "report";
  const json rep = build_report(out);
  write_json(out, "report.json", rep, r);

  // plot-ready decay series
  const auto m = read_csv(out / "modulation.csv");
  const auto t = m.column_values("t");
  const auto zr = m.column_values("z_re"), zi = m.column_values("z_im");
  const auto br = m.column_values("beta_re"), bi = m.column_values("beta_im");
  const auto rn = m.column_values("R_w2norm"), lam = m.column_values("lambda");
  CsvTable d;
  d.columns = {"t", "abs_z", "abs_beta", "inv_abs_beta_sq", "R_w2norm", "lambda_minus_final"};
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double ab = std::hypot(br[i], bi[i]);
    d.rows.push_back({t[i], std::hypot(zr[i], zi[i]), ab, ab > 0.0 ? 1.0 / (ab * ab) : 0.0, rn[i], lam[i] - lam.back()});
  }
  write_table(out, "report_decay.csv", d, r);
  return r;
}

StageResult run_subcommand(const std::string& name, const ExperimentConfig& config, const fs::path& out_dir) {
  static const std::map<std::string, StageResult (*)(const ExperimentConfig&, const fs::path&)> table = {
      {"ground-state", run_ground_state}, {"spectrum", run_spectrum},   {"fgr", run_fgr},
      {"evolve", run_evolve},             {"modulate", run_modulate},   {"propagator-decay", run_propagator_decay},
      {"report", run_report}};
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown subcommand '" + name + "'");
  config.validate();
  fs::create_directories(out_dir);
  const auto t0 = Clock::now();
  StageResult r;
  try {
    r = it->second(config, out_dir);
  } catch (const NumericalError& e) {
    throw NumericalError(e.kind(), "[" + name + "] " + without_kind(e.what()));
  } catch (const ConfigError& e) {
    throw ConfigError("[" + name + "] " + without_kind(e.what()));
  }
  r.wall_clock = seconds_since(t0);
  update_manifest(out_dir, r, config);
  return r;
}

}  // namespace solitonlab
