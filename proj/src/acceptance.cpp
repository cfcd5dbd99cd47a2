#include "solitonlab/acceptance.hpp"

#include "solitonlab/errors.hpp"
#include "solitonlab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace solitonlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Artifacts {
  fs::path dir;
  std::map<std::string, json> cache;

  const json& get(const std::string& name) {
    auto it = cache.find(name);
    if (it != cache.end()) return it->second;
    const fs::path p = dir / name;
    if (!fs::exists(p)) throw MissingArtifact(p.string());
    return cache[name] = read_json(p);
  }
  CsvTable csv(const std::string& name) const {
    const fs::path p = dir / name;
    if (!fs::exists(p)) throw MissingArtifact(p.string());
    return read_csv(p);
  }
};

// Missing keys or recorded failures make a criterion fail instead of aborting the table.
struct Missing : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double num(const json& j, const std::string& path) {
  const json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!cur->is_object() || !cur->contains(key)) {
      if (cur->is_object() && cur->contains("error")) throw Missing((*cur)["error"].get<std::string>());
      throw Missing("no value for " + path);
    }
    cur = &(*cur)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (cur->is_boolean()) return cur->get<bool>() ? 1.0 : 0.0;
  if (!cur->is_number()) throw Missing(path + " is not numeric");
  return cur->get<double>();
}

std::string g4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

class Check {
 public:
  explicit Check(CriterionResult& r) : r_(r) {}
  void require(bool ok, const std::string& what) {
    if (!ok) {
      failed_ = true;
      if (!r_.detail.empty()) r_.detail += "; ";
      r_.detail += what;
    }
  }
  void value(const std::string& key, double v) { r_.values[key] = v; }
  bool failed() const { return failed_; }

 private:
  CriterionResult& r_;
  bool failed_ = false;
};

const char* names[criterion_count + 1] = {"",
                                          "ground-state exactness",
                                          "stability slope",
                                          "internal mode",
                                          "zero modes",
                                          "projections",
                                          "resonance probe",
                                          "relaxation rates",
                                          "Fermi Golden Rule cross-validation",
                                          "lambda convergence",
                                          "linear propagator decay",
                                          "conservation",
                                          "effective Newton law",
                                          "quadratic normal form",
                                          "admissibility"};

void c1(Artifacts& a, Check& c) {
  const json& gs = a.get("ground_state.json");
  const json& m = a.get("manifest.json");
  const double err = num(gs, "free_check.sup_error");
  c.value("sup_error", err);
  c.require(err <= 1e-8, "sup error " + g4(err) + " > 1e-08");
  const double secs = num(m, "stages.ground-state.timings.free_soliton_seconds");
  c.value("seconds", secs);
  c.require(secs < 1.0, "solve took " + g4(secs) + " s");
}

void c2(Artifacts& a, Check& c) {
  const auto b = a.csv("branch.csv");
  const auto lam = b.column_values("lambda"), dd = b.column_values("ddelta");
  const double lo = *std::min_element(lam.begin(), lam.end()), hi = *std::max_element(lam.begin(), lam.end());
  c.require(lo <= 0.2 + 1e-12 && hi >= 0.5 - 1e-12, "branch does not cover [0.2, 0.5]");
  double mind = dd.front();
  for (double v : dd) mind = std::min(mind, v);
  c.value("min_delta_prime", mind);
  c.require(mind > 0.0, "delta' = " + g4(mind) + " <= 0 on the branch");
  const double mass = num(a.get("ground_state.json"), "free_branch.max_relative_mass_error");
  c.value("free_mass_error", mass);
  c.require(mass <= 1e-6, "free mass error " + g4(mass) + " > 1e-06");
}

void c3(Artifacts& a, Check& c) {
  const json& s = a.get("spectrum.json");
  const double d = num(s, "leading_order.relative_discrepancy");
  const double dh = num(s, "leading_order_half_h.relative_discrepancy");
  c.value("discrepancy", d);
  c.value("discrepancy_half_h", dh);
  c.require(std::abs(d) <= 0.15, "eps off h sqrt(2V''(0)) by " + g4(100 * d) + "%");
  c.require(std::abs(dh) < std::abs(d), "halving h does not reduce the discrepancy");
  const double rp = num(s, "eigen_residuals.plus"), rm = num(s, "eigen_residuals.minus");
  c.value("residual", std::max(rp, rm));
  c.require(std::max(rp, rm) <= 1e-8, "eigenpair residual " + g4(std::max(rp, rm)));
  const double p = num(s, "pairing_xi_eta"), p2 = num(s, "pairing_from_L_minus");
  c.value("pairing", p);
  c.require(p > 0.0, "<xi, eta> <= 0");
  c.require(std::abs(p - p2) <= 1e-8, "<xi, eta> differs from <L- eta, eta>/eps by " + g4(std::abs(p - p2)));
}

void c4(Artifacts& a, Check& c) {
  const json& s = a.get("spectrum.json");
  const double r0 = num(s, "zero_mode_residuals.L_phi"), r1 = num(s, "zero_mode_residuals.L_dphi_minus_phi");
  c.value("L_phi", r0);
  c.value("L_dphi_minus_phi", r1);
  c.require(r0 <= 1e-8, "||L(0, phi)|| = " + g4(r0));
  c.require(r1 <= 1e-6, "||L(dphi, 0) - (0, phi)|| = " + g4(r1));
}

void c5(Artifacts& a, Check& c) {
  const json& s = a.get("spectrum.json");
  const double idem = num(s, "projection.idempotency"), ann = num(s, "projection.continuous_on_discrete");
  const double total = num(s, "mode_count.total");
  c.value("idempotency", idem);
  c.value("continuous_on_discrete", ann);
  c.value("discrete_modes", total);
  c.require(idem <= 1e-8, "Pd^2 - Pd = " + g4(idem));
  c.require(ann <= 1e-8, "Pc on the discrete space = " + g4(ann));
  c.require(total == 4.0, g4(total) + " discrete modes");
}

void c6(Artifacts& a, Check& c) {
  const json& s = a.get("spectrum.json");
  const double f = num(s, "resonance_indicator.free.indicator");
  const double d = num(s, "resonance_indicator.indicator");
  c.value("free", f);
  c.value("default", d);
  c.require(f <= 1e-8, "free indicator " + g4(f));
  c.require(d >= 1e-2, "indicator " + g4(d) + " < 1e-2");
}

void c7(Artifacts& a, Check& c) {
  const json& n = a.get("normal_form.json");
  const double ez = num(n, "exponents.z.exponent"), er = num(n, "exponents.R.exponent");
  c.value("z_exponent", ez);
  c.value("R_exponent", er);
  c.require(ez >= -0.65 && ez <= -0.35, "|z| exponent " + g4(ez) + " outside [-0.65, -0.35]");
  c.require(er >= -1.3 && er <= -0.7, "||rho R|| exponent " + g4(er) + " outside [-1.3, -0.7]");
  c.require(num(n, "exponents.z.t2") / num(n, "exponents.z.t1") >= 10.0 - 1e-9, "fit window shorter than a decade");
  const double secs = num(a.get("manifest.json"), "stages.modulate.wall_clock_seconds");
  c.value("seconds", secs);
  c.require(secs <= 900.0, "run took " + g4(secs) + " s");
}

void c8(Artifacts& a, Check& c) {
  const json& f = a.get("fgr.json");
  const json& n = a.get("normal_form.json");
  const double y = num(f, "ReY"), spread = num(f, "richardson_spread"), box = num(f, "box_sensitivity");
  const double dyn = num(n, "ReY1_dyn"), r2 = num(n, "riccati.r2");
  c.value("ReY_resolvent", y);
  c.value("ReY_dynamics", dyn);
  c.value("delta_halving", spread);
  c.value("box_sensitivity", box);
  c.value("riccati_r2", r2);
  c.require(y < 0.0, "Re Y1 = " + g4(y) + " is not negative");
  c.require(spread <= 0.05, "delta-halving change " + g4(spread));
  c.require(box >= 0.0 && box <= 0.05, "box sensitivity " + g4(box));
  c.require((dyn < 0.0) == (y < 0.0), "sign of Re Y1 differs between resolvent and dynamics");
  c.require(std::abs(dyn / y - 1.0) <= 0.25, "magnitudes differ by " + g4(100 * std::abs(dyn / y - 1.0)) + "%");
  c.require(r2 >= 0.98, "Riccati R^2 = " + g4(r2));
}

void c9(Artifacts& a, Check& c) {
  const json& n = a.get("normal_form.json");
  const double dec = num(n, "lambda_limit.decreasing"), ex = num(n, "lambda_limit.tail.exponent");
  const double stable = num(n, "lambda_limit.on_stable_branch");
  c.value("exponent", ex);
  c.value("lambda_inf", num(n, "lambda_limit.lambda_inf"));
  c.value("early_mean", num(n, "lambda_limit.early_mean"));
  c.value("late_mean", num(n, "lambda_limit.late_mean"));
  c.require(dec == 1.0, "|lambda - lambda_inf| not decreasing over the last half");
  c.require(ex <= -0.3, "exponent " + g4(ex) + " > -0.3");
  c.require(stable == 1.0, "lambda_inf not on the stable branch");
}

void c10(Artifacts& a, Check& c) {
  const json& p = a.get("propagator.json");
  const double w = num(p, "exponents.weighted.exponent"), s = num(p, "exponents.sup.exponent");
  c.value("weighted_exponent", w);
  c.value("sup_exponent", s);
  c.require(w >= -1.75 && w <= -1.25, "weighted exponent " + g4(w) + " outside [-1.75, -1.25]");
  c.require(s >= -0.65 && s <= -0.35, "sup exponent " + g4(s) + " outside [-0.65, -0.35]");
  c.require(num(p, "exponents.weighted.t2") / num(p, "exponents.weighted.t1") >= 10.0 - 1e-9,
            "fit window shorter than a decade");
}

void c11(Artifacts& a, Check& c) {
  const json& e = a.get("evolve.json");
  c.require(num(e, "layer") == 0.0, "evolution ran with the absorbing layer");
  c.require(num(e, "T") >= 100.0 - 1e-9, "evolution shorter than T = 100");
  const double m = num(e, "mass_drift"), en = num(e, "energy_drift"), ratio = num(e, "energy_drift_ratio");
  c.value("mass_drift", m);
  c.value("energy_drift", en);
  c.value("ratio", ratio);
  c.require(m <= 1e-11, "mass drift " + g4(m));
  c.require(en <= 1e-6, "energy drift " + g4(en));
  c.require(ratio >= 3.5 && ratio <= 4.5, "dt-halving ratio " + g4(ratio));
}

void c12(Artifacts& a, Check& c) {
  const json& n = a.get("normal_form.json");
  const double fe = num(n, "newton_law.relative_frequency_error"), mm = num(n, "newton_law.adot_mismatch");
  const double ae = num(n, "newton_law.amplitude_early"), al = num(n, "newton_law.amplitude_late");
  c.value("frequency_error", fe);
  c.value("adot_mismatch", mm);
  c.value("amplitude_early", ae);
  c.value("amplitude_late", al);
  c.require(fe <= 0.05, "frequency off eps by " + g4(100 * fe) + "%");
  c.require(mm <= 0.05, "a'/2 - p mismatch " + g4(100 * mm) + "%");
  c.require(al < ae, "amplitude does not decrease");
}

void c13(Artifacts& a, Check& c) {
  const json& n = a.get("normal_form.json");
  const double red = num(n, "normal_form.quadratic_reduction"), ni = num(n, "normal_form.near_identity");
  c.value("quadratic_reduction", red);
  c.value("near_identity", ni);
  c.require(red >= 10.0, "quadratic coefficients reduced only " + g4(red) + "x");
  c.require(ni <= 5.0, "|beta - z| / |z|^2 = " + g4(ni));
}

void c14(Artifacts& a, Check& c) {
  const json& f = a.get("fgr.json");
  for (const char* k : {"R20", "R11", "R02"}) {
    const double v = num(f, std::string("admissibility.") + k + ".residual");
    c.value(k, v);
    c.require(v <= 1e-8, std::string(k) + " admissibility residual " + g4(v));
  }
  const double mm = num(f, "admissibility.R02_conj_R20_mismatch");
  c.value("conj_mismatch", mm);
  c.require(mm <= 1e-14, "R02 differs from conj(R20) by " + g4(mm));
}

using Fn = void (*)(Artifacts&, Check&);
const Fn checks[criterion_count + 1] = {nullptr, c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12, c13, c14};

CriterionResult evaluate(int id, Artifacts& a) {
  if (id < 1 || id > criterion_count) throw std::invalid_argument("criterion id out of range");
  CriterionResult r;
  r.id = id;
  r.name = names[id];
  Check c(r);
  try {
    checks[id](a, c);
  } catch (const Missing& e) {
    c.require(false, e.what());
  }
  r.passed = !c.failed();
  return r;
}

}  // namespace

CriterionResult evaluate_criterion(int id, const fs::path& dir) {
  Artifacts a{dir, {}};
  return evaluate(id, a);
}

std::vector<CriterionResult> evaluate_available(const fs::path& dir) {
  Artifacts a{dir, {}};
  std::vector<CriterionResult> out;
  for (int id = 1; id <= criterion_count; ++id) {
    try {
      out.push_back(evaluate(id, a));
    } catch (const MissingArtifact&) {
    }
  }
  return out;
}

std::string format_line(const CriterionResult& r) {
  std::string s = "criterion " + std::to_string(r.id) + " (" + r.name + "): " + (r.passed ? "PASS" : "FAIL");
  std::string vals;
  for (auto it = r.values.begin(); it != r.values.end(); ++it) {
    if (!vals.empty()) vals += ", ";
    vals += it.key() + "=" + (it.value().is_number() ? fmt17(it.value().get<double>()) : it.value().dump());
  }
  if (!vals.empty()) s += " [" + vals + "]";
  if (!r.detail.empty()) s += " " + r.detail;
  return s;
}

}  // namespace solitonlab
