#include "solitonlab/config.hpp"

#include "solitonlab/errors.hpp"
#include "solitonlab/io.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace solitonlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out))
    throw std::invalid_argument("not a finite number: '" + v + "'");
  return out;
}

long long parse_int(const std::string& v) {
  long long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw std::invalid_argument("not an integer: '" + v + "'");
  return out;
}

std::size_t parse_size(const std::string& v) {
  const long long n = parse_int(v);
  if (n <= 0) throw std::invalid_argument("must be a positive integer: '" + v + "'");
  return static_cast<std::size_t>(n);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw std::invalid_argument("not a boolean: '" + v + "'");
}

std::vector<double> parse_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item)));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt17(v[i]);
  return s;
}

std::string kind_text(NonlinearityKind k) {
  switch (k) {
    case NonlinearityKind::cubic: return "cubic";
    case NonlinearityKind::saturable: return "saturable";
    case NonlinearityKind::power_series: return "power_series";
  }
  return "cubic";
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

using Table = std::map<std::string, std::map<std::string, Field>>;

#define DOUBLE_FIELD(expr) \
  Field { [](ExperimentConfig& c, const std::string& v) { c.expr = parse_double(v); }, \
          [](const ExperimentConfig& c) { return fmt17(c.expr); } }
#define SIZE_FIELD(expr) \
  Field { [](ExperimentConfig& c, const std::string& v) { c.expr = parse_size(v); }, \
          [](const ExperimentConfig& c) { return std::to_string(c.expr); } }
#define BOOL_FIELD(expr) \
  Field { [](ExperimentConfig& c, const std::string& v) { c.expr = parse_bool(v); }, \
          [](const ExperimentConfig& c) { return std::string(c.expr ? "true" : "false"); } }

const Table& table() {
  static const Table t = {
      {"model",
       {{"dimension", {[](ExperimentConfig& c, const std::string& v) { c.model.dimension = grid_mode_from_string(v); },
                       [](const ExperimentConfig& c) { return std::string(to_string(c.model.dimension)); }}},
        {"lambda", DOUBLE_FIELD(model.lambda)},
        {"A", DOUBLE_FIELD(model.potential.depth)},
        {"h", DOUBLE_FIELD(model.potential.h)},
        {"nonlinearity",
         {[](ExperimentConfig& c, const std::string& v) {
            if (v == "cubic") c.model.nonlinearity.kind = NonlinearityKind::cubic;
            else if (v == "saturable") c.model.nonlinearity.kind = NonlinearityKind::saturable;
            else if (v == "power_series") c.model.nonlinearity.kind = NonlinearityKind::power_series;
            else throw std::invalid_argument("unknown nonlinearity '" + v + "'");
          },
          [](const ExperimentConfig& c) { return kind_text(c.model.nonlinearity.kind); }}},
        {"saturable_q",
         {[](ExperimentConfig& c, const std::string& v) { c.model.nonlinearity.q = static_cast<int>(parse_size(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.model.nonlinearity.q); }}},
        {"saturable_gamma", DOUBLE_FIELD(model.nonlinearity.gamma)},
        {"coefficients",
         {[](ExperimentConfig& c, const std::string& v) { c.model.nonlinearity.coeffs = parse_list(v); },
          [](const ExperimentConfig& c) { return list_text(c.model.nonlinearity.coeffs); }}}}},
      {"grid", {{"n", SIZE_FIELD(n)}, {"L", DOUBLE_FIELD(half_width)}}},
      {"branch",
       {{"lambda_min", DOUBLE_FIELD(branch.lambda_min)},
        {"lambda_max", DOUBLE_FIELD(branch.lambda_max)},
        {"steps", {[](ExperimentConfig& c, const std::string& v) { c.branch.steps = static_cast<int>(parse_size(v)); },
                   [](const ExperimentConfig& c) { return std::to_string(c.branch.steps); }}}}},
      {"integrator",
       {{"dt", DOUBLE_FIELD(integrator.dt)},
        {"T", DOUBLE_FIELD(integrator.T)},
        {"snapshot_every", DOUBLE_FIELD(integrator.snapshot_every)},
        {"record_every", DOUBLE_FIELD(integrator.record_every)},
        {"layer", BOOL_FIELD(integrator.layer.enabled)},
        {"layer_strength", DOUBLE_FIELD(integrator.layer.strength)},
        {"layer_fraction", DOUBLE_FIELD(integrator.layer.fraction)}}},
      {"initial",
       {{"z1", DOUBLE_FIELD(initial.z1)},
        {"z2", DOUBLE_FIELD(initial.z2)},
        {"r0_amplitude", DOUBLE_FIELD(initial.r0_amplitude)},
        {"r0_width", DOUBLE_FIELD(initial.r0_width)},
        {"smallness", DOUBLE_FIELD(initial.smallness)}}},
      {"diagnostics",
       {{"nu", DOUBLE_FIELD(diagnostics.nu)},
        {"fit_t1", DOUBLE_FIELD(diagnostics.fit_t1)},
        {"fit_t2", DOUBLE_FIELD(diagnostics.fit_t2)},
        {"lambda_t1", DOUBLE_FIELD(diagnostics.lambda_t1)},
        {"riccati_t1", DOUBLE_FIELD(diagnostics.riccati_t1)},
        {"riccati_t2", DOUBLE_FIELD(diagnostics.riccati_t2)},
        {"newton_t_early", DOUBLE_FIELD(diagnostics.newton_t_early)},
        {"newton_t_late", DOUBLE_FIELD(diagnostics.newton_t_late)},
        {"companion_scale", DOUBLE_FIELD(diagnostics.companion_scale)},
        {"basis_spacing", DOUBLE_FIELD(diagnostics.basis_spacing)},
        {"basis_half_range", DOUBLE_FIELD(diagnostics.basis_half_range)}}},
      {"fgr",
       {{"deltas", {[](ExperimentConfig& c, const std::string& v) { c.fgr.deltas = parse_list(v); },
                    [](const ExperimentConfig& c) { return list_text(c.fgr.deltas); }}},
        {"box_L", DOUBLE_FIELD(fgr.box_half_width)},
        {"layer_strength", DOUBLE_FIELD(fgr.layer_strength)},
        {"layer_fraction", DOUBLE_FIELD(fgr.layer_fraction)}}},
      {"propagator",
       {{"n", SIZE_FIELD(propagator.n)},
        {"L", DOUBLE_FIELD(propagator.half_width)},
        {"dt", DOUBLE_FIELD(propagator.dt)},
        {"T", DOUBLE_FIELD(propagator.T)},
        {"record_every", DOUBLE_FIELD(propagator.record_every)},
        {"layer", BOOL_FIELD(propagator.layer.enabled)},
        {"layer_strength", DOUBLE_FIELD(propagator.layer.strength)},
        {"layer_fraction", DOUBLE_FIELD(propagator.layer.fraction)},
        {"t1", DOUBLE_FIELD(propagator.t1)},
        {"t2", DOUBLE_FIELD(propagator.t2)}}},
      {"output",
       {{"dir", {[](ExperimentConfig& c, const std::string& v) { c.out_dir = v; },
                 [](const ExperimentConfig& c) { return c.out_dir; }}},
        {"seed", {[](ExperimentConfig& c, const std::string& v) {
                    const long long s = parse_int(v);
                    if (s < 0) throw std::invalid_argument("seed must be non-negative");
                    c.seed = static_cast<std::uint64_t>(s);
                  },
                  [](const ExperimentConfig& c) { return std::to_string(c.seed); }}}}},
  };
  return t;
}

#undef DOUBLE_FIELD
#undef SIZE_FIELD
#undef BOOL_FIELD

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

GridPtr ExperimentConfig::grid() const {
  return model.dimension == GridMode::line1d ? Grid::line(n, half_width) : Grid::radial(n, half_width);
}

void ExperimentConfig::validate() const {
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[model] ") + e.what());
  }
  if (model.nonlinearity.kind == NonlinearityKind::power_series)
    require(!model.nonlinearity.coeffs.empty(), "[model] coefficients required for power_series");
  if (model.dimension == GridMode::line1d) require(n >= 8 && (n & (n - 1)) == 0, "[grid] n must be a power of two");
  require(half_width > 0.0, "[grid] L must be positive");
  require(branch.lambda_min < branch.lambda_max && branch.steps >= 2, "[branch] need lambda_min < lambda_max, steps >= 2");
  require(integrator.dt > 0.0 && integrator.T > 0.0, "[integrator] dt and T must be positive");
  require(integrator.snapshot_every >= integrator.dt, "[integrator] snapshot_every must be at least dt");
  require(integrator.record_every >= integrator.dt, "[integrator] record_every must be at least dt");
  require(integrator.layer.fraction > 0.0 && integrator.layer.fraction < 0.5, "[integrator] layer_fraction in (0, 0.5)");
  require(integrator.layer.strength >= 0.0, "[integrator] layer_strength must be non-negative");
  require(initial.r0_width > 0.0 && initial.smallness > 0.0, "[initial] r0_width and smallness must be positive");
  require(diagnostics.nu >= 0.0, "[diagnostics] nu must be non-negative");
  require(diagnostics.fit_t1 > 0.0 && diagnostics.fit_t2 > diagnostics.fit_t1, "[diagnostics] need 0 < fit_t1 < fit_t2");
  require(diagnostics.riccati_t2 > diagnostics.riccati_t1, "[diagnostics] need riccati_t1 < riccati_t2");
  require(diagnostics.lambda_t1 > 0.0, "[diagnostics] lambda_t1 must be positive");
  require(diagnostics.companion_scale > 0.0 && diagnostics.companion_scale < 1.0,
          "[diagnostics] companion_scale in (0, 1)");
  require(diagnostics.basis_spacing > 0.0 && diagnostics.basis_half_range > diagnostics.basis_spacing,
          "[diagnostics] basis_half_range must exceed basis_spacing");
  for (std::size_t i = 0; i < fgr.deltas.size(); ++i) {
    require(fgr.deltas[i] > 0.0, "[fgr] deltas must be positive");
    if (i) require(fgr.deltas[i] < fgr.deltas[i - 1], "[fgr] deltas must decrease");
  }
  require(fgr.deltas.size() >= 2, "[fgr] at least two deltas");
  require(fgr.box_half_width == 0.0 || fgr.box_half_width > half_width, "[fgr] box_L must be 0 or exceed [grid] L");
  require(propagator.n >= 8 && (propagator.n & (propagator.n - 1)) == 0, "[propagator] n must be a power of two");
  require(propagator.half_width > 0.0 && propagator.dt > 0.0 && propagator.T > 0.0,
          "[propagator] L, dt and T must be positive");
  require(propagator.record_every >= propagator.dt, "[propagator] record_every must be at least dt");
  require(propagator.t1 > 0.0 && propagator.t2 > propagator.t1, "[propagator] need 0 < t1 < t2");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  const Table& t = table();
  std::istringstream in(text);
  std::string line, section;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!t.count(section)) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(where + "key '" + key + "' outside a section");
    const auto& keys = t.at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError(where + "unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(section + "." + key).second) throw ConfigError(where + "duplicate key " + section + "." + key);
    try {
      it->second.set(c, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + section + "." + key + ": " + e.what());
    }
  }
  try {
    if (c.model.nonlinearity.kind == NonlinearityKind::saturable)
      c.model.nonlinearity = saturable_nonlinearity(c.model.nonlinearity.q, c.model.nonlinearity.gamma);
    else if (c.model.nonlinearity.kind == NonlinearityKind::power_series)
      c.model.nonlinearity = power_series_nonlinearity(c.model.nonlinearity.coeffs);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[model] ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const std::exception&) {
    throw ConfigError("cannot read config " + path.string());
  }
  return parse_config(text);
}

std::string to_config_text(const ExperimentConfig& c) {
  std::string s;
  for (const auto& [section, keys] : table()) {
    s += "[" + section + "]\n";
    for (const auto& [key, f] : keys) {
      if (key == "coefficients" && c.model.nonlinearity.coeffs.empty()) continue;
      s += key + " = " + f.get(c) + "\n";
    }
    s += "\n";
  }
  return s;
}

}  // namespace solitonlab
