#include "decoh/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "decoh/errors.hpp"
#include "decoh/random.hpp"

namespace decoh {

using nlohmann::json;

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::measurement_run: return "measurement_run";
    case ExperimentKind::regime_sweep: return "regime_sweep";
    case ExperimentKind::sieve: return "sieve";
    case ExperimentKind::pointer_check: return "pointer_check";
  }
  return "unknown";
}

std::string to_string(EvolutionPath p) {
  switch (p) {
    case EvolutionPath::dense: return "dense";
    case EvolutionPath::dephasing_fast: return "dephasing_fast";
    case EvolutionPath::automatic: return "automatic";
  }
  return "unknown";
}

std::string to_string(PointerAxis a) { return a == PointerAxis::z ? "z" : "x"; }

namespace {

void only_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.contains(key)) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
}

template <class T>
T get(const json& obj, const char* key, const char* where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(where) + "." + key + ": " + e.what());
  }
}

template <class T>
void read(const json& obj, const char* key, const char* where, T& out) {
  if (obj.contains(key)) out = get<T>(obj, key, where);
}

cplx parse_complex(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError("model.coefficients: entries must be numbers or [re, im] pairs");
}

template <class E>
E parse_enum(const json& obj, const char* key, const char* where, std::initializer_list<std::pair<const char*, E>> table,
             E fallback) {
  if (!obj.contains(key)) return fallback;
  const auto name = get<std::string>(obj, key, where);
  for (const auto& [label, value] : table)
    if (name == label) return value;
  throw ConfigError(std::string(where) + "." + key + ": unknown value '" + name + "'");
}

void parse_model(const json& m, ExperimentConfig& cfg) {
  only_keys(m, "model",
            {"coefficients", "system_dim", "n_env", "couplings", "env_energies", "pointer_energy", "pointer_axis", "lambda",
             "env_state"});
  if (m.contains("coefficients")) {
    if (!m["coefficients"].is_array()) throw ConfigError("model.coefficients: expected a list");
    cfg.coefficients.clear();
    for (const auto& c : m["coefficients"]) cfg.coefficients.push_back(parse_complex(c));
  }
  read(m, "system_dim", "model", cfg.system_dim);
  read(m, "n_env", "model", cfg.n_env);
  if (m.contains("couplings")) {
    const json& g = m["couplings"];
    if (g.is_array()) {
      cfg.couplings = get<std::vector<double>>(m, "couplings", "model");
    } else {
      only_keys(g, "model.couplings", {"distribution", "range", "seed"});
      if (get<std::string>(g, "distribution", "model.couplings") != "uniform") {
        throw ConfigError("model.couplings.distribution: only 'uniform' is supported");
      }
      const auto range = get<std::vector<double>>(g, "range", "model.couplings");
      if (range.size() != 2) throw ConfigError("model.couplings.range: expected [lo, hi]");
      cfg.coupling_draw.lo = range[0];
      cfg.coupling_draw.hi = range[1];
      if (g.contains("seed")) cfg.coupling_draw.seed = get<std::uint64_t>(g, "seed", "model.couplings");
    }
  }
  read(m, "env_energies", "model", cfg.env_energies);
  read(m, "pointer_energy", "model", cfg.pointer_energy);
  cfg.pointer_axis = parse_enum(m, "pointer_axis", "model", {{"z", PointerAxis::z}, {"x", PointerAxis::x}}, cfg.pointer_axis);
  read(m, "lambda", "model", cfg.coupling_scale);
  if (m.contains("env_state")) {
    const json& e = m["env_state"];
    if (e.is_string()) {
      if (e.get<std::string>() != "uniform") throw ConfigError("model.env_state: expected 'uniform' or a list of [theta, phi]");
      cfg.env_state.reset();
    } else {
      std::vector<BlochAngles> spins;
      for (const auto& a : get<std::vector<std::vector<double>>>(m, "env_state", "model")) {
        if (a.size() != 2) throw ConfigError("model.env_state: entries must be [theta, phi]");
        spins.push_back({a[0], a[1]});
      }
      cfg.env_state = std::move(spins);
    }
  }
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  only_keys(doc, "config",
            {"experiment", "seed", "model", "grid", "evolution", "analysis", "regime", "sieve", "pointer", "tolerances",
             "sweep", "output_dir"});
  ExperimentConfig cfg;
  cfg.kind = parse_enum(doc, "experiment", "config",
                        {{"measurement_run", ExperimentKind::measurement_run},
                         {"regime_sweep", ExperimentKind::regime_sweep},
                         {"sieve", ExperimentKind::sieve},
                         {"pointer_check", ExperimentKind::pointer_check}},
                        cfg.kind);
  read(doc, "seed", "config", cfg.seed);
  if (doc.contains("model")) parse_model(doc["model"], cfg);
  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    only_keys(g, "grid", {"t_start", "t_end", "n_steps"});
    read(g, "t_start", "grid", cfg.t_start);
    read(g, "t_end", "grid", cfg.t_end);
    read(g, "n_steps", "grid", cfg.n_steps);
  }
  if (doc.contains("evolution")) {
    const json& e = doc["evolution"];
    only_keys(e, "evolution", {"path"});
    cfg.path = parse_enum(e, "path", "evolution",
                          {{"dense", EvolutionPath::dense},
                           {"dephasing_fast", EvolutionPath::dephasing_fast},
                           {"automatic", EvolutionPath::automatic}},
                          cfg.path);
  }
  if (doc.contains("analysis")) {
    const json& a = doc["analysis"];
    only_keys(a, "analysis", {"decoherence_threshold", "convergence_fraction", "convergence_tol"});
    read(a, "decoherence_threshold", "analysis", cfg.decoherence_threshold);
    read(a, "convergence_fraction", "analysis", cfg.convergence_fraction);
    read(a, "convergence_tol", "analysis", cfg.convergence_tol);
  }
  if (doc.contains("regime")) {
    const json& r = doc["regime"];
    only_keys(r, "regime", {"low", "high"});
    read(r, "low", "regime", cfg.regime.low);
    read(r, "high", "regime", cfg.regime.high);
  }
  if (doc.contains("sieve")) {
    const json& s = doc["sieve"];
    only_keys(s, "sieve", {"enabled", "grid_points", "t_probe", "samples"});
    read(s, "enabled", "sieve", cfg.sieve_enabled);
    read(s, "grid_points", "sieve", cfg.sieve_grid_points);
    if (s.contains("t_probe") && !s["t_probe"].is_null()) cfg.t_probe = get<double>(s, "t_probe", "sieve");
    read(s, "samples", "sieve", cfg.probe_samples);
  }
  if (doc.contains("pointer")) {
    const json& p = doc["pointer"];
    only_keys(p, "pointer", {"theta", "phi"});
    read(p, "theta", "pointer", cfg.pointer_observable.theta);
    read(p, "phi", "pointer", cfg.pointer_observable.phi);
  }
  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    only_keys(t, "tolerances", {"context"});
    read(t, "context", "tolerances", cfg.context_tol);
  }
  if (doc.contains("sweep")) {
    const json& s = doc["sweep"];
    only_keys(s, "sweep", {"param", "values"});
    cfg.sweep = SweepSpec{get<std::string>(s, "param", "sweep"), get<std::vector<double>>(s, "values", "sweep")};
  }
  if (doc.contains("output_dir")) cfg.output_dir = get<std::string>(doc, "output_dir", "config");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

SpinBathParams ExperimentConfig::bath() const {
  SpinBathParams p;
  p.n_env = n_env;
  if (couplings) {
    p.couplings = *couplings;
  } else {
    PortableRng rng(coupling_draw.seed.value_or(seed));
    p.couplings.reserve(n_env);
    for (std::size_t k = 0; k < n_env; ++k) p.couplings.push_back(rng.uniform(coupling_draw.lo, coupling_draw.hi));
  }
  p.env_energies = env_energies.empty() ? std::vector<double>(n_env, 0.0) : env_energies;
  p.pointer_energy = pointer_energy;
  p.pointer_axis = pointer_axis;
  p.coupling_scale = coupling_scale;
  return p;
}

PureState ExperimentConfig::env0() const { return env_state ? env_product_state(*env_state) : uniform_env_state(n_env); }

MeasurementModel ExperimentConfig::measurement() const {
  MeasurementModel m;
  m.coefficients = coefficients;
  m.system_dim = system_dim;
  m.pointer_dim = 2;
  m.env_dims = Dims(n_env, 2);
  m.env0 = env0();
  return m;
}

TimeGrid ExperimentConfig::grid() const { return TimeGrid::make(t_start, t_end, n_steps); }

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(n_env >= 1, "model.n_env must be at least 1");
  require(!couplings || couplings->size() == n_env, "model.couplings must list n_env values");
  require(couplings || coupling_draw.lo <= coupling_draw.hi, "model.couplings.range must satisfy lo <= hi");
  require(env_energies.empty() || env_energies.size() == n_env, "model.env_energies must list n_env values");
  require(!env_state || env_state->size() == n_env, "model.env_state must list n_env spins");
  require(std::isfinite(pointer_energy) && std::isfinite(coupling_scale), "model energies must be finite");
  require(t_end > t_start && n_steps >= 1, "grid must satisfy t_end > t_start and n_steps >= 1");
  require(decoherence_threshold > 0.0 && decoherence_threshold <= 1.0, "analysis.decoherence_threshold must lie in (0, 1]");
  require(convergence_fraction > 0.0 && convergence_fraction <= 1.0, "analysis.convergence_fraction must lie in (0, 1]");
  require(convergence_tol > 0.0, "analysis.convergence_tol must be positive");
  require(regime.low > 0.0 && regime.low < regime.high, "regime thresholds must satisfy 0 < low < high");
  require(sieve_grid_points >= 1 && probe_samples >= 1, "sieve.grid_points and sieve.samples must be positive");
  require(!t_probe || *t_probe > 0.0, "sieve.t_probe must be positive");
  require(context_tol > 0.0, "tolerances.context must be positive");
  if (sweep) {
    require(sweep->param == "lambda" || sweep->param == "delta" || sweep->param == "n_env",
            "sweep.param must be lambda, delta or n_env");
    require(!sweep->values.empty(), "sweep.values must not be empty");
  }
  try {
    bath().validate();
    measurement().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

json ExperimentConfig::echo() const {
  const SpinBathParams p = bath();
  json coeffs = json::array();
  for (const cplx& c : coefficients) coeffs.push_back({c.real(), c.imag()});
  json model = {{"coefficients", coeffs},
                {"system_dim", system_dim},
                {"n_env", n_env},
                {"couplings", p.couplings},
                {"env_energies", p.env_energies},
                {"pointer_energy", pointer_energy},
                {"pointer_axis", to_string(pointer_axis)},
                {"lambda", coupling_scale}};
  if (env_state) {
    json spins = json::array();
    for (const BlochAngles& a : *env_state) spins.push_back({a.theta, a.phi});
    model["env_state"] = spins;
  } else {
    model["env_state"] = "uniform";
  }
  json doc = {
      {"experiment", to_string(kind)},
      {"seed", seed},
      {"model", model},
      {"grid", {{"t_start", t_start}, {"t_end", t_end}, {"n_steps", n_steps}}},
      {"evolution", {{"path", to_string(path)}}},
      {"analysis",
       {{"decoherence_threshold", decoherence_threshold},
        {"convergence_fraction", convergence_fraction},
        {"convergence_tol", convergence_tol}}},
      {"regime", {{"low", regime.low}, {"high", regime.high}}},
      {"sieve",
       {{"enabled", sieve_enabled},
        {"grid_points", sieve_grid_points},
        {"t_probe", t_probe ? finite_or_null(*t_probe) : json(nullptr)},
        {"samples", probe_samples}}},
      {"pointer", {{"theta", pointer_observable.theta}, {"phi", pointer_observable.phi}}},
      {"tolerances", {{"context", context_tol}}},
      {"output_dir", output_dir.string()},
  };
  if (sweep) doc["sweep"] = {{"param", sweep->param}, {"values", sweep->values}};
  return doc;
}

ExperimentConfig with_parameter(const ExperimentConfig& cfg, const std::string& param, double value) {
  ExperimentConfig out = cfg;
  if (param == "lambda") {
    out.coupling_scale = value;
  } else if (param == "delta") {
    out.pointer_energy = value;
  } else if (param == "n_env") {
    if (!(value >= 1.0) || value != std::floor(value)) throw ConfigError("sweep: n_env values must be positive integers");
    out.n_env = static_cast<std::size_t>(value);
    // Per-spin lists cannot follow a size change; the seeded draw can.
    if (out.couplings) throw ConfigError("sweep: n_env cannot be swept with an explicit coupling list");
    if (!out.env_energies.empty()) out.env_energies.assign(out.n_env, out.env_energies.front());
    if (out.env_state) out.env_state->assign(out.n_env, out.env_state->front());
  } else {
    throw ConfigError("sweep: unknown parameter '" + param + "'");
  }
  out.validate();
  return out;
}

}  // namespace decoh
