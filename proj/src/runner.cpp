#include "decoh/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "decoh/analysis.hpp"
#include "decoh/errors.hpp"
#include "decoh/pointer.hpp"

namespace decoh {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json optional_time(const std::optional<double>& t) { return t ? json(*t) : json(nullptr); }

double rad_to_deg(double r) { return r * 180.0 / std::numbers::pi; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

json regime_block(const SpinBathParams& bath, const RegimeThresholds& thresholds) {
  const SpinBathNorms n = spin_bath_norms(bath);
  if (n.pointer_self == 0.0 && n.interaction == 0.0) return nullptr;
  const RegimeReport r = classify_regime_from_norms(n.pointer_self, n.interaction, thresholds);
  return {{"regime", to_string(r.regime)},
          {"ratio", finite_or_null(r.ratio)},
          {"self_norm", r.self_norm},
          {"interaction_norm", r.interaction_norm}};
}

Generator pointer_env_generator(const SpinBathParams& bath) {
  if (bath.pure_dephasing()) return spin_bath_dephasing(bath);
  return build_spin_bath(bath).total();
}

json sieve_block(const ExperimentConfig& cfg, const SpinBathParams& bath, const PureState& env0) {
  SieveProbe probe = cfg.t_probe ? SieveProbe{*cfg.t_probe, cfg.probe_samples} : default_sieve_probe(bath, env0);
  probe.samples = cfg.probe_samples;
  const auto candidates = qubit_sieve_candidates(bath.pointer_axis, cfg.sieve_grid_points);
  const SieveResult r = predictability_sieve(pointer_env_generator(bath), candidates, env0, probe);

  const BlochAxis self_axis = bath.pointer_axis == PointerAxis::z ? BlochAxis{0.0, 0.0} : BlochAxis{std::numbers::pi / 2, 0.0};
  const BlochAxis interaction_axis{0.0, 0.0};
  const std::size_t w = r.winner();
  const BlochAxis axis = *r.candidates[w].axis;
  return {{"t_probe", probe.t_probe},
          {"samples", probe.samples},
          {"candidates", candidates.size()},
          {"self_axis_score", r.scores[0]},
          {"interaction_axis_score", r.scores[1]},
          {"winner",
           {{"index", w},
            {"score", r.scores[w]},
            {"theta_deg", rad_to_deg(axis.theta)},
            {"phi_deg", rad_to_deg(axis.phi)},
            {"from_self_axis_deg", axis_separation_deg(axis, self_axis)},
            {"from_interaction_axis_deg", axis_separation_deg(axis, interaction_axis)}}}};
}

void check_reduced(const DensityOperator& rho, double t) {
  if (std::abs(rho.trace() - 1.0) > kDensityTraceTol) {
    throw NumericalInvariantError("reduced state trace drifted at t = " + fmt17(t));
  }
  if (rho.op().hermiticity_error() > kHermitianTol) {
    throw NumericalInvariantError("reduced state lost Hermiticity at t = " + fmt17(t));
  }
}

}  // namespace

int exit_code_for(std::exception_ptr error) {
  try {
    std::rethrow_exception(error);
  } catch (const ConfigError&) {
    return kExitConfig;
  } catch (const std::invalid_argument&) {
    return kExitConfig;
  } catch (const ModelViolationError&) {
    return kExitModelViolation;
  } catch (const NumericalInvariantError&) {
    return kExitNumericalInvariant;
  } catch (...) {
    return kExitFailure;
  }
}

// ------------------------------------------------------------ measurement

json measurement_summary(const ExperimentConfig& cfg, const fs::path* series_csv) {
  const SpinBathParams bath = cfg.bath();
  const MeasurementModel model = cfg.measurement();
  const PureState psi0 = build_correlated_state(model);
  const Dims spectator{cfg.system_dim};

  Generator gen = bath.pure_dephasing() && cfg.path != EvolutionPath::dense
                      ? Generator(with_leading_identity(spectator, spin_bath_dephasing(bath)))
                      : Generator(tensor(Operator::identity(spectator), build_spin_bath(bath).total()));
  const StateTrajectory traj = evolve(gen, psi0, cfg.grid(), cfg.path);

  const TrajectoryDrift drift = trajectory_drift(traj);
  if (drift.norm > kTrajectoryNormTol) throw NumericalInvariantError("state norm drift " + fmt17(drift.norm));
  if (drift.energy > kEnergyDriftTol) throw NumericalInvariantError("energy drift " + fmt17(drift.energy));

  DecoherenceSeries series = decoherence_factors(branch_states(traj, model.coefficients));

  const Dims sm{cfg.system_dim, 2};
  const std::vector<std::size_t> keep{0, 1};
  const Operator sz_m = embed(pauli::z(), 1, sm);
  const Operator sx_m = embed(pauli::x(), 1, sm);
  const bool qubit_system = cfg.system_dim == 2;
  const Operator sxx = qubit_system ? tensor(pauli::x(), pauli::x()) : Operator::zero(sm);
  const auto n = static_cast<Eigen::Index>(product(sm));

  const DensityOperator rho_c = build_collapsed_mixture(model);
  std::vector<DensityOperator> rho;
  rho.reserve(traj.size());
  double population_drift = 0.0;
  for (std::size_t j = 0; j < traj.size(); ++j) {
    rho.push_back(partial_trace(traj.state(j), keep));
    check_reduced(rho.back(), traj.time(j));
    series.purity.push_back(rho.back().purity());
    series.offdiag.push_back(off_diagonality(rho.back(), Matrix(Matrix::Identity(n, n))));
    series.expectations["sigma_z_M"].push_back(expectation(sz_m, rho.back()));
    series.expectations["sigma_x_M"].push_back(expectation(sx_m, rho.back()));
    if (qubit_system) series.expectations["sigma_x_S_sigma_x_M"].push_back(expectation(sxx, rho.back()));
    const auto diff = (rho.back().matrix().diagonal() - rho.front().matrix().diagonal()).cwiseAbs();
    population_drift = std::max(population_drift, diff.maxCoeff());
  }

  if (series_csv) {
    std::string csv = "t";
    const auto& labels = series.labels;
    for (std::size_t a = 0; a < labels.size(); ++a)
      for (std::size_t b = 0; b < labels.size(); ++b)
        if (a != b) csv += ",abs_r_" + std::to_string(labels[a]) + "_" + std::to_string(labels[b]);
    csv += ",purity,offdiag";
    for (const auto& [name, _] : series.expectations) csv += "," + name;
    csv += "\n";
    for (std::size_t j = 0; j < series.size(); ++j) {
      csv += fmt17(series.grid.at(j));
      for (std::size_t a = 0; a < labels.size(); ++a)
        for (std::size_t b = 0; b < labels.size(); ++b)
          if (a != b) csv += "," + fmt17(std::abs(series.r[j](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))));
      csv += "," + fmt17(series.purity[j]) + "," + fmt17(series.offdiag[j]);
      for (const auto& [_, values] : series.expectations) csv += "," + fmt17(values[j]);
      csv += "\n";
    }
    write_text(*series_csv, csv);
  }

  const std::optional<double> t_d = decoherence_time(series, cfg.decoherence_threshold);
  json collapse = {{"final_trace_distance", trace_distance(rho.back(), rho_c)}, {"at_decoherence_time", nullptr}};
  if (t_d) {
    for (std::size_t j = 0; j < series.size(); ++j) {
      if (series.grid.at(j) == *t_d) {
        collapse["at_decoherence_time"] = trace_distance(rho[j], rho_c);
        break;
      }
    }
  }

  const std::size_t window = std::max<std::size_t>(
      1, std::min(series.size(), static_cast<std::size_t>(std::floor(cfg.convergence_fraction * static_cast<double>(series.size())))));
  const Convergence conv = convergence_check(series.offdiag, window, cfg.convergence_tol);

  json out = {{"decoherence_time", optional_time(t_d)},
              {"decoherence_threshold", cfg.decoherence_threshold},
              {"evolution_path", to_string(traj.path())},
              {"collapse_comparison", collapse},
              {"offdiag_convergence", {{"converged", conv.converged}, {"settled", conv.settled}, {"spread", conv.spread}, {"window", window}}},
              {"invariants",
               {{"norm_drift", drift.norm}, {"energy_drift", drift.energy}, {"population_drift", population_drift}}},
              {"regime", regime_block(bath, cfg.regime)}};
  if (cfg.sieve_enabled) out["sieve"] = sieve_block(cfg, bath, cfg.env0());
  return out;
}

// ------------------------------------------------------------------ sieve

json sieve_summary(const ExperimentConfig& cfg) {
  const SpinBathParams bath = cfg.bath();
  const PureState env0 = cfg.env0();
  return {{"regime", regime_block(bath, cfg.regime)},
          {"reference_decoherence_time", optional_time(reference_decoherence_time(bath, env0, cfg.decoherence_threshold))},
          {"decoherence_threshold", cfg.decoherence_threshold},
          {"sieve", sieve_block(cfg, bath, env0)}};
}

// ---------------------------------------------------------- pointer check

json pointer_check_summary(const ExperimentConfig& cfg) {
  const SpinBathParams bath = cfg.bath();
  const CompositeHamiltonian ch = build_spin_bath(bath);
  const BlochAxis n{cfg.pointer_observable.theta, cfg.pointer_observable.phi};
  const auto d = n.direction();
  const Operator p_m = cplx(d[0]) * pauli::x() + cplx(d[1]) * pauli::y() + cplx(d[2]) * pauli::z();
  const PointerObservable lifted = lift_pointer(PointerObservable::from_operator(p_m), ch.env_dims());

  const StabilityNorms s = pointer_stability(lifted, ch);
  const ContextVerdict v = check_preferred_context(lifted.op(), ch.total(), cfg.context_tol);
  json out = {{"pointer",
               {{"outcomes", lifted.outcome_count()}, {"space_dim", lifted.space_dim()}, {"eigenvalues", lifted.eigenvalues()}}},
              {"stability", {{"full", s.full}, {"reduced", s.reduced}, {"env", s.env}, {"scale", s.scale}}},
              {"preferred_context",
               {{"member", v.member()},
                {"commutes", v.commutes},
                {"respects_degeneracy", v.respects_degeneracy},
                {"commutator_norm", v.commutator_norm},
                {"commutator_tolerance", v.commutator_tolerance},
                {"witness", v.witness ? json(*v.witness) : json(nullptr)}}},
              {"regime", regime_block(bath, cfg.regime)}};
  return out;
}

// ----------------------------------------------------------------- driver

nlohmann::json run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
  if (cfg.kind == ExperimentKind::regime_sweep) {
    if (!cfg.sweep) throw ConfigError("regime_sweep needs a sweep section");
    const auto rows = run_sweep(cfg, cfg.sweep->param, cfg.sweep->values, out_dir);
    json summary = {{"tool_version", kToolVersion}, {"rows", rows.size()}, {"exit_code", sweep_exit_code(rows)}};
    return summary;
  }

  fs::create_directories(out_dir);
  const auto start = std::chrono::steady_clock::now();
  json config = cfg.echo();
  config.erase("output_dir");
  json summary = {{"tool_version", kToolVersion}, {"config", config}};
  switch (cfg.kind) {
    case ExperimentKind::measurement_run: {
      const fs::path csv = out_dir / "series.csv";
      summary["results"] = measurement_summary(cfg, &csv);
      break;
    }
    case ExperimentKind::sieve: summary["results"] = sieve_summary(cfg); break;
    case ExperimentKind::pointer_check: summary["results"] = pointer_check_summary(cfg); break;
    case ExperimentKind::regime_sweep: break;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json(out_dir / "summary.json", summary);
  write_json(out_dir / "timing.json", {{"wall_seconds", wall}});
  return summary;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::string& param, const std::vector<double>& values,
                                const fs::path& out_dir) {
  if (values.empty()) throw ConfigError("sweep: empty value list");
  fs::create_directories(out_dir);

  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    SweepRow row;
    row.value = values[i];
    char name[32];
    std::snprintf(name, sizeof name, "value_%03zu", i);
    try {
      ExperimentConfig point = with_parameter(cfg, param, values[i]);
      point.sweep.reset();
      if (point.kind != ExperimentKind::measurement_run) point.kind = ExperimentKind::sieve;
      row.summary = run_experiment(point, out_dir / name);
      row.status = "ok";
    } catch (...) {
      row.exit_code = exit_code_for(std::current_exception());
      row.status = row.exit_code == kExitConfig              ? "config_error"
                   : row.exit_code == kExitModelViolation     ? "model_violation"
                   : row.exit_code == kExitNumericalInvariant ? "numerical_invariant"
                                                              : "error";
    }
    rows.push_back(std::move(row));
  }

  auto field = [](const json& j) -> std::string {
    if (j.is_null()) return "";
    if (j.is_number()) return fmt17(j.get<double>());
    if (j.is_string()) return j.get<std::string>();
    return j.dump();
  };
  std::string csv =
      "value,status,regime,ratio,winner_theta_deg,winner_phi_deg,winner_from_interaction_axis_deg,decoherence_time\n";
  for (const SweepRow& row : rows) {
    csv += fmt17(row.value) + "," + row.status;
    if (row.summary.is_null()) {
      csv += ",,,,,,\n";
      continue;
    }
    const json& r = row.summary["results"];
    const json& regime = r["regime"];
    csv += "," + (regime.is_null() ? std::string() : field(regime["regime"]));
    csv += "," + (regime.is_null() ? std::string() : field(regime["ratio"]));
    if (r.contains("sieve")) {
      const json& w = r["sieve"]["winner"];
      csv += "," + field(w["theta_deg"]) + "," + field(w["phi_deg"]) + "," + field(w["from_interaction_axis_deg"]);
    } else {
      csv += ",,,";
    }
    csv += "," + field(r.contains("decoherence_time") ? r["decoherence_time"] : r["reference_decoherence_time"]);
    csv += "\n";
  }
  write_text(out_dir / "sweep.csv", csv);
  return rows;
}

int sweep_exit_code(const std::vector<SweepRow>& rows) {
  for (const SweepRow& row : rows)
    if (row.exit_code != kExitOk) return row.exit_code;
  return kExitOk;
}

}  // namespace decoh
