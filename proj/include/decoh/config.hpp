#pragma once

// Experiment configuration: a JSON document resolved into typed parameters.
// Unknown keys are rejected so that typos fail loudly instead of silently
// falling back to defaults.

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "decoh/analysis.hpp"
#include "decoh/evolution.hpp"
#include "decoh/models.hpp"
#include "decoh/pointer.hpp"

namespace decoh {

enum class ExperimentKind { measurement_run, regime_sweep, sieve, pointer_check };

std::string to_string(ExperimentKind k);
std::string to_string(EvolutionPath p);
std::string to_string(PointerAxis a);

struct UniformCouplings {
  double lo = 0.5;
  double hi = 1.5;
  std::optional<std::uint64_t> seed;  // falls back to the experiment seed
};

struct SweepSpec {
  std::string param;  // lambda | delta | n_env
  std::vector<double> values;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::measurement_run;
  std::uint64_t seed = 0;

  std::vector<cplx> coefficients{cplx(1.0 / std::numbers::sqrt2), cplx(1.0 / std::numbers::sqrt2)};
  std::size_t system_dim = 2;
  std::size_t n_env = 1;
  std::optional<std::vector<double>> couplings;  // explicit g_k
  UniformCouplings coupling_draw;                // used when couplings is empty
  std::vector<double> env_energies;              // empty: all zero
  double pointer_energy = 0.0;
  PointerAxis pointer_axis = PointerAxis::z;
  double coupling_scale = 1.0;
  std::optional<std::vector<BlochAngles>> env_state;  // empty: uniform

  double t_start = 0.0;
  double t_end = 10.0;
  std::size_t n_steps = 2000;
  EvolutionPath path = EvolutionPath::automatic;

  double decoherence_threshold = 0.01;
  double convergence_fraction = kDefaultConvergenceFraction;
  double convergence_tol = kDefaultConvergenceTol;
  RegimeThresholds regime;

  bool sieve_enabled = true;
  std::size_t sieve_grid_points = kDefaultSieveGridPoints;
  std::optional<double> t_probe;
  std::size_t probe_samples = kDefaultProbeSamples;

  double context_tol = kDefaultContextTol;
  BlochAngles pointer_observable{0.0, 0.0};  // P_M = n.sigma for pointer_check

  std::optional<SweepSpec> sweep;
  std::filesystem::path output_dir = "out";

  // Couplings, energies and environment state with all defaults and seeded
  // draws filled in.
  SpinBathParams bath() const;
  PureState env0() const;
  MeasurementModel measurement() const;
  TimeGrid grid() const;

  // Throws ConfigError on any broken invariant.
  void validate() const;
  // Fully resolved configuration; parse_config(echo()) reproduces the run.
  nlohmann::json echo() const;
};

// Throws ConfigError on malformed documents.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

// Returns a copy with one sweepable scalar replaced.
ExperimentConfig with_parameter(const ExperimentConfig& cfg, const std::string& param, double value);

}  // namespace decoh
