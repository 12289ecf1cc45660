#pragma once

// Config-driven experiments. Every run writes summary.json (config echo plus
// results, byte-stable for a fixed config) and timing.json (wall clock);
// measurement runs add series.csv, sweeps add sweep.csv and one
// subdirectory per value.

#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "decoh/config.hpp"

namespace decoh {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitModelViolation = 3,
  kExitNumericalInvariant = 4,
};

int exit_code_for(std::exception_ptr error);

// Runs cfg.kind into out_dir and returns the summary that was written.
// regime_sweep delegates to run_sweep with cfg.sweep.
nlohmann::json run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

struct SweepRow {
  double value = 0.0;
  int exit_code = kExitOk;
  std::string status;
  nlohmann::json summary;  // null when the value failed
};

// One sieve-style run per value (or a measurement run when cfg.kind is
// measurement_run), then sweep.csv. Failed values keep their row.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::string& param, const std::vector<double>& values,
                                const std::filesystem::path& out_dir);

// First nonzero exit code among the rows, 0 when every value succeeded.
int sweep_exit_code(const std::vector<SweepRow>& rows);

// The result blocks of a summary. measurement_summary also writes the time
// series when given a path.
nlohmann::json measurement_summary(const ExperimentConfig& cfg, const std::filesystem::path* series_csv);
nlohmann::json sieve_summary(const ExperimentConfig& cfg);
nlohmann::json pointer_check_summary(const ExperimentConfig& cfg);

}  // namespace decoh
