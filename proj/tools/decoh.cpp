// decoh: run decoherence experiments described by JSON configs.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "decoh/config.hpp"
#include "decoh/errors.hpp"
#include "decoh/runner.hpp"

namespace {

struct Overrides {
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::string out;
};

decoh::ExperimentConfig load(const std::string& path, const Overrides& o) {
  decoh::ExperimentConfig cfg = decoh::load_config(path);
  if (o.tol) cfg.context_tol = *o.tol;
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.coupling_draw.seed.reset();
  }
  if (!o.out.empty()) cfg.output_dir = o.out;
  cfg.validate();
  return cfg;
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw decoh::ConfigError("--values: cannot parse '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) {
      throw decoh::ConfigError("--values: cannot parse '" + item + "'");
    }
    values.push_back(v);
  }
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decoherence and preferred-basis experiments"};
  app.set_version_flag("--version", decoh::kToolVersion);
  app.require_subcommand(1);

  Overrides o;
  app.add_option("--tol", o.tol, "Relative tolerance for preferred-context checks");
  app.add_option("--seed", o.seed, "Seed for coupling draws (overrides the config)");

  std::string config;
  auto* run = app.add_subcommand("run", "Run the experiment a config describes");
  run->add_option("config", config, "Config file")->required();
  run->add_option("--out", o.out, "Output directory");

  std::string param, values;
  auto* sweep = app.add_subcommand("sweep", "Repeat a run over values of one parameter");
  sweep->add_option("config", config, "Config file")->required();
  sweep->add_option("--param", param, "lambda, delta or n_env")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--out", o.out, "Output directory");

  auto* sieve = app.add_subcommand("sieve", "Rank candidate pointer bases");
  sieve->add_option("config", config, "Config file")->required();
  sieve->add_option("--out", o.out, "Output directory");

  auto* check = app.add_subcommand("check-pointer", "Stability and preferred-context test of a pointer");
  check->add_option("config", config, "Config file")->required();
  check->add_option("--out", o.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : decoh::kExitConfig;
  }

  try {
    decoh::ExperimentConfig cfg = load(config, o);
    if (*sweep) {
      const auto rows = decoh::run_sweep(cfg, param, parse_values(values), cfg.output_dir);
      const int code = decoh::sweep_exit_code(rows);
      std::cout << "sweep: " << rows.size() << " values -> " << (cfg.output_dir / "sweep.csv").string() << "\n";
      return code;
    }
    if (*sieve) cfg.kind = decoh::ExperimentKind::sieve;
    if (*check) cfg.kind = decoh::ExperimentKind::pointer_check;
    const auto summary = decoh::run_experiment(cfg, cfg.output_dir);
    std::cout << decoh::to_string(cfg.kind) << ": results in " << cfg.output_dir.string() << "\n";
    if (summary.contains("exit_code")) return summary["exit_code"].get<int>();
    return decoh::kExitOk;
  } catch (...) {
    const int code = decoh::exit_code_for(std::current_exception());
    try {
      throw;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
    }
    return code;
  }
}
