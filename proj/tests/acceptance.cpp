// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "decoh/analysis.hpp"
#include "decoh/pointer.hpp"
#include "decoh/runner.hpp"
#include "oracles.hpp"

using namespace decoh;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Worst closed-system invariants seen across every run of the suite.
struct InvariantLedger {
  double norm = 0.0;
  double energy = 0.0;
  double trace = 0.0;
  double hermiticity = 0.0;
  double population = 0.0;  // only pure-dephasing runs contribute
  int runs = 0;

  void record(const StateTrajectory& traj, bool pure_dephasing) {
    const TrajectoryDrift d = trajectory_drift(traj);
    norm = std::max(norm, d.norm);
    energy = std::max(energy, d.energy);
    const std::vector<std::size_t> keep{0, 1};
    Vector first;
    for (std::size_t j = 0; j < traj.size(); ++j) {
      const DensityOperator rho = partial_trace(traj.state(j), keep);
      trace = std::max(trace, std::abs(rho.trace() - 1.0));
      hermiticity = std::max(hermiticity, rho.op().hermiticity_error());
      if (pure_dephasing) {
        const Vector diag = rho.matrix().diagonal();
        if (j == 0) first = diag;
        population = std::max(population, (diag - first).cwiseAbs().maxCoeff());
      }
    }
    ++runs;
  }
};

InvariantLedger ledger;

SpinBathParams uniform_bath(std::size_t n, std::uint64_t seed, double lambda = 1.0) {
  PortableRng rng(seed);
  SpinBathParams p;
  p.n_env = n;
  for (std::size_t k = 0; k < n; ++k) p.couplings.push_back(rng.uniform(0.5, 1.5));
  p.env_energies.assign(n, 0.0);
  p.coupling_scale = lambda;
  return p;
}

MeasurementModel measurement(std::size_t n_env, std::vector<cplx> c) {
  MeasurementModel m;
  m.coefficients = std::move(c);
  m.env_dims = Dims(n_env, 2);
  m.env0 = uniform_env_state(n_env);
  return m;
}

const double kHalf = 1.0 / std::sqrt(2.0);

// ------------------------------------------------------------------------

Outcome spin_bath_oracle() {
  const Stopwatch clock;
  const SpinBathParams p = uniform_bath(12, kSeed);
  const MeasurementModel m = measurement(12, {kHalf, kHalf});
  const TimeGrid grid = TimeGrid::make(0.0, 4.0, 1999);
  const StateTrajectory traj =
      evolve(with_leading_identity({2}, spin_bath_dephasing(p)), build_correlated_state(m), grid, EvolutionPath::dephasing_fast);
  const DecoherenceSeries s = decoherence_factors(branch_states(traj, m.coefficients));
  double err = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j)
    err = std::max(err, std::abs(std::abs(s.r[j](0, 1)) - std::abs(oracle::cos_product(p.couplings, 1.0, grid.at(j)))));
  const double runtime = clock.seconds();
  ledger.record(traj, true);
  return {err <= 1e-10 && runtime <= 10.0 && s.size() == 2000,
          fmt("n_env=12, %zu points, max|err|=%.3g (<=1e-10), runtime=%.2fs (<=10s)", s.size(), err, runtime)};
}

Outcome cross_path() {
  const Stopwatch clock;
  const SpinBathParams p = uniform_bath(8, kSeed + 1);
  const MeasurementModel m = measurement(8, {kHalf, kHalf});
  const PureState psi0 = build_correlated_state(m);
  const DiagonalHamiltonian d = with_leading_identity({2}, spin_bath_dephasing(p));
  const TimeGrid grid = TimeGrid::make(0.0, 5.0, 500);
  const StateTrajectory fast = evolve(d, psi0, grid, EvolutionPath::dephasing_fast);
  const StateTrajectory dense = evolve(tensor(Operator::identity({2}), build_spin_bath(p).total()), psi0, grid, EvolutionPath::dense);
  double worst = 1.0;
  for (std::size_t j = 0; j < grid.size(); ++j)
    worst = std::min(worst, std::norm(fast.state(j).amplitudes().dot(dense.state(j).amplitudes())));
  const double runtime = clock.seconds();
  ledger.record(fast, true);
  ledger.record(dense, true);
  return {worst >= 1.0 - 1e-10 && runtime <= 60.0 && dense.path() == EvolutionPath::dense,
          fmt("n_env=8, %zu points, min fidelity=1-%.3g (>=1-1e-10), runtime=%.2fs (<=60s)", grid.size(), 1.0 - worst,
              runtime)};
}

Outcome reduced_expectation_identity() {
  oracle::Random rng(kSeed + 4);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t ds = 2 + rng.index(3), dm = 2 + rng.index(3), de = 2 + rng.index(15);
    const Dims dims{ds, dm, de};
    const auto n = static_cast<Eigen::Index>(ds * dm * de);
    const PureState psi(rng.state(n), dims);
    // Relevant observables act on S alone or on S and M together.
    const bool with_pointer = trial % 2 == 1;
    const auto dk = static_cast<Eigen::Index>(with_pointer ? ds * dm : ds);
    const Matrix o = rng.hermitian(dk);
    const Matrix lifted = oracle::kron(o, Matrix::Identity(n / dk, n / dk));
    const double full = expectation(Operator(lifted, dims), psi);
    const std::vector<std::size_t> keep = with_pointer ? std::vector<std::size_t>{0, 1} : std::vector<std::size_t>{0};
    const Dims kept = with_pointer ? Dims{ds, dm} : Dims{ds};
    const double reduced = expectation(Operator(o, kept), partial_trace(psi, keep));
    worst = std::max(worst, std::abs(full - reduced));
  }
  return {worst <= 1e-12, fmt("100 random pairs, dims up to (4,4,16), max|diff|=%.3g (<=1e-12)", worst)};
}

Outcome collapse_comparison() {
  const SpinBathParams p = uniform_bath(12, kSeed);
  const MeasurementModel m = measurement(12, {kHalf, kHalf});
  const TimeGrid grid = TimeGrid::make(0.0, 4.0, 2000);
  const StateTrajectory traj = evolve(with_leading_identity({2}, spin_bath_dephasing(p)), build_correlated_state(m), grid);
  const DecoherenceSeries s = decoherence_factors(branch_states(traj, m.coefficients));
  ledger.record(traj, true);
  const auto t_d = decoherence_time(s, 0.01);
  if (!t_d) return {false, "max|r_ij| never reached 0.01 on the grid"};
  std::size_t j = 0;
  while (grid.at(j) != *t_d) ++j;
  const std::vector<std::size_t> keep{0, 1};
  const double dist = compare_to_collapse(partial_trace(traj.state(j), keep), build_collapsed_mixture(m));
  return {dist <= 0.01, fmt("n_env=12, t_D=%.4g, trace distance to the collapsed mixture=%.3g (<=0.01)", *t_d, dist)};
}

Outcome context_oracle() {
  oracle::Random rng(kSeed + 6);
  int agree = 0, total = 0, members = 0;
  auto compare = [&](const Matrix& p, const Matrix& h) {
    const bool expected = oracle::is_function_of(p, h);
    const bool got = check_preferred_context(Operator(p, {4}), Operator(h, {4})).member();
    agree += expected == got;
    members += expected;
    ++total;
  };
  for (int i = 0; i < 200; ++i) {
    const oracle::ContextPair c = oracle::random_context_pair(rng);
    compare(c.p, c.h);
  }
  // Constructed cases on the degenerate spectrum {-1, -1, 2, 3}: block-scalar
  // functions are members, operators splitting the doublet are not.
  for (int i = 0; i < 20; ++i) {
    const Matrix u = rng.unitary(4);
    Eigen::VectorXd h_diag(4), p_diag(4);
    h_diag << -1, -1, 2, 3;
    const double f = rng.uniform(-1, 1);
    p_diag << f, i % 2 == 0 ? f : f + rng.uniform(0.5, 1.0), rng.uniform(-1, 1), rng.uniform(-1, 1);
    compare(u * p_diag.cast<cplx>().asDiagonal() * u.adjoint(), u * h_diag.cast<cplx>().asDiagonal() * u.adjoint());
  }
  const ContextVerdict identity_case = check_preferred_context(pauli::z(), pauli::identity());
  const bool special = identity_case.commutes && !identity_case.member();
  return {agree == total && special,
          fmt("%d/%d verdicts agree with the reference (%d members), H=I/P=sigma_z non-member: %s", agree, total, members,
              special ? "yes" : "no")};
}

Outcome stability_reduction() {
  oracle::Random rng(kSeed + 7);
  double worst_env = 0.0, worst_gap = 0.0;
  bool ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dm = 2 + rng.index(2), de = 2 + rng.index(5);
    const Operator hm(rng.hermitian(static_cast<Eigen::Index>(dm)), {dm});
    const Operator he(rng.hermitian(static_cast<Eigen::Index>(de)), {de});
    const Operator hint(rng.hermitian(static_cast<Eigen::Index>(dm * de)), {dm, de});
    const CompositeHamiltonian ch = CompositeHamiltonian::assemble(hm, he, hint, rng.uniform(0.01, 10.0));
    const PointerObservable pm = PointerObservable::from_operator(Operator(rng.hermitian(static_cast<Eigen::Index>(dm)), {dm}));
    const StabilityNorms s = pointer_stability(lift_pointer(pm, {de}), ch);
    worst_env = std::max(worst_env, s.env);
    const double gap = std::abs(s.full - s.reduced) / s.scale;
    worst_gap = std::max(worst_gap, gap);
    ok = ok && s.env <= 1e-12 && gap <= 1e-10;
  }
  return {ok, fmt("50 random cases, max env norm=%.3g (<=1e-12), max |full-reduced|/scale=%.3g (<=1e-10)", worst_env, worst_gap)};
}

Outcome three_regimes() {
  const Stopwatch clock;
  const std::vector<double> lambdas{0.01, 0.1, 1.0, 10.0, 100.0};
  nlohmann::json doc = {{"experiment", "sieve"},
                        {"seed", kSeed},
                        {"model",
                         {{"n_env", 6},
                          {"couplings", {{"distribution", "uniform"}, {"range", {0.5, 1.5}}}},
                          {"pointer_energy", 1.0},
                          {"pointer_axis", "x"}}},
                        {"sieve", {{"grid_points", 200}}}};
  const ExperimentConfig base = parse_config(doc);
  std::vector<double> from_z;
  std::string trail;
  double at_small = 90.0, at_large = 90.0;
  for (double lambda : lambdas) {
    const nlohmann::json s = sieve_summary(with_parameter(base, "lambda", lambda));
    const auto& w = s["sieve"]["winner"];
    from_z.push_back(w["from_interaction_axis_deg"].get<double>());
    if (lambda == lambdas.front()) at_small = w["from_self_axis_deg"].get<double>();
    if (lambda == lambdas.back()) at_large = w["from_interaction_axis_deg"].get<double>();
    trail += fmt("%s%.3g", trail.empty() ? "" : ", ", from_z.back());
  }
  bool monotone = true;
  for (std::size_t i = 1; i < from_z.size(); ++i) monotone = monotone && from_z[i] <= from_z[i - 1];
  const double runtime = clock.seconds();
  return {at_small <= 5.0 && at_large <= 5.0 && monotone && runtime <= 300.0,
          fmt("lambda=0.01: %.3g deg from sigma_x, lambda=100: %.3g deg from sigma_z (<=5), angle from z [%s] monotone: %s, "
              "runtime=%.2fs (<=300s)",
              at_small, at_large, trail.c_str(), monotone ? "yes" : "no", runtime)};
}

Outcome population_invariance() {
  // Extra pure-dephasing runs: complex weights, random environment spins,
  // environment self-energies and a z-axis pointer field.
  oracle::Random rng(kSeed + 9);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t n = 3 + rng.index(6);
    SpinBathParams p = uniform_bath(n, kSeed + 100 + static_cast<std::uint64_t>(trial), rng.uniform(0.2, 3.0));
    for (double& w : p.env_energies) w = rng.uniform(-2, 2);
    p.pointer_energy = rng.uniform(-1, 1);
    const Vector c = rng.state(2);
    MeasurementModel m = measurement(n, {c(0), c(1)});
    std::vector<BlochAngles> spins;
    for (std::size_t k = 0; k < n; ++k) spins.push_back({rng.uniform(0, std::numbers::pi), rng.uniform(0, 6.28)});
    m.env0 = env_product_state(spins);
    const StateTrajectory traj = evolve(with_leading_identity({m.system_dim}, spin_bath_dephasing(p)), build_correlated_state(m),
                                        TimeGrid::make(0.0, 6.0, 300));
    ledger.record(traj, true);
  }
  return {ledger.population <= 1e-10, fmt("max population change=%.3g (<=1e-10) over %d pure-dephasing runs",
                                          ledger.population, ledger.runs)};
}

Outcome closed_system_invariants() {
  const bool ok = ledger.norm <= 1e-10 && ledger.energy <= 1e-9 && ledger.trace <= 1e-10 && ledger.hermiticity <= 1e-12;
  return {ok, fmt("%d runs: norm drift=%.3g (<=1e-10), energy drift=%.3g (<=1e-9), reduced trace dev=%.3g (<=1e-10), "
                  "Hermiticity=%.3g (<=1e-12)",
                  ledger.runs, ledger.norm, ledger.energy, ledger.trace, ledger.hermiticity)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "decoh_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const nlohmann::json doc = {{"experiment", "measurement_run"},
                              {"seed", kSeed},
                              {"model",
                               {{"n_env", 12}, {"couplings", {{"distribution", "uniform"}, {"range", {0.5, 1.5}}}}}},
                              {"grid", {{"t_end", 4.0}, {"n_steps", 2000}}}};
  std::ofstream(dir / "config.json") << doc.dump(2);
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string(DECOH_CLI_PATH) + " run " + (dir / "config.json").string() + " --out " +
                            (dir / run).string() + " > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "CLI run failed"};
  }
  const bool csv = slurp(dir / "a" / "series.csv") == slurp(dir / "b" / "series.csv");
  const bool json = slurp(dir / "a" / "summary.json") == slurp(dir / "b" / "summary.json");
  const bool nonempty = !slurp(dir / "a" / "series.csv").empty();
  return {csv && json && nonempty,
          fmt("two CLI runs: series.csv identical: %s, summary.json identical: %s", csv ? "yes" : "no", json ? "yes" : "no")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  // Criterion 3 and 9 summarize invariants gathered by the runs before them.
  const std::vector<Criterion> order{
      {1, "spin-bath analytic oracle", spin_bath_oracle},
      {2, "dense vs fast path", cross_path},
      {4, "reduced-state expectation identity", reduced_expectation_identity},
      {5, "collapse comparison at decoherence time", collapse_comparison},
      {6, "preferred-context rule vs reference", context_oracle},
      {7, "stability reduction identity", stability_reduction},
      {8, "three-regime sieve sweep", three_regimes},
      {9, "dephasing preserves populations", population_invariance},
      {3, "closed-system invariants", closed_system_invariants},
      {10, "CLI determinism", determinism},
  };
  std::vector<std::pair<int, std::string>> lines;
  int failures = 0;
  for (const Criterion& c : order) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    lines.emplace_back(c.id, fmt("[%s] %2d %s: ", o.pass ? "PASS" : "FAIL", c.id, c.name) + o.detail);
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& [_, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%d/%zu criteria passed\n", static_cast<int>(lines.size()) - failures, lines.size());
  return failures == 0 ? 0 : 1;
}
