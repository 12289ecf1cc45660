#pragma once

// Unitary evolution of a closed system on a time grid (hbar = 1).
//
// A StateTrajectory holds the propagator and the initial state; state(j) is
// evaluated on demand, so a trajectory over a 2^14-dimensional space and
// thousands of grid points costs one vector per access rather than the whole
// history. Grid points are independent of each other.

#include <cstddef>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "decoh/linalg.hpp"

namespace decoh {

// Largest state dimension accepted by the diagonal fast path.
inline constexpr std::size_t kFastDimCap = std::size_t{1} << 16;
inline constexpr double kBranchMixingTol = 1e-10;
inline constexpr double kTrajectoryNormTol = 1e-10;
inline constexpr double kEnergyDriftTol = 1e-9;

struct TimeGrid {
  double t_start = 0.0;
  double t_end = 1.0;
  std::size_t n_steps = 1;

  // Throws DomainError unless t_end > t_start and n_steps >= 1.
  static TimeGrid make(double t_start, double t_end, std::size_t n_steps);

  std::size_t size() const { return n_steps + 1; }
  double at(std::size_t j) const;
  std::vector<double> points() const;
};

using Generator = std::variant<Operator, DiagonalHamiltonian>;

enum class EvolutionPath { dense, dephasing_fast, automatic };

const Dims& generator_dims(const Generator& h);

namespace detail {
class Propagator;
}

class StateTrajectory {
 public:
  const TimeGrid& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }
  double time(std::size_t j) const { return grid_.at(j); }

  // exp(-i H t_j) psi0. Throws NumericalInvariantError if the norm drifted
  // beyond kTrajectoryNormTol.
  PureState state(std::size_t j) const;
  std::vector<PureState> states() const;

  const PureState& initial() const { return psi0_; }
  const Generator& generator() const { return generator_; }
  EvolutionPath path() const { return path_; }
  const Dims& factor_dims() const { return psi0_.factor_dims(); }

  // <psi|H|psi> evaluated with the generator itself.
  double energy(const PureState& psi) const;

 private:
  friend StateTrajectory evolve(const Generator&, const PureState&, const TimeGrid&, EvolutionPath);
  StateTrajectory(Generator h, PureState psi0, TimeGrid grid, EvolutionPath path,
                  std::shared_ptr<const detail::Propagator> prop);

  Generator generator_;
  PureState psi0_;
  TimeGrid grid_;
  EvolutionPath path_;
  std::shared_ptr<const detail::Propagator> prop_;
};

// `automatic` takes the fast path whenever the generator is diagonal and
// falls back to the dense path otherwise. The dense path diagonalizes H once
// and is refused above kDenseDimCap. Requesting dephasing_fast for a
// non-diagonal operator throws StructureError.
StateTrajectory evolve(const Generator& h, const PureState& psi0, const TimeGrid& grid,
                       EvolutionPath path = EvolutionPath::automatic);

struct TrajectoryDrift {
  double norm = 0.0;    // max | ||psi(t)|| - 1 |
  double energy = 0.0;  // max |E(t) - E(0)|
};

TrajectoryDrift trajectory_drift(const StateTrajectory& traj);

// Environment branch states |e_i(t)> of the correlated form
// sum_i c_i |a_i> |p_i> |e_i(t)>, with factor 0 = system, factor 1 =
// pointer and the rest environment. Branches with c_i = 0 are skipped.
class BranchStates {
 public:
  BranchStates(StateTrajectory traj, std::vector<cplx> coefficients, double mixing_tol = kBranchMixingTol);

  std::size_t size() const { return traj_.size(); }
  const TimeGrid& grid() const { return traj_.grid(); }
  const std::vector<std::size_t>& labels() const { return labels_; }
  const std::vector<cplx>& coefficients() const { return coefficients_; }

  // Normalized |e_i(t_j)> for every label. Throws ModelViolationError when
  // amplitude outside the correlated sector exceeds the mixing tolerance.
  std::vector<Vector> at(std::size_t j) const;

 private:
  StateTrajectory traj_;
  std::vector<cplx> coefficients_;
  std::vector<std::size_t> labels_;
  double mixing_tol_;
};

BranchStates branch_states(const StateTrajectory& traj, std::span<const cplx> coefficients);

std::vector<DensityOperator> reduced_state(const StateTrajectory& traj, std::span<const std::size_t> keep);

// Tr(rho O). Throws DomainError when the imaginary part exceeds 1e-10.
double expectation(const Operator& o, const PureState& psi);
double expectation(const Operator& o, const DensityOperator& rho);

}  // namespace decoh
