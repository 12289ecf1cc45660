#include "decoh/evolution.hpp"

#include <cmath>
#include <string>

#include "decoh/errors.hpp"

namespace decoh {

namespace detail {

class Propagator {
 public:
  virtual ~Propagator() = default;
  virtual Vector apply(double t) const = 0;
};

namespace {

// psi(t) = V exp(-i w t) V^dagger psi0, with V^dagger psi0 cached.
class DensePropagator final : public Propagator {
 public:
  DensePropagator(const Operator& h, const Vector& psi0) : sd_(spectral(h)), coeffs_(sd_.eigenvectors.adjoint() * psi0) {}

  Vector apply(double t) const override {
    Vector rotated(coeffs_.size());
    for (Eigen::Index k = 0; k < coeffs_.size(); ++k) rotated(k) = coeffs_(k) * std::polar(1.0, -sd_.raw_eigenvalues(k) * t);
    return sd_.eigenvectors * rotated;
  }

 private:
  SpectralDecomposition sd_;
  Vector coeffs_;
};

// Per-configuration phase factors; no matrix is ever formed.
class DiagonalPropagator final : public Propagator {
 public:
  DiagonalPropagator(RealVector energies, Vector psi0) : e_(std::move(energies)), psi0_(std::move(psi0)) {}

  Vector apply(double t) const override {
    Vector out(psi0_.size());
    for (Eigen::Index i = 0; i < psi0_.size(); ++i) out(i) = psi0_(i) * std::polar(1.0, -e_(i) * t);
    return out;
  }

 private:
  RealVector e_;
  Vector psi0_;
};

}  // namespace
}  // namespace detail

// --------------------------------------------------------------- TimeGrid

TimeGrid TimeGrid::make(double t_start, double t_end, std::size_t n_steps) {
  if (!(t_end > t_start)) throw DomainError("TimeGrid: t_end must exceed t_start");
  if (n_steps < 1) throw DomainError("TimeGrid: n_steps must be positive");
  return TimeGrid{t_start, t_end, n_steps};
}

double TimeGrid::at(std::size_t j) const {
  if (j == n_steps) return t_end;
  return t_start + (t_end - t_start) * static_cast<double>(j) / static_cast<double>(n_steps);
}

std::vector<double> TimeGrid::points() const {
  std::vector<double> out(size());
  for (std::size_t j = 0; j < size(); ++j) out[j] = at(j);
  return out;
}

const Dims& generator_dims(const Generator& h) {
  return std::visit([](const auto& g) -> const Dims& { return g.factor_dims(); }, h);
}

// ------------------------------------------------------- StateTrajectory

StateTrajectory::StateTrajectory(Generator h, PureState psi0, TimeGrid grid, EvolutionPath path,
                                 std::shared_ptr<const detail::Propagator> prop)
    : generator_(std::move(h)), psi0_(std::move(psi0)), grid_(grid), path_(path), prop_(std::move(prop)) {}

PureState StateTrajectory::state(std::size_t j) const {
  if (j >= size()) throw DimensionError("StateTrajectory: grid index out of range");
  Vector v = prop_->apply(grid_.at(j));
  if (std::abs(v.norm() - 1.0) > kTrajectoryNormTol) {
    throw NumericalInvariantError("state norm drifted beyond tolerance at t = " + std::to_string(grid_.at(j)));
  }
  return PureState(std::move(v), psi0_.factor_dims(), kTrajectoryNormTol);
}

std::vector<PureState> StateTrajectory::states() const {
  std::vector<PureState> out;
  out.reserve(size());
  for (std::size_t j = 0; j < size(); ++j) out.push_back(state(j));
  return out;
}

double StateTrajectory::energy(const PureState& psi) const {
  const Vector& v = psi.amplitudes();
  if (const auto* d = std::get_if<DiagonalHamiltonian>(&generator_)) {
    return (v.cwiseAbs2().array() * d->energies().array()).sum();
  }
  const auto& h = std::get<Operator>(generator_);
  return v.dot(h.matrix() * v).real();
}

StateTrajectory evolve(const Generator& h, const PureState& psi0, const TimeGrid& grid, EvolutionPath path) {
  if (generator_dims(h) != psi0.factor_dims()) throw DimensionError("evolve: generator and state live on different spaces");

  auto fast = [&](const DiagonalHamiltonian& d) {
    if (d.dim() > kFastDimCap) throw DimensionError("evolve: fast path is capped at dimension 2^16");
    auto prop = std::make_shared<detail::DiagonalPropagator>(d.energies(), psi0.amplitudes());
    return StateTrajectory(h, psi0, grid, EvolutionPath::dephasing_fast, std::move(prop));
  };
  auto dense = [&](const Operator& op) {
    if (op.dim() > kDenseDimCap) throw DimensionError("evolve: dense path is capped at dimension 4096");
    auto prop = std::make_shared<detail::DensePropagator>(op, psi0.amplitudes());
    return StateTrajectory(h, psi0, grid, EvolutionPath::dense, std::move(prop));
  };

  if (const auto* d = std::get_if<DiagonalHamiltonian>(&h)) {
    if (path == EvolutionPath::dense) {
      if (d->dim() > kDenseDimCap) throw DimensionError("evolve: dense path is capped at dimension 4096");
      return dense(d->to_operator());
    }
    return fast(*d);
  }

  const auto& op = std::get<Operator>(h);
  const double tol = kHermitianTol * std::max(1.0, max_abs(op.matrix()));
  if (!op.is_hermitian(tol)) throw DomainError("evolve: generator is not Hermitian");
  if (path == EvolutionPath::dephasing_fast) return fast(DiagonalHamiltonian::from_operator(op, tol));
  if (path == EvolutionPath::automatic && op.is_diagonal(tol)) {
    return fast(DiagonalHamiltonian::from_operator(op, tol));
  }
  return dense(op);
}

TrajectoryDrift trajectory_drift(const StateTrajectory& traj) {
  TrajectoryDrift drift;
  const double e0 = traj.energy(traj.initial());
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const PureState psi = traj.state(j);
    drift.norm = std::max(drift.norm, std::abs(psi.amplitudes().norm() - 1.0));
    drift.energy = std::max(drift.energy, std::abs(traj.energy(psi) - e0));
  }
  return drift;
}

// ---------------------------------------------------------- BranchStates

BranchStates::BranchStates(StateTrajectory traj, std::vector<cplx> coefficients, double mixing_tol)
    : traj_(std::move(traj)), coefficients_(std::move(coefficients)), mixing_tol_(mixing_tol) {
  const Dims& dims = traj_.factor_dims();
  if (dims.size() < 2) throw DimensionError("branch_states: need system and pointer factors");
  if (coefficients_.size() > std::min(dims[0], dims[1])) {
    throw DimensionError("branch_states: more coefficients than system or pointer basis states");
  }
  for (std::size_t i = 0; i < coefficients_.size(); ++i)
    if (coefficients_[i] != cplx(0.0)) labels_.push_back(i);
}

std::vector<Vector> BranchStates::at(std::size_t j) const {
  const PureState psi = traj_.state(j);
  const Dims& dims = psi.factor_dims();
  const auto dim_p = static_cast<Eigen::Index>(dims[1]);
  const auto dim_sm = static_cast<Eigen::Index>(dims[0] * dims[1]);
  const auto dim_e = static_cast<Eigen::Index>(psi.dim()) / dim_sm;
  const Vector& v = psi.amplitudes();

  // Every (a, p) sector other than a correlated, populated (i, i) must stay empty.
  double stray = 0.0;
  for (Eigen::Index k = 0; k < dim_sm; ++k) {
    const Eigen::Index a = k / dim_p;
    const Eigen::Index p = k % dim_p;
    const bool populated = a == p && static_cast<std::size_t>(a) < coefficients_.size() &&
                           coefficients_[static_cast<std::size_t>(a)] != cplx(0.0);
    if (!populated) stray = std::max(stray, v.segment(k * dim_e, dim_e).norm());
  }
  if (stray > mixing_tol_) {
    throw ModelViolationError("branch mixing: amplitude " + std::to_string(stray) + " left the correlated sector at t = " +
                              std::to_string(traj_.time(j)));
  }

  std::vector<Vector> out;
  out.reserve(labels_.size());
  for (std::size_t i : labels_) {
    const auto k = static_cast<Eigen::Index>(i) * dim_p + static_cast<Eigen::Index>(i);
    Vector e = v.segment(k * dim_e, dim_e) / coefficients_[i];
    if (std::abs(e.norm() - 1.0) > mixing_tol_) {
      throw ModelViolationError("branch " + std::to_string(i) + " lost norm at t = " + std::to_string(traj_.time(j)));
    }
    out.push_back(std::move(e));
  }
  return out;
}

BranchStates branch_states(const StateTrajectory& traj, std::span<const cplx> coefficients) {
  return BranchStates(traj, std::vector<cplx>(coefficients.begin(), coefficients.end()));
}

std::vector<DensityOperator> reduced_state(const StateTrajectory& traj, std::span<const std::size_t> keep) {
  std::vector<DensityOperator> out;
  out.reserve(traj.size());
  for (std::size_t j = 0; j < traj.size(); ++j) out.push_back(partial_trace(traj.state(j), keep));
  return out;
}

// ------------------------------------------------------------ expectation

namespace {

double real_part_checked(cplx value) {
  if (std::abs(value.imag()) > 1e-10) throw DomainError("expectation: observable is not Hermitian");
  return value.real();
}

}  // namespace

double expectation(const Operator& o, const PureState& psi) {
  if (o.dim() != psi.dim()) throw DimensionError("expectation: dimension mismatch");
  return real_part_checked(psi.amplitudes().dot(o.matrix() * psi.amplitudes()));
}

double expectation(const Operator& o, const DensityOperator& rho) {
  if (o.dim() != rho.dim()) throw DimensionError("expectation: dimension mismatch");
  // Tr(rho O) = sum_ij rho_ij O_ji
  return real_part_checked((rho.matrix().transpose().array() * o.matrix().array()).sum());
}

}  // namespace decoh
