#include "decoh/pointer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "decoh/analysis.hpp"
#include "decoh/errors.hpp"

namespace decoh {

namespace {

void require_hermitian(const Operator& a, const char* what) {
  if (!a.is_hermitian(kHermitianTol * std::max(1.0, max_abs(a.matrix())))) {
    throw DomainError(std::string(what) + ": operator is not Hermitian");
  }
}

}  // namespace

// ------------------------------------------------------- preferred context

ContextVerdict check_preferred_context(const Operator& p, const Operator& h, double tol) {
  if (!(tol > 0.0)) throw DomainError("check_preferred_context: tolerance must be positive");
  if (p.dim() != h.dim()) throw DimensionError("check_preferred_context: dimension mismatch");
  require_hermitian(p, "check_preferred_context");
  require_hermitian(h, "check_preferred_context");

  const double p_norm = p.norm();
  ContextVerdict v;
  v.commutator_norm = commutator_norm(p, h);
  v.commutator_tolerance = tol * p_norm * h.norm();
  v.commutes = v.commutator_norm <= v.commutator_tolerance;

  const SpectralDecomposition sd = spectral(h);
  const double block_tol = tol * p_norm;
  const auto n = static_cast<Eigen::Index>(h.dim());
  const Matrix id = Matrix::Identity(n, n);
  for (std::size_t k = 0; k < sd.size(); ++k) {
    const Matrix proj = sd.projector(k).matrix();
    const cplx mean = (proj * p.matrix()).trace() / static_cast<double>(sd.multiplicity(k));
    const Matrix inside = proj * p.matrix() * proj - mean * proj;
    const Matrix leak = proj * p.matrix() * (id - proj);
    if (spectral_norm(inside) > block_tol || spectral_norm(leak) > block_tol) {
      v.witness = k;
      break;
    }
  }
  v.respects_degeneracy = !v.witness.has_value();
  return v;
}

// -------------------------------------------------------- pointer stability

StabilityNorms pointer_stability(const PointerObservable& p, const CompositeHamiltonian& ch) {
  const Operator& pl = p.op();
  if (pl.factor_dims() != ch.factor_dims()) {
    throw DomainError("pointer_stability: pointer does not act on the pointer-environment space");
  }
  if (!ch.env_dims().empty()) {
    std::vector<std::size_t> keep(ch.pointer_dims().size());
    std::iota(keep.begin(), keep.end(), std::size_t{0});
    const double env_dim = static_cast<double>(product(ch.env_dims()));
    const Operator local = cplx(1.0 / env_dim) * partial_trace(pl, keep);
    const double residual = max_abs((pl - tensor(local, Operator::identity(ch.env_dims()))).matrix());
    if (residual > 1e-12 * std::max(1.0, max_abs(pl.matrix()))) {
      throw DomainError("pointer_stability: pointer is not of the form P_M (x) I_E");
    }
  }

  StabilityNorms s;
  s.full = commutator_norm(pl, ch.total());
  s.env = commutator_norm(pl, ch.lifted_env_self());
  s.reduced = commutator_norm(pl, ch.lifted_pointer_self() + ch.scaled_interaction());
  s.scale = pl.norm() * ch.total().norm();
  if (std::abs(s.full - s.reduced) > kStabilityRelTol * std::max(s.scale, 1.0)) {
    throw NumericalInvariantError("pointer_stability: full and reduced commutator norms disagree");
  }
  return s;
}

// ------------------------------------------------------------------ regime

std::string to_string(Regime r) {
  switch (r) {
    case Regime::interaction_dominated: return "interaction_dominated";
    case Regime::interplay: return "interplay";
    case Regime::self_dominated: return "self_dominated";
  }
  return "unknown";
}

RegimeReport classify_regime_from_norms(double self_norm, double interaction_norm, RegimeThresholds thresholds) {
  if (!(thresholds.low > 0.0 && thresholds.low < thresholds.high)) {
    throw DomainError("classify_regime: thresholds must satisfy 0 < low < high");
  }
  if (self_norm == 0.0 && interaction_norm == 0.0) {
    throw DomainError("classify_regime: ratio undefined with neither self-Hamiltonian nor interaction");
  }
  RegimeReport r;
  r.thresholds = thresholds;
  r.self_norm = self_norm;
  r.interaction_norm = interaction_norm;
  r.ratio = interaction_norm == 0.0 ? std::numeric_limits<double>::infinity() : self_norm / interaction_norm;
  if (r.ratio < thresholds.low) r.regime = Regime::interaction_dominated;
  else if (r.ratio > thresholds.high) r.regime = Regime::self_dominated;
  else r.regime = Regime::interplay;
  return r;
}

RegimeReport classify_regime(const CompositeHamiltonian& ch, RegimeThresholds thresholds) {
  // ||H_M (x) I_E|| = ||H_M||
  return classify_regime_from_norms(ch.pointer_self().norm(), ch.scaled_interaction().norm(), thresholds);
}

// ------------------------------------------------------------ Bloch axes

std::array<double, 3> BlochAxis::direction() const {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

BlochAxis BlochAxis::from_direction(double x, double y, double z) {
  const double r = std::sqrt(x * x + y * y + z * z);
  return {std::acos(std::clamp(z / r, -1.0, 1.0)), std::atan2(y, x)};
}

Matrix bloch_basis(const BlochAxis& axis) {
  const double c = std::cos(axis.theta / 2.0);
  const double s = std::sin(axis.theta / 2.0);
  Matrix b(2, 2);
  b(0, 0) = c;
  b(1, 0) = std::polar(s, axis.phi);
  b(0, 1) = -std::polar(s, -axis.phi);
  b(1, 1) = c;
  return b;
}

std::vector<BlochAxis> fibonacci_axes(std::size_t n) {
  std::vector<BlochAxis> out;
  out.reserve(n);
  const double golden = std::numbers::pi * (1.0 + std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) + 0.5;
    const double z = 1.0 - 2.0 * u / static_cast<double>(n);
    const double phi = std::remainder(golden * u, 2.0 * std::numbers::pi);
    out.push_back({std::acos(z), phi});
  }
  return out;
}

double axis_separation_deg(const BlochAxis& a, const BlochAxis& b) {
  const auto da = a.direction();
  const auto db = b.direction();
  const double dot = std::abs(da[0] * db[0] + da[1] * db[1] + da[2] * db[2]);
  return std::acos(std::clamp(dot, 0.0, 1.0)) * 180.0 / std::numbers::pi;
}

std::vector<SieveCandidate> qubit_sieve_candidates(PointerAxis self_axis, std::size_t grid_points) {
  const BlochAxis z_axis{0.0, 0.0};
  const BlochAxis x_axis{std::numbers::pi / 2.0, 0.0};
  std::vector<SieveCandidate> out;
  out.reserve(grid_points + 2);
  const BlochAxis self = self_axis == PointerAxis::z ? z_axis : x_axis;
  out.push_back({bloch_basis(self), self});
  out.push_back({bloch_basis(z_axis), z_axis});
  for (const BlochAxis& a : fibonacci_axes(grid_points)) out.push_back({bloch_basis(a), a});
  return out;
}

// ------------------------------------------------------------------- sieve

SieveResult predictability_sieve(const Generator& h, std::span<const SieveCandidate> candidates, const PureState& env0,
                                 const SieveProbe& probe) {
  const Dims& dims = generator_dims(h);
  if (dims.empty() || concat({dims[0]}, env0.factor_dims()) != dims) {
    throw DimensionError("predictability_sieve: generator must act on pointer (x) environment of env0");
  }
  if (!(probe.t_probe > 0.0) || probe.samples == 0) {
    throw DomainError("predictability_sieve: probe time must be positive with at least one sample");
  }
  const auto dm = static_cast<Eigen::Index>(dims[0]);
  const auto de = static_cast<Eigen::Index>(env0.dim());
  for (const SieveCandidate& c : candidates) {
    if (c.basis.rows() != dm || c.basis.cols() != dm ||
        max_abs(c.basis.adjoint() * c.basis - Matrix::Identity(dm, dm)) > kGramTol) {
      throw DomainError("predictability_sieve: candidate is not an orthonormal basis of the pointer");
    }
  }

  // Candidate states are superpositions of |m> (x) env0, so the reduced
  // pointer state follows from the blocks Psi_m(t) Psi_m'(t)^dagger of the
  // evolved reference states.
  const TimeGrid grid = TimeGrid::make(0.0, probe.t_probe, probe.samples);
  std::vector<StateTrajectory> refs;
  refs.reserve(static_cast<std::size_t>(dm));
  for (Eigen::Index m = 0; m < dm; ++m) {
    refs.push_back(evolve(h, tensor(PureState::basis(static_cast<std::size_t>(m), {dims[0]}), env0), grid));
  }

  std::vector<std::vector<Matrix>> cross(probe.samples);
  for (std::size_t j = 1; j <= probe.samples; ++j) {
    std::vector<Vector> evolved;
    for (const StateTrajectory& r : refs) evolved.push_back(r.state(j).amplitudes());
    auto& blocks = cross[j - 1];
    blocks.reserve(static_cast<std::size_t>(dm * dm));
    for (Eigen::Index m = 0; m < dm; ++m) {
      const Eigen::Map<const Matrix> psi_m(evolved[static_cast<std::size_t>(m)].data(), de, dm);
      for (Eigen::Index mp = 0; mp < dm; ++mp) {
        const Eigen::Map<const Matrix> psi_mp(evolved[static_cast<std::size_t>(mp)].data(), de, dm);
        blocks.push_back(psi_m.transpose() * psi_mp.conjugate());
      }
    }
  }

  SieveResult result;
  result.candidates.assign(candidates.begin(), candidates.end());
  result.probe = probe;
  result.scores.reserve(candidates.size());
  for (const SieveCandidate& c : candidates) {
    double score = 0.0;
    for (const auto& blocks : cross) {
      for (Eigen::Index col = 0; col < dm; ++col) {
        const Vector b = c.basis.col(col);
        Matrix rho = Matrix::Zero(dm, dm);
        for (Eigen::Index m = 0; m < dm; ++m)
          for (Eigen::Index mp = 0; mp < dm; ++mp)
            rho += b(m) * std::conj(b(mp)) * blocks[static_cast<std::size_t>(m * dm + mp)];
        score += 1.0 - rho.squaredNorm();
      }
    }
    score /= static_cast<double>(probe.samples);
    result.scores.push_back(score < kSieveZeroScore ? 0.0 : score);
  }

  result.ranking.resize(candidates.size());
  std::iota(result.ranking.begin(), result.ranking.end(), std::size_t{0});
  std::stable_sort(result.ranking.begin(), result.ranking.end(),
                   [&](std::size_t a, std::size_t b) { return result.scores[a] < result.scores[b]; });
  return result;
}

SieveResult predictability_sieve(const CompositeHamiltonian& ch, std::span<const SieveCandidate> candidates,
                                 const PureState& env0, const SieveProbe& probe) {
  return predictability_sieve(Generator(ch.total()), candidates, env0, probe);
}

// ----------------------------------------------------------- probe window

std::optional<double> reference_decoherence_time(const SpinBathParams& p, const PureState& env0, double threshold) {
  p.validate();
  double g2 = 0.0;
  for (double g : p.couplings) g2 += g * g;
  const double strength = std::abs(p.coupling_scale) * std::sqrt(g2);
  if (strength == 0.0) return std::nullopt;

  SpinBathParams ref = p;
  ref.pointer_energy = 0.0;
  const double amp = 1.0 / std::sqrt(2.0);
  MeasurementModel model;
  model.coefficients = {amp, amp};
  model.env_dims = env0.factor_dims();
  model.env0 = env0;

  const TimeGrid grid = TimeGrid::make(0.0, 10.0 / strength, 2000);
  const StateTrajectory traj =
      evolve(with_leading_identity({2}, spin_bath_dephasing(ref)), build_correlated_state(model), grid);
  return decoherence_time(decoherence_factors(branch_states(traj, model.coefficients)), threshold);
}

SieveProbe default_sieve_probe(const SpinBathParams& p, const PureState& env0) {
  if (const auto t_d = reference_decoherence_time(p, env0)) {
    return {kProbeWindowFactor * *t_d, kDefaultProbeSamples};
  }
  const double t = p.pointer_energy != 0.0 ? 4.0 * 2.0 * std::numbers::pi / std::abs(p.pointer_energy) : 1.0;
  return {t, kDefaultProbeSamples};
}

}  // namespace decoh
