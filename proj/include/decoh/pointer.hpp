#pragma once

// Preferred-context membership, pointer stability, einselection regimes and
// the predictability sieve.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decoh/evolution.hpp"
#include "decoh/linalg.hpp"
#include "decoh/models.hpp"

namespace decoh {

inline constexpr double kDefaultContextTol = 1e-9;

struct ContextVerdict {
  bool commutes = false;
  double commutator_norm = 0.0;
  double commutator_tolerance = 0.0;  // absolute threshold compared against commutator_norm
  bool respects_degeneracy = false;
  std::optional<std::size_t> witness;  // first eigenspace of H that P splits or leaks out of

  bool member() const { return commutes && respects_degeneracy; }
};

// P belongs to the preferred context of H iff [P, H] = 0 and P acts as a
// scalar on every eigenspace of H (it is a function of H). Tolerances are
// relative: the commutator is compared against tol * ||P|| * ||H||, the
// eigenspace blocks against tol * ||P||.
ContextVerdict check_preferred_context(const Operator& p, const Operator& h, double tol = kDefaultContextTol);

struct StabilityNorms {
  double full = 0.0;     // ||[P, H_ME]||
  double reduced = 0.0;  // ||[P, H_M (x) I_E + lambda H_int]||
  double env = 0.0;      // ||[P, I_M (x) H_E]||
  double scale = 0.0;    // ||P|| * ||H_ME||
};

inline constexpr double kStabilityRelTol = 1e-10;

// Throws DomainError when p is not of the form P_M (x) I_E on the
// Hamiltonian's space and NumericalInvariantError when the full and reduced
// norms disagree beyond kStabilityRelTol * scale.
StabilityNorms pointer_stability(const PointerObservable& p, const CompositeHamiltonian& ch);

enum class Regime { interaction_dominated, interplay, self_dominated };
std::string to_string(Regime r);

struct RegimeThresholds {
  double low = 0.1;
  double high = 10.0;
};

struct RegimeReport {
  double ratio = 0.0;  // ||H_M (x) I_E|| / ||lambda H_int||, +inf without interaction
  Regime regime = Regime::interplay;
  RegimeThresholds thresholds;
  double self_norm = 0.0;
  double interaction_norm = 0.0;
};

RegimeReport classify_regime(const CompositeHamiltonian& ch, RegimeThresholds thresholds = {});
RegimeReport classify_regime_from_norms(double self_norm, double interaction_norm, RegimeThresholds thresholds = {});

// Qubit basis {|+n>, |-n>} labelled by its Bloch axis n.
struct BlochAxis {
  double theta = 0.0;
  double phi = 0.0;

  std::array<double, 3> direction() const;
  static BlochAxis from_direction(double x, double y, double z);
};

Matrix bloch_basis(const BlochAxis& axis);
std::vector<BlochAxis> fibonacci_axes(std::size_t n);

// Angle between two axes with n and -n identified, in degrees (0..90).
double axis_separation_deg(const BlochAxis& a, const BlochAxis& b);

struct SieveCandidate {
  Matrix basis;  // columns: orthonormal basis of the pointer factor
  std::optional<BlochAxis> axis;
};

inline constexpr std::size_t kDefaultSieveGridPoints = 200;

// The self-Hamiltonian axis first, the interaction (z) axis second, then a
// Fibonacci-sphere grid.
std::vector<SieveCandidate> qubit_sieve_candidates(PointerAxis self_axis,
                                                   std::size_t grid_points = kDefaultSieveGridPoints);

struct SieveProbe {
  double t_probe = 1.0;
  // 1 scores the state at t_probe alone; k > 1 averages the score over the
  // k equally spaced times t_probe * m / k, m = 1..k.
  std::size_t samples = 1;
};

struct SieveResult {
  std::vector<SieveCandidate> candidates;
  std::vector<double> scores;         // summed purity loss, >= 0
  std::vector<std::size_t> ranking;   // ascending score, ties by candidate index
  SieveProbe probe;

  std::size_t winner() const { return ranking.front(); }
};

// Scores below this are reported as exactly zero so that candidates that
// never entangle tie and fall back to index order.
inline constexpr double kSieveZeroScore = 1e-12;

// score = sum over basis states |b> of 1 - Tr(rho_M(t)^2), rho_M the pointer
// reduced state of exp(-iHt)(|b> (x) env0). h acts on pointer (factor 0)
// followed by the environment factors of env0.
SieveResult predictability_sieve(const Generator& h, std::span<const SieveCandidate> candidates, const PureState& env0,
                                 const SieveProbe& probe);
SieveResult predictability_sieve(const CompositeHamiltonian& ch, std::span<const SieveCandidate> candidates,
                                 const PureState& env0, const SieveProbe& probe);

inline constexpr double kReferenceThreshold = 0.01;
inline constexpr double kProbeWindowFactor = 4.0;
inline constexpr std::size_t kDefaultProbeSamples = 64;

// Decoherence time of the interaction-only (Delta = 0) version of the bath:
// first time |r_01| <= threshold, scanned on a 2000-step grid out to
// 10 / (lambda ||g||). None when the bath never decoheres there.
std::optional<double> reference_decoherence_time(const SpinBathParams& p, const PureState& env0,
                                                 double threshold = kReferenceThreshold);

// Window of kProbeWindowFactor reference decoherence times sampled at
// kDefaultProbeSamples points. Without a reference time, four periods of the
// pointer self-Hamiltonian (or t = 1 when Delta = 0).
SieveProbe default_sieve_probe(const SpinBathParams& p, const PureState& env0);

}  // namespace decoh
