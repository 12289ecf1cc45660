#pragma once

// Physical scenarios: the correlated system-pointer-environment state after a
// von Neumann measurement, the pointer-plus-environment Hamiltonian, a
// central-spin dephasing bath, and coarse-grained pointer observables.
//
// Layout convention for measurement states: factor 0 is the measured system
// S, factor 1 the pointer M, the remaining factors the environment E. Bases
// |a_i>, |p_i>, |e_m> are computational basis vectors of their factors.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "decoh/linalg.hpp"

namespace decoh {

struct BlochAngles {
  double theta = 0.0;  // polar angle from +z
  double phi = 0.0;
};

// cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>
PureState qubit_state(const BlochAngles& a);

// (|0> + |1>)/sqrt(2) on every spin.
PureState uniform_env_state(std::size_t n_spins);
PureState env_product_state(std::span<const BlochAngles> spins);

struct MeasurementModel {
  std::vector<cplx> coefficients;
  std::size_t system_dim = 2;
  std::size_t pointer_dim = 2;
  Dims env_dims;
  PureState env0 = PureState::basis(0, {});

  // Throws DomainError / DimensionError on broken invariants.
  void validate() const;
  Dims factor_dims() const;
};

// sum_i c_i |a_i> (x) |p_i> (x) |e_0>
PureState build_correlated_state(const MeasurementModel& m);

// sum_i |c_i|^2 |a_i p_i><a_i p_i| on S (x) M.
DensityOperator build_collapsed_mixture(const MeasurementModel& m);

// H_M (x) I_E + I_M (x) H_E + lambda * H_int. System-side terms (H_S and the
// S-M, S-E interactions) are identically zero in this model; system_terms_zero
// records that.
class CompositeHamiltonian {
 public:
  static CompositeHamiltonian assemble(Operator pointer_self, Operator env_self, Operator interaction,
                                       double coupling_scale = 1.0);

  const Operator& pointer_self() const { return pointer_self_; }
  const Operator& env_self() const { return env_self_; }
  const Operator& interaction() const { return interaction_; }
  double coupling_scale() const { return lambda_; }
  const Operator& total() const { return total_; }

  const Dims& pointer_dims() const { return pointer_self_.factor_dims(); }
  const Dims& env_dims() const { return env_self_.factor_dims(); }
  Dims factor_dims() const { return total_.factor_dims(); }

  Operator lifted_pointer_self() const;  // H_M (x) I_E
  Operator lifted_env_self() const;      // I_M (x) H_E
  Operator scaled_interaction() const;   // lambda * H_int

  CompositeHamiltonian with_coupling_scale(double lambda) const;

  static constexpr bool system_terms_zero = true;

 private:
  CompositeHamiltonian(Operator pm, Operator pe, Operator pint, double lambda, Operator total)
      : pointer_self_(std::move(pm)), env_self_(std::move(pe)), interaction_(std::move(pint)), lambda_(lambda),
        total_(std::move(total)) {}

  Operator pointer_self_;
  Operator env_self_;
  Operator interaction_;
  double lambda_;
  Operator total_;
};

enum class PointerAxis { z, x };

struct SpinBathParams {
  std::size_t n_env = 0;
  std::vector<double> couplings;     // g_k
  std::vector<double> env_energies;  // omega_k
  double pointer_energy = 0.0;       // Delta
  PointerAxis pointer_axis = PointerAxis::z;
  double coupling_scale = 1.0;       // lambda

  void validate() const;
  // Diagonal in the computational basis: Delta == 0 or the pointer axis is z.
  bool pure_dephasing() const;
};

// H_M = (Delta/2) sigma_axis, H_E = sum_k (omega_k/2) sigma_z^(k),
// H_int = sum_k g_k sigma_z^(M) sigma_z^(k); pointer is factor 0.
CompositeHamiltonian build_spin_bath(const SpinBathParams& p);

// The same generator stored as 2^(n_env+1) diagonal energies. Throws
// StructureError unless p.pure_dephasing().
DiagonalHamiltonian spin_bath_dephasing(const SpinBathParams& p);

// Closed-form spectral norms of the spin-bath parts: ||H_M|| = |Delta|/2 and
// ||lambda H_int|| = |lambda| sum_k |g_k|.
struct SpinBathNorms {
  double pointer_self = 0.0;
  double interaction = 0.0;
};
SpinBathNorms spin_bath_norms(const SpinBathParams& p);

class PointerObservable {
 public:
  // Groups the spectrum of p; eigenvalues closer than group_tol (relative)
  // are one outcome.
  static PointerObservable from_operator(const Operator& p, double group_tol = kDefaultGroupTol);

  const std::vector<double>& eigenvalues() const { return values_; }
  const std::vector<Operator>& projectors() const { return projectors_; }
  std::size_t outcome_count() const { return values_.size(); }  // N
  std::size_t space_dim() const { return op_.dim(); }           // K
  const Operator& op() const { return op_; }
  const Dims& factor_dims() const { return op_.factor_dims(); }
  std::size_t rank(std::size_t n) const;

 private:
  PointerObservable(std::vector<double> values, std::vector<Operator> projectors, Operator op)
      : values_(std::move(values)), projectors_(std::move(projectors)), op_(std::move(op)) {}
  friend PointerObservable lift_pointer(const PointerObservable&, const Dims&);

  std::vector<double> values_;
  std::vector<Operator> projectors_;
  Operator op_;
};

// P_M (x) I_E with the eigenvalue list unchanged.
PointerObservable lift_pointer(const PointerObservable& p_m, const Dims& env_dims);

struct CompositeSplit {
  Operator first;        // H_1, carries the global trace
  Operator second;       // H_2, traceless
  Operator interaction;  // Tr_1 = Tr_2 = 0
  double residual_norm = 0.0;
  bool composite = false;
};

inline constexpr double kCompositeTol = 1e-10;

// Splits h on factors [0, cut) | [cut, n) into the unique traceless-local
// form h = H_1 (x) I + I (x) H_2 + H_int. Throws InvalidPartitionError when the
// cut does not leave both sides nonempty.
CompositeSplit decompose_composite(const Operator& h, std::size_t cut, double tol = kCompositeTol);

}  // namespace decoh
