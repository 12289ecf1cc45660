#include "decoh/models.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "decoh/errors.hpp"

namespace decoh {

namespace {

// +1 for |0>, -1 for |1> of spin k among n (spin 0 most significant).
inline double spin_sign(std::size_t index, std::size_t k, std::size_t n) {
  return ((index >> (n - 1 - k)) & 1U) ? -1.0 : 1.0;
}

RealVector env_self_energies(const SpinBathParams& p) {
  const std::size_t n = p.n_env;
  RealVector e = RealVector::Zero(static_cast<Eigen::Index>(std::size_t{1} << n));
  for (Eigen::Index i = 0; i < e.size(); ++i)
    for (std::size_t k = 0; k < n; ++k) e(i) += 0.5 * p.env_energies[k] * spin_sign(static_cast<std::size_t>(i), k, n);
  return e;
}

// sum_k g_k s_k for every environment configuration.
RealVector env_coupling_fields(const SpinBathParams& p) {
  const std::size_t n = p.n_env;
  RealVector f = RealVector::Zero(static_cast<Eigen::Index>(std::size_t{1} << n));
  for (Eigen::Index i = 0; i < f.size(); ++i)
    for (std::size_t k = 0; k < n; ++k) f(i) += p.couplings[k] * spin_sign(static_cast<std::size_t>(i), k, n);
  return f;
}

Operator diagonal_operator(const RealVector& d, Dims dims) {
  return Operator(Matrix(d.cast<cplx>().asDiagonal()), std::move(dims));
}

}  // namespace

PureState qubit_state(const BlochAngles& a) {
  Vector v(2);
  v(0) = std::cos(a.theta / 2.0);
  v(1) = std::polar(std::sin(a.theta / 2.0), a.phi);
  return PureState(std::move(v), {2});
}

PureState uniform_env_state(std::size_t n_spins) {
  const auto n = static_cast<Eigen::Index>(std::size_t{1} << n_spins);
  Vector v = Vector::Constant(n, cplx(1.0 / std::sqrt(static_cast<double>(n)), 0.0));
  return PureState(std::move(v), Dims(n_spins, 2));
}

PureState env_product_state(std::span<const BlochAngles> spins) {
  PureState out = PureState::basis(0, {});
  for (const BlochAngles& a : spins) out = tensor(out, qubit_state(a));
  return out;
}

// ------------------------------------------------------- MeasurementModel

void MeasurementModel::validate() const {
  if (coefficients.empty()) throw DomainError("MeasurementModel: no coefficients");
  if (system_dim == 0 || pointer_dim == 0) throw DimensionError("MeasurementModel: zero factor dimension");
  if (coefficients.size() > std::min(system_dim, pointer_dim)) {
    throw DimensionError("MeasurementModel: more coefficients than system or pointer basis states");
  }
  double norm2 = 0.0;
  for (const cplx& c : coefficients) norm2 += std::norm(c);
  if (std::abs(std::sqrt(norm2) - 1.0) > kStateNormTol) throw DomainError("MeasurementModel: coefficients are not normalized");
  if (env0.factor_dims() != env_dims) throw DimensionError("MeasurementModel: env0 does not live on env_dims");
}

Dims MeasurementModel::factor_dims() const { return concat({system_dim, pointer_dim}, env_dims); }

PureState build_correlated_state(const MeasurementModel& m) {
  m.validate();
  const auto dim_e = static_cast<Eigen::Index>(product(m.env_dims));
  const auto dim_p = static_cast<Eigen::Index>(m.pointer_dim);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(m.system_dim) * dim_p * dim_e);
  for (std::size_t i = 0; i < m.coefficients.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i) * dim_p + static_cast<Eigen::Index>(i);
    v.segment(row * dim_e, dim_e) = m.coefficients[i] * m.env0.amplitudes();
  }
  return PureState(std::move(v), m.factor_dims(), 1e-10);
}

DensityOperator build_collapsed_mixture(const MeasurementModel& m) {
  m.validate();
  const auto n = static_cast<Eigen::Index>(m.system_dim * m.pointer_dim);
  Matrix rho = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < m.coefficients.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i * m.pointer_dim + i);
    rho(k, k) = std::norm(m.coefficients[i]);
  }
  return DensityOperator(Operator(std::move(rho), {m.system_dim, m.pointer_dim}));
}

// --------------------------------------------------- CompositeHamiltonian

CompositeHamiltonian CompositeHamiltonian::assemble(Operator pointer_self, Operator env_self, Operator interaction,
                                                    double coupling_scale) {
  const Dims joint = concat(pointer_self.factor_dims(), env_self.factor_dims());
  if (interaction.factor_dims() != joint) {
    throw DimensionError("CompositeHamiltonian: interaction does not act on the pointer-environment space");
  }
  for (const Operator* h : {&pointer_self, &env_self, &interaction}) {
    if (!h->is_hermitian(kHermitianTol * std::max(1.0, max_abs(h->matrix())))) {
      throw DomainError("CompositeHamiltonian: parts must be Hermitian");
    }
  }
  Operator total = tensor(pointer_self, Operator::identity(env_self.factor_dims())) +
                   tensor(Operator::identity(pointer_self.factor_dims()), env_self) +
                   cplx(coupling_scale) * interaction;
  return CompositeHamiltonian(std::move(pointer_self), std::move(env_self), std::move(interaction), coupling_scale,
                              std::move(total));
}

Operator CompositeHamiltonian::lifted_pointer_self() const {
  return tensor(pointer_self_, Operator::identity(env_dims()));
}

Operator CompositeHamiltonian::lifted_env_self() const { return tensor(Operator::identity(pointer_dims()), env_self_); }

Operator CompositeHamiltonian::scaled_interaction() const { return cplx(lambda_) * interaction_; }

CompositeHamiltonian CompositeHamiltonian::with_coupling_scale(double lambda) const {
  return assemble(pointer_self_, env_self_, interaction_, lambda);
}

// ------------------------------------------------------------- spin bath

void SpinBathParams::validate() const {
  if (couplings.size() != n_env || env_energies.size() != n_env) {
    throw DimensionError("spin bath: couplings and env_energies must both have n_env entries");
  }
  if (n_env > 30) throw DimensionError("spin bath: n_env too large");
}

bool SpinBathParams::pure_dephasing() const { return pointer_axis == PointerAxis::z || pointer_energy == 0.0; }

CompositeHamiltonian build_spin_bath(const SpinBathParams& p) {
  p.validate();
  if ((std::size_t{2} << p.n_env) > kDenseDimCap) {
    throw DimensionError("build_spin_bath: dense pointer-environment space exceeds the dense cap");
  }
  const Dims env_dims(p.n_env, 2);
  const Operator axis = p.pointer_axis == PointerAxis::z ? pauli::z() : pauli::x();
  Operator h_m = cplx(0.5 * p.pointer_energy) * axis;
  Operator h_e = diagonal_operator(env_self_energies(p), env_dims);

  const RealVector field = env_coupling_fields(p);
  const Eigen::Index ne = field.size();
  RealVector d_int(2 * ne);
  d_int.head(ne) = field;
  d_int.tail(ne) = -field;
  Operator h_int = diagonal_operator(d_int, concat({2}, env_dims));
  return CompositeHamiltonian::assemble(std::move(h_m), std::move(h_e), std::move(h_int), p.coupling_scale);
}

DiagonalHamiltonian spin_bath_dephasing(const SpinBathParams& p) {
  p.validate();
  if (!p.pure_dephasing()) throw StructureError("spin bath with a transverse pointer field is not pure dephasing");
  const RealVector self_e = env_self_energies(p);
  const RealVector field = env_coupling_fields(p);
  const Eigen::Index ne = field.size();
  const double pointer_z = p.pointer_axis == PointerAxis::z ? 0.5 * p.pointer_energy : 0.0;
  RealVector e(2 * ne);
  e.head(ne) = self_e + p.coupling_scale * field + RealVector::Constant(ne, pointer_z);
  e.tail(ne) = self_e - p.coupling_scale * field - RealVector::Constant(ne, pointer_z);
  return DiagonalHamiltonian(std::move(e), concat({2}, Dims(p.n_env, 2)));
}

SpinBathNorms spin_bath_norms(const SpinBathParams& p) {
  p.validate();
  double g_sum = 0.0;
  for (double g : p.couplings) g_sum += std::abs(g);
  return {0.5 * std::abs(p.pointer_energy), std::abs(p.coupling_scale) * g_sum};
}

// ------------------------------------------------------ PointerObservable

PointerObservable PointerObservable::from_operator(const Operator& p, double group_tol) {
  const SpectralDecomposition sd = spectral(p, group_tol);
  std::vector<Operator> projectors;
  projectors.reserve(sd.size());
  for (std::size_t k = 0; k < sd.size(); ++k) projectors.push_back(sd.projector(k));
  return PointerObservable(sd.eigenvalues, std::move(projectors), p);
}

std::size_t PointerObservable::rank(std::size_t n) const {
  return static_cast<std::size_t>(std::lround(projectors_.at(n).trace().real()));
}

PointerObservable lift_pointer(const PointerObservable& p_m, const Dims& env_dims) {
  const Operator id_e = Operator::identity(env_dims);
  std::vector<Operator> projectors;
  projectors.reserve(p_m.projectors().size());
  for (const Operator& pn : p_m.projectors()) projectors.push_back(tensor(pn, id_e));
  return PointerObservable(p_m.eigenvalues(), std::move(projectors), tensor(p_m.op(), id_e));
}

// ---------------------------------------------------- decompose_composite

CompositeSplit decompose_composite(const Operator& h, std::size_t cut, double tol) {
  const Dims& dims = h.factor_dims();
  if (cut == 0 || cut >= dims.size()) {
    throw InvalidPartitionError("decompose_composite: cut must leave factors on both sides");
  }
  if (h.hermiticity_error() > kHermitianTol * std::max(1.0, max_abs(h.matrix()))) {
    throw DomainError("decompose_composite: operator is not Hermitian");
  }
  std::vector<std::size_t> first(cut);
  std::iota(first.begin(), first.end(), std::size_t{0});
  std::vector<std::size_t> second(dims.size() - cut);
  std::iota(second.begin(), second.end(), cut);

  const Dims dims1(dims.begin(), dims.begin() + static_cast<std::ptrdiff_t>(cut));
  const Dims dims2(dims.begin() + static_cast<std::ptrdiff_t>(cut), dims.end());
  const double d1 = static_cast<double>(product(dims1));
  const double d2 = static_cast<double>(product(dims2));
  const cplx mean_trace = h.trace() / (d1 * d2);

  Operator h1 = cplx(1.0 / d2) * partial_trace(h, first);
  Operator h2 = cplx(1.0 / d1) * partial_trace(h, second) - mean_trace * Operator::identity(dims2);
  Operator h_int = h - tensor(h1, Operator::identity(dims2)) - tensor(Operator::identity(dims1), h2);
  const double residual = h_int.norm();
  return CompositeSplit{std::move(h1), std::move(h2), std::move(h_int), residual, residual <= tol};
}

}  // namespace decoh
