#pragma once

// Dense complex linear algebra on tensor-factorized Hilbert spaces.
//
// Factor ordering follows the Kronecker convention: the first factor is the
// most significant digit of a basis index, so for dims (d0, d1, ..., dn-1)
// the basis index of |i0 i1 ... in-1> is sum_f i_f * stride_f with
// stride_f = prod_{g > f} d_g.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace decoh {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kStateNormTol = 1e-12;
inline constexpr double kDensityTraceTol = 1e-10;
inline constexpr double kDensityPositivityTol = 1e-10;
inline constexpr double kDefaultGroupTol = 1e-9;
// Largest dimension for which dense matrices are built.
inline constexpr std::size_t kDenseDimCap = 4096;

std::size_t product(const Dims& dims);
Dims concat(const Dims& a, const Dims& b);

// Largest |A - A^dagger| entry.
double hermiticity_error(const Matrix& m);
double max_abs(const Matrix& m);
double spectral_norm(const Matrix& m);

class Operator {
 public:
  Operator(Matrix entries, Dims factor_dims);
  explicit Operator(Matrix entries);

  static Operator identity(const Dims& dims);
  static Operator zero(const Dims& dims);

  const Matrix& matrix() const { return m_; }
  const Dims& factor_dims() const { return dims_; }
  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }

  double hermiticity_error() const { return decoh::hermiticity_error(m_); }
  bool is_hermitian(double tol = kHermitianTol) const { return hermiticity_error() <= tol; }
  bool is_diagonal(double tol) const;
  cplx trace() const { return m_.trace(); }
  double norm() const { return spectral_norm(m_); }

  Operator adjoint() const;

  Operator& operator+=(const Operator& rhs);
  Operator& operator-=(const Operator& rhs);
  Operator& operator*=(cplx s);

 private:
  Matrix m_;
  Dims dims_;
};

Operator operator+(Operator a, const Operator& b);
Operator operator-(Operator a, const Operator& b);
Operator operator*(cplx s, Operator a);
Operator operator*(const Operator& a, const Operator& b);

class PureState {
 public:
  // Throws DomainError unless | ||amplitudes|| - 1 | <= norm_tol.
  PureState(Vector amplitudes, Dims factor_dims, double norm_tol = kStateNormTol);

  static PureState normalized(Vector amplitudes, Dims factor_dims);
  static PureState basis(std::size_t index, Dims factor_dims);

  const Vector& amplitudes() const { return v_; }
  const Dims& factor_dims() const { return dims_; }
  std::size_t dim() const { return static_cast<std::size_t>(v_.size()); }

 private:
  Vector v_;
  Dims dims_;
};

class DensityOperator {
 public:
  // Validates Hermiticity, unit trace and positivity.
  explicit DensityOperator(Operator rho);

  static DensityOperator from_pure(const PureState& psi);

  const Operator& op() const { return rho_; }
  const Matrix& matrix() const { return rho_.matrix(); }
  const Dims& factor_dims() const { return rho_.factor_dims(); }
  std::size_t dim() const { return rho_.dim(); }
  double trace() const { return rho_.trace().real(); }
  double purity() const;

 private:
  struct Trusted {};
  DensityOperator(Operator rho, Trusted) : rho_(std::move(rho)) {}
  friend DensityOperator partial_trace(const DensityOperator&, std::span<const std::size_t>);
  friend DensityOperator partial_trace(const PureState&, std::span<const std::size_t>);

  Operator rho_;
};

// Energies of an operator that is diagonal in the computational product
// basis. Lets pure-dephasing generators scale past the dense cap.
class DiagonalHamiltonian {
 public:
  DiagonalHamiltonian(RealVector energies, Dims factor_dims);

  static DiagonalHamiltonian from_operator(const Operator& h, double tol);

  const RealVector& energies() const { return e_; }
  const Dims& factor_dims() const { return dims_; }
  std::size_t dim() const { return static_cast<std::size_t>(e_.size()); }

  Operator to_operator() const;

 private:
  RealVector e_;
  Dims dims_;
};

// I_{spectator} (x) h, with the spectator factors placed in front.
DiagonalHamiltonian with_leading_identity(const Dims& spectator, const DiagonalHamiltonian& h);

struct SpectralDecomposition {
  RealVector raw_eigenvalues;  // ascending, with multiplicity
  Matrix eigenvectors;         // columns, matching raw_eigenvalues
  std::vector<double> eigenvalues;   // distinct (group means), ascending
  std::vector<std::size_t> offsets;  // eigenspace k spans columns [offsets[k], offsets[k+1])
  double group_tol = kDefaultGroupTol;
  Dims factor_dims;

  std::size_t size() const { return eigenvalues.size(); }
  std::size_t multiplicity(std::size_t k) const { return offsets[k + 1] - offsets[k]; }
  std::vector<std::size_t> multiplicities() const;
  Operator projector(std::size_t k) const;
  Operator reconstruct() const;
};

Operator tensor(const Operator& a, const Operator& b);
PureState tensor(const PureState& a, const PureState& b);

// Places `local` on factor `position` of a space with factor dims `dims`.
Operator embed(const Operator& local, std::size_t position, const Dims& dims);

// Keep is a set of factor indices (0-based); the result keeps them in
// ascending order. Throws InvalidPartitionError for empty, full or
// out-of-range keep sets.
Operator partial_trace(const Operator& a, std::span<const std::size_t> keep);
DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> keep);
DensityOperator partial_trace(const PureState& psi, std::span<const std::size_t> keep);

// Eigenvalues closer than group_tol * max|lambda| to their ascending
// neighbour share one eigenspace.
SpectralDecomposition spectral(const Operator& h, double group_tol = kDefaultGroupTol);

// exp(-i H t) through the eigendecomposition of H.
Operator evolve_unitary(const Operator& h, double t);
Operator evolve_unitary(const SpectralDecomposition& sd, double t);

Operator commutator(const Operator& a, const Operator& b);
double commutator_norm(const Operator& a, const Operator& b);

namespace pauli {
Operator x();
Operator y();
Operator z();
Operator identity();
}  // namespace pauli

}  // namespace decoh
