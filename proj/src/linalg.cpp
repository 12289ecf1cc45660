#include "decoh/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "decoh/errors.hpp"

namespace decoh {

namespace {

void require_same_shape(const Operator& a, const Operator& b, const char* what) {
  if (a.dim() != b.dim() || a.factor_dims() != b.factor_dims()) {
    throw DimensionError(std::string(what) + ": operands act on different spaces");
  }
}

void require_hermitian(const Matrix& m, const char* what) {
  const double scale = std::max(1.0, max_abs(m));
  if (hermiticity_error(m) > kHermitianTol * scale) {
    throw DomainError(std::string(what) + ": operator is not Hermitian");
  }
}

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

// Basis-index offsets contributed by a subset of factors, enumerated in
// mixed-radix order (later factors vary fastest).
std::vector<std::size_t> factor_offsets(const Dims& dims, const std::vector<std::size_t>& factors) {
  std::vector<std::size_t> strides(dims.size(), 1);
  for (std::size_t f = dims.size(); f-- > 1;) strides[f - 1] = strides[f] * dims[f];
  std::vector<std::size_t> out{0};
  for (std::size_t f : factors) {
    std::vector<std::size_t> next;
    next.reserve(out.size() * dims[f]);
    for (std::size_t o : out)
      for (std::size_t d = 0; d < dims[f]; ++d) next.push_back(o + d * strides[f]);
    out = std::move(next);
  }
  return out;
}

struct TraceSplit {
  std::vector<std::size_t> kept_offsets;
  std::vector<std::size_t> traced_offsets;
  Dims kept_dims;
};

TraceSplit split_for_trace(const Dims& dims, std::span<const std::size_t> keep) {
  std::vector<std::size_t> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  if (kept.empty() || kept.size() >= dims.size() || kept.back() >= dims.size()) {
    throw InvalidPartitionError("partial_trace: keep must be a nonempty proper subset of factors");
  }
  std::vector<std::size_t> traced;
  for (std::size_t f = 0; f < dims.size(); ++f)
    if (!std::binary_search(kept.begin(), kept.end(), f)) traced.push_back(f);

  TraceSplit s;
  s.kept_offsets = factor_offsets(dims, kept);
  s.traced_offsets = factor_offsets(dims, traced);
  for (std::size_t f : kept) s.kept_dims.push_back(dims[f]);
  return s;
}

}  // namespace

std::size_t product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

Dims concat(const Dims& a, const Dims& b) {
  Dims out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

double hermiticity_error(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double spectral_norm(const Matrix& m) {
  const double scale = max_abs(m);
  if (scale == 0.0) return 0.0;
  // Hermitian and anti-Hermitian inputs (observables, commutators of
  // observables) go through the cheaper symmetric eigensolver.
  if (hermiticity_error(m) <= 1e-14 * scale) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  const Matrix im = cplx(0.0, 1.0) * m;
  if (hermiticity_error(im) <= 1e-14 * scale) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(im), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

// ---------------------------------------------------------------- Operator

Operator::Operator(Matrix entries, Dims factor_dims) : m_(std::move(entries)), dims_(std::move(factor_dims)) {
  if (m_.rows() != m_.cols()) throw DimensionError("Operator: matrix is not square");
  if (m_.rows() == 0) throw DimensionError("Operator: empty matrix");
  if (product(dims_) != static_cast<std::size_t>(m_.rows())) {
    throw DimensionError("Operator: factor dims do not multiply to the matrix dimension");
  }
}

Operator::Operator(Matrix entries) : Operator(entries, Dims{static_cast<std::size_t>(entries.rows())}) {}

Operator Operator::identity(const Dims& dims) {
  const auto n = static_cast<Eigen::Index>(product(dims));
  return Operator(Matrix::Identity(n, n), dims);
}

Operator Operator::zero(const Dims& dims) {
  const auto n = static_cast<Eigen::Index>(product(dims));
  return Operator(Matrix::Zero(n, n), dims);
}

bool Operator::is_diagonal(double tol) const {
  Matrix off = m_;
  off.diagonal().setZero();
  return max_abs(off) <= tol;
}

Operator Operator::adjoint() const { return Operator(m_.adjoint(), dims_); }

Operator& Operator::operator+=(const Operator& rhs) {
  require_same_shape(*this, rhs, "operator+");
  m_ += rhs.m_;
  return *this;
}

Operator& Operator::operator-=(const Operator& rhs) {
  require_same_shape(*this, rhs, "operator-");
  m_ -= rhs.m_;
  return *this;
}

Operator& Operator::operator*=(cplx s) {
  m_ *= s;
  return *this;
}

Operator operator+(Operator a, const Operator& b) { return a += b; }
Operator operator-(Operator a, const Operator& b) { return a -= b; }
Operator operator*(cplx s, Operator a) { return a *= s; }

Operator operator*(const Operator& a, const Operator& b) {
  require_same_shape(a, b, "operator*");
  return Operator(a.matrix() * b.matrix(), a.factor_dims());
}

// -------------------------------------------------------------- PureState

PureState::PureState(Vector amplitudes, Dims factor_dims, double norm_tol)
    : v_(std::move(amplitudes)), dims_(std::move(factor_dims)) {
  if (product(dims_) != static_cast<std::size_t>(v_.size())) {
    throw DimensionError("PureState: factor dims do not multiply to the vector length");
  }
  if (std::abs(v_.norm() - 1.0) > norm_tol) throw DomainError("PureState: vector is not normalized");
}

PureState PureState::normalized(Vector amplitudes, Dims factor_dims) {
  const double n = amplitudes.norm();
  if (n == 0.0) throw DomainError("PureState: zero vector");
  return PureState(amplitudes / n, std::move(factor_dims));
}

PureState PureState::basis(std::size_t index, Dims factor_dims) {
  const std::size_t n = product(factor_dims);
  if (index >= n) throw DimensionError("PureState::basis: index out of range");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(n));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return PureState(std::move(v), std::move(factor_dims));
}

// -------------------------------------------------------- DensityOperator

DensityOperator::DensityOperator(Operator rho) : rho_(std::move(rho)) {
  if (rho_.hermiticity_error() > kHermitianTol) throw DomainError("DensityOperator: not Hermitian");
  if (std::abs(rho_.trace().real() - 1.0) > kDensityTraceTol || std::abs(rho_.trace().imag()) > kDensityTraceTol) {
    throw DomainError("DensityOperator: trace is not 1");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(rho_.matrix()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < -kDensityPositivityTol) throw DomainError("DensityOperator: not positive");
}

DensityOperator DensityOperator::from_pure(const PureState& psi) {
  const Vector& v = psi.amplitudes();
  return DensityOperator(Operator(v * v.adjoint(), psi.factor_dims()), Trusted{});
}

double DensityOperator::purity() const {
  // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
  return matrix().squaredNorm();
}

// ---------------------------------------------------- DiagonalHamiltonian

DiagonalHamiltonian::DiagonalHamiltonian(RealVector energies, Dims factor_dims)
    : e_(std::move(energies)), dims_(std::move(factor_dims)) {
  if (product(dims_) != static_cast<std::size_t>(e_.size())) {
    throw DimensionError("DiagonalHamiltonian: factor dims do not multiply to the energy count");
  }
}

DiagonalHamiltonian DiagonalHamiltonian::from_operator(const Operator& h, double tol) {
  if (!h.is_diagonal(tol) || h.matrix().diagonal().imag().cwiseAbs().maxCoeff() > tol) {
    throw StructureError("generator is not diagonal in the computational product basis");
  }
  return DiagonalHamiltonian(h.matrix().diagonal().real(), h.factor_dims());
}

Operator DiagonalHamiltonian::to_operator() const {
  return Operator(Matrix(e_.cast<cplx>().asDiagonal()), dims_);
}

DiagonalHamiltonian with_leading_identity(const Dims& spectator, const DiagonalHamiltonian& h) {
  const auto reps = static_cast<Eigen::Index>(product(spectator));
  const auto n = static_cast<Eigen::Index>(h.dim());
  RealVector e(reps * n);
  for (Eigen::Index s = 0; s < reps; ++s) e.segment(s * n, n) = h.energies();
  return DiagonalHamiltonian(std::move(e), concat(spectator, h.factor_dims()));
}

// -------------------------------------------------- SpectralDecomposition

std::vector<std::size_t> SpectralDecomposition::multiplicities() const {
  std::vector<std::size_t> out(size());
  for (std::size_t k = 0; k < size(); ++k) out[k] = multiplicity(k);
  return out;
}

Operator SpectralDecomposition::projector(std::size_t k) const {
  const auto first = static_cast<Eigen::Index>(offsets.at(k));
  const auto count = static_cast<Eigen::Index>(multiplicity(k));
  const auto block = eigenvectors.middleCols(first, count);
  return Operator(block * block.adjoint(), factor_dims);
}

Operator SpectralDecomposition::reconstruct() const {
  return Operator(eigenvectors * raw_eigenvalues.cast<cplx>().asDiagonal() * eigenvectors.adjoint(), factor_dims);
}

// ------------------------------------------------------------- operations

Operator tensor(const Operator& a, const Operator& b) {
  const Eigen::Index na = a.matrix().rows();
  const Eigen::Index nb = b.matrix().rows();
  Matrix out(na * nb, na * nb);
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < na; ++j) out.block(i * nb, j * nb, nb, nb) = a.matrix()(i, j) * b.matrix();
  return Operator(std::move(out), concat(a.factor_dims(), b.factor_dims()));
}

PureState tensor(const PureState& a, const PureState& b) {
  const Eigen::Index na = a.amplitudes().size();
  const Eigen::Index nb = b.amplitudes().size();
  Vector out(na * nb);
  for (Eigen::Index i = 0; i < na; ++i) out.segment(i * nb, nb) = a.amplitudes()(i) * b.amplitudes();
  return PureState(std::move(out), concat(a.factor_dims(), b.factor_dims()), 1e-10);
}

Operator embed(const Operator& local, std::size_t position, const Dims& dims) {
  if (position >= dims.size() || dims[position] != local.dim()) {
    throw DimensionError("embed: local operator does not match the target factor");
  }
  const Dims left(dims.begin(), dims.begin() + static_cast<std::ptrdiff_t>(position));
  const Dims right(dims.begin() + static_cast<std::ptrdiff_t>(position) + 1, dims.end());
  Operator out(local.matrix(), Dims{local.dim()});
  if (!left.empty()) out = tensor(Operator::identity(left), out);
  if (!right.empty()) out = tensor(out, Operator::identity(right));
  return out;
}

Operator partial_trace(const Operator& a, std::span<const std::size_t> keep) {
  const TraceSplit s = split_for_trace(a.factor_dims(), keep);
  const auto nk = static_cast<Eigen::Index>(s.kept_offsets.size());
  Matrix out = Matrix::Zero(nk, nk);
  const Matrix& m = a.matrix();
  for (Eigen::Index i = 0; i < nk; ++i) {
    for (Eigen::Index j = 0; j < nk; ++j) {
      cplx acc = 0.0;
      for (std::size_t t : s.traced_offsets) {
        acc += m(static_cast<Eigen::Index>(s.kept_offsets[static_cast<std::size_t>(i)] + t),
                 static_cast<Eigen::Index>(s.kept_offsets[static_cast<std::size_t>(j)] + t));
      }
      out(i, j) = acc;
    }
  }
  return Operator(std::move(out), s.kept_dims);
}

DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> keep) {
  Operator r = partial_trace(rho.op(), keep);
  return DensityOperator(Operator(hermitian_part(r.matrix()), r.factor_dims()), DensityOperator::Trusted{});
}

DensityOperator partial_trace(const PureState& psi, std::span<const std::size_t> keep) {
  const TraceSplit s = split_for_trace(psi.factor_dims(), keep);
  const auto nk = static_cast<Eigen::Index>(s.kept_offsets.size());
  const auto nt = static_cast<Eigen::Index>(s.traced_offsets.size());
  Matrix block(nk, nt);
  for (Eigen::Index i = 0; i < nk; ++i)
    for (Eigen::Index t = 0; t < nt; ++t)
      block(i, t) = psi.amplitudes()(static_cast<Eigen::Index>(s.kept_offsets[static_cast<std::size_t>(i)] +
                                                               s.traced_offsets[static_cast<std::size_t>(t)]));
  const Matrix rho = block * block.adjoint();
  return DensityOperator(Operator(hermitian_part(rho), s.kept_dims), DensityOperator::Trusted{});
}

SpectralDecomposition spectral(const Operator& h, double group_tol) {
  if (!(group_tol >= 0.0)) throw DomainError("spectral: group_tol must be non-negative");
  require_hermitian(h.matrix(), "spectral");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h.matrix()));
  if (es.info() != Eigen::Success) throw DomainError("spectral: eigensolver did not converge");

  SpectralDecomposition sd;
  sd.raw_eigenvalues = es.eigenvalues();
  sd.eigenvectors = es.eigenvectors();
  sd.group_tol = group_tol;
  sd.factor_dims = h.factor_dims();

  const RealVector& w = sd.raw_eigenvalues;
  const Eigen::Index n = w.size();
  const double threshold = group_tol * std::max(std::abs(w(0)), std::abs(w(n - 1)));
  sd.offsets.push_back(0);
  for (Eigen::Index i = 1; i < n; ++i)
    if (w(i) - w(i - 1) > threshold) sd.offsets.push_back(static_cast<std::size_t>(i));
  sd.offsets.push_back(static_cast<std::size_t>(n));

  for (std::size_t k = 0; k + 1 < sd.offsets.size(); ++k) {
    const auto first = static_cast<Eigen::Index>(sd.offsets[k]);
    const auto count = static_cast<Eigen::Index>(sd.offsets[k + 1] - sd.offsets[k]);
    sd.eigenvalues.push_back(w.segment(first, count).mean());
  }
  return sd;
}

Operator evolve_unitary(const SpectralDecomposition& sd, double t) {
  const Vector phases = (sd.raw_eigenvalues * (-t)).unaryExpr([](double a) { return std::polar(1.0, a); });
  return Operator(sd.eigenvectors * phases.asDiagonal() * sd.eigenvectors.adjoint(), sd.factor_dims);
}

Operator evolve_unitary(const Operator& h, double t) { return evolve_unitary(spectral(h), t); }

Operator commutator(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw DimensionError("commutator: operands have different dimensions");
  return Operator(a.matrix() * b.matrix() - b.matrix() * a.matrix(), a.factor_dims());
}

double commutator_norm(const Operator& a, const Operator& b) { return commutator(a, b).norm(); }

namespace pauli {

Operator x() {
  Matrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return Operator(std::move(m));
}

Operator y() {
  Matrix m(2, 2);
  m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
  return Operator(std::move(m));
}

Operator z() {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return Operator(std::move(m));
}

Operator identity() { return Operator::identity({2}); }

}  // namespace pauli

}  // namespace decoh
