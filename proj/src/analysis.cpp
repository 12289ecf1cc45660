#include "decoh/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "decoh/errors.hpp"

namespace decoh {

double DecoherenceSeries::max_offdiag_factor(std::size_t j) const {
  const Matrix& m = r.at(j);
  double best = 0.0;
  for (Eigen::Index a = 0; a < m.rows(); ++a)
    for (Eigen::Index b = 0; b < m.cols(); ++b)
      if (a != b) best = std::max(best, std::abs(m(a, b)));
  return best;
}

DecoherenceSeries decoherence_factors(const BranchStates& branches) {
  DecoherenceSeries s;
  s.grid = branches.grid();
  s.labels = branches.labels();
  s.r.reserve(branches.size());
  const auto nb = static_cast<Eigen::Index>(s.labels.size());
  for (std::size_t j = 0; j < branches.size(); ++j) {
    const std::vector<Vector> e = branches.at(j);
    Matrix r(nb, nb);
    for (Eigen::Index a = 0; a < nb; ++a) {
      r(a, a) = 1.0;
      for (Eigen::Index b = a + 1; b < nb; ++b) {
        // Eigen's dot conjugates its first argument: <e_b|e_a>.
        r(a, b) = e[static_cast<std::size_t>(b)].dot(e[static_cast<std::size_t>(a)]);
        r(b, a) = std::conj(r(a, b));
      }
    }
    s.r.push_back(std::move(r));
  }
  return s;
}

double off_diagonality(const DensityOperator& rho, const Matrix& basis) {
  const auto n = static_cast<Eigen::Index>(rho.dim());
  if (basis.rows() != n || basis.cols() != n) throw DomainError("off_diagonality: basis does not span the space");
  const Matrix gram = basis.adjoint() * basis;
  if (max_abs(gram - Matrix::Identity(n, n)) > kGramTol) throw DomainError("off_diagonality: basis is not orthonormal");
  Matrix in_basis = basis.adjoint() * rho.matrix() * basis;
  in_basis.diagonal().setZero();
  return in_basis.norm();
}

double off_diagonality(const DensityOperator& rho, std::span<const Vector> basis) {
  const auto n = static_cast<Eigen::Index>(rho.dim());
  Matrix b(n, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (basis[k].size() != n) throw DomainError("off_diagonality: basis vector has the wrong length");
    b.col(static_cast<Eigen::Index>(k)) = basis[k];
  }
  return off_diagonality(rho, b);
}

std::optional<double> decoherence_time(const DecoherenceSeries& series, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw DomainError("decoherence_time: threshold must lie in (0, 1]");
  // The slack absorbs the last bit of |<e|e>| = 1 at the initial time.
  const double limit = threshold + 1e-12;
  for (std::size_t j = 0; j < series.size(); ++j)
    if (series.max_offdiag_factor(j) <= limit) return series.grid.at(j);
  return std::nullopt;
}

Convergence convergence_check(std::span<const double> series, std::size_t window, double tol) {
  if (window == 0 || window > series.size()) throw DomainError("convergence_check: window must lie in [1, length]");
  const auto tail = series.subspan(series.size() - window);
  const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
  Convergence c;
  c.spread = *hi - *lo;
  c.settled = std::accumulate(tail.begin(), tail.end(), 0.0) / static_cast<double>(window);
  c.converged = c.spread <= tol;
  return c;
}

std::size_t default_convergence_window(std::size_t series_length) {
  const auto w = static_cast<std::size_t>(std::floor(kDefaultConvergenceFraction * static_cast<double>(series_length)));
  return std::clamp<std::size_t>(w, 1, std::max<std::size_t>(series_length, 1));
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  if (a.dim() != b.dim()) throw DimensionError("trace_distance: dimension mismatch");
  const Matrix diff = a.matrix() - b.matrix();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double compare_to_collapse(const DensityOperator& rho_r, const DensityOperator& rho_c) {
  return trace_distance(rho_r, rho_c);
}

}  // namespace decoh
