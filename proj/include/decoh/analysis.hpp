#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decoh/evolution.hpp"
#include "decoh/linalg.hpp"

namespace decoh {

// Off-diagonal factors of the reduced system-pointer state plus companion
// traces. r[j](a, b) = <e_b(t_j)|e_a(t_j)> between branches labels[a] and
// labels[b].
//
// In an orthonormal environment basis {|e_l>} the sum
//   sum_l <e_l|e_i><e_j|e_l>
// collapses to <e_j|e_i> by completeness, so the overlap is stored directly.
struct DecoherenceSeries {
  TimeGrid grid;
  std::vector<std::size_t> labels;
  std::vector<Matrix> r;
  std::vector<double> purity;
  std::vector<double> offdiag;
  std::map<std::string, std::vector<double>> expectations;

  std::size_t size() const { return r.size(); }
  // max_{a != b} |r_ab(t_j)|; 0 for a single branch.
  double max_offdiag_factor(std::size_t j) const;
};

DecoherenceSeries decoherence_factors(const BranchStates& branches);

inline constexpr double kGramTol = 1e-10;

// sqrt(sum_{i != j} |<b_i|rho|b_j>|^2). Throws DomainError when the basis is
// not orthonormal (Gram deviation > kGramTol) or does not span the space.
double off_diagonality(const DensityOperator& rho, std::span<const Vector> basis);
// Columns of `basis` are the basis vectors.
double off_diagonality(const DensityOperator& rho, const Matrix& basis);

// First grid time with max_{i != j} |r_ij| <= threshold, if any.
std::optional<double> decoherence_time(const DecoherenceSeries& series, double threshold);

struct Convergence {
  bool converged = false;
  double settled = 0.0;  // trailing-window mean
  double spread = 0.0;   // trailing-window max - min
};

inline constexpr double kDefaultConvergenceTol = 0.02;
inline constexpr double kDefaultConvergenceFraction = 0.2;

Convergence convergence_check(std::span<const double> series, std::size_t window, double tol = kDefaultConvergenceTol);
// Window of the final 20% of the series (at least one point).
std::size_t default_convergence_window(std::size_t series_length);

// 1/2 || a - b ||_1
double trace_distance(const DensityOperator& a, const DensityOperator& b);
double compare_to_collapse(const DensityOperator& rho_r, const DensityOperator& rho_c);

}  // namespace decoh
