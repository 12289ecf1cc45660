#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "decoh/analysis.hpp"
#include "decoh/errors.hpp"
#include "decoh/models.hpp"
#include "oracles.hpp"

using namespace decoh;

namespace {

struct BathRun {
  MeasurementModel model;
  SpinBathParams bath;
  StateTrajectory traj;
};

BathRun dephasing_run(std::uint64_t seed, std::size_t n_env, std::vector<cplx> c, double t_end, std::size_t steps) {
  oracle::Random rng(seed);
  SpinBathParams p;
  p.n_env = n_env;
  for (std::size_t k = 0; k < n_env; ++k) {
    p.couplings.push_back(rng.uniform(0.5, 1.5));
    p.env_energies.push_back(0.0);
  }
  MeasurementModel m;
  m.coefficients = std::move(c);
  m.env_dims = Dims(n_env, 2);
  m.env0 = uniform_env_state(n_env);
  StateTrajectory traj =
      evolve(with_leading_identity({2}, spin_bath_dephasing(p)), build_correlated_state(m), TimeGrid::make(0, t_end, steps));
  return {m, p, traj};
}

DecoherenceSeries cosine_series(double g, std::size_t steps, double t_end) {
  DecoherenceSeries s;
  s.grid = TimeGrid::make(0.0, t_end, steps);
  s.labels = {0, 1};
  for (std::size_t j = 0; j < s.grid.size(); ++j) {
    const double r = std::cos(2.0 * g * s.grid.at(j));
    Matrix m(2, 2);
    m << 1.0, r, r, 1.0;
    s.r.push_back(m);
  }
  return s;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("decoherence factors") {
  const double a = 1.0 / std::sqrt(2.0);
  const BathRun run = dephasing_run(301, 6, {a, a}, 3.0, 300);
  const DecoherenceSeries s = decoherence_factors(branch_states(run.traj, run.model.coefficients));
  SUBCASE("unity at t = 0 and on the diagonal") {
    CHECK(std::abs(s.r[0](0, 1) - 1.0) <= 1e-14);
    for (const Matrix& r : s.r) {
      CHECK(r(0, 0) == cplx(1.0));
      CHECK(r(1, 1) == cplx(1.0));
    }
  }
  SUBCASE("Hermitian and bounded by one") {
    for (const Matrix& r : s.r) {
      CHECK(std::abs(r(0, 1) - std::conj(r(1, 0))) == 0.0);
      CHECK(std::abs(r(0, 1)) <= 1.0 + 1e-12);
    }
  }
  SUBCASE("modulus follows the cosine product") {
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double expected = std::abs(oracle::cos_product(run.bath.couplings, 1.0, s.grid.at(j)));
      CHECK(std::abs(std::abs(s.r[j](0, 1)) - expected) <= 1e-12);
    }
  }
}

TEST_CASE("off-diagonality") {
  SUBCASE("diagonal states in their own basis") {
    Matrix d = Matrix::Zero(3, 3);
    d.diagonal() << 0.2, 0.3, 0.5;
    CHECK(off_diagonality(DensityOperator(Operator(d, {3})), Matrix(Matrix::Identity(3, 3))) == 0.0);
  }
  SUBCASE("plus state in the computational basis") {
    const DensityOperator plus = DensityOperator::from_pure(PureState::normalized(Vector::Ones(2), {2}));
    CHECK(off_diagonality(plus, Matrix(Matrix::Identity(2, 2))) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    std::vector<Vector> basis{Vector::Unit(2, 0), Vector::Unit(2, 1)};
    CHECK(off_diagonality(plus, basis) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  }
  SUBCASE("non-orthonormal or incomplete bases") {
    const DensityOperator rho(Operator(0.5 * Matrix::Identity(2, 2), {2}));
    Matrix skewed = Matrix::Identity(2, 2);
    skewed(0, 1) = 0.1;
    CHECK_THROWS_AS(off_diagonality(rho, skewed), DomainError);
    std::vector<Vector> one{Vector::Unit(2, 0)};
    CHECK_THROWS_AS(off_diagonality(rho, one), DomainError);
  }
  SUBCASE("reduced measurement state matches the weighted decoherence factors") {
    oracle::Random rng(302);
    const Vector c = rng.state(2);
    const BathRun run = dephasing_run(303, 5, {c(0), c(1)}, 2.0, 40);
    const DecoherenceSeries s = decoherence_factors(branch_states(run.traj, run.model.coefficients));
    const std::vector<std::size_t> keep{0, 1};
    for (std::size_t j = 0; j < s.size(); ++j) {
      const DensityOperator rho = partial_trace(run.traj.state(j), keep);
      const double expected = std::sqrt(2.0) * std::abs(c(0) * c(1) * s.r[j](0, 1));
      CHECK(std::abs(off_diagonality(rho, Matrix(Matrix::Identity(4, 4))) - expected) <= 1e-10);
    }
  }
}

TEST_CASE("decoherence time") {
  SUBCASE("cosine crosses one half at pi / 6g") {
    const double g = 1.3;
    const DecoherenceSeries s = cosine_series(g, 20000, 1.0);
    const auto t = decoherence_time(s, 0.5);
    REQUIRE(t);
    CHECK(std::abs(*t - std::numbers::pi / (6.0 * g)) <= 1.0 / 20000.0);
  }
  SUBCASE("threshold one returns the first grid time") {
    const auto t = decoherence_time(cosine_series(1.0, 10, 1.0), 1.0);
    REQUIRE(t);
    CHECK(*t == 0.0);
  }
  SUBCASE("never reached") { CHECK_FALSE(decoherence_time(cosine_series(1.0, 10, 0.1), 0.01)); }
  SUBCASE("threshold outside (0, 1]") {
    CHECK_THROWS_AS(decoherence_time(cosine_series(1.0, 10, 1.0), 0.0), DomainError);
    CHECK_THROWS_AS(decoherence_time(cosine_series(1.0, 10, 1.0), 1.5), DomainError);
  }
  SUBCASE("a twelve-spin bath decoheres on the short-time Gaussian scale") {
    oracle::Random rng(304);
    std::vector<double> g;
    double g2 = 0.0;
    for (int k = 0; k < 12; ++k) {
      g.push_back(rng.uniform(0.5, 1.5));
      g2 += g.back() * g.back();
    }
    DecoherenceSeries s;
    s.grid = TimeGrid::make(0.0, 3.0, 3000);
    s.labels = {0, 1};
    for (std::size_t j = 0; j < s.grid.size(); ++j) {
      const double r = oracle::cos_product(g, 1.0, s.grid.at(j));
      Matrix m(2, 2);
      m << 1.0, r, r, 1.0;
      s.r.push_back(m);
    }
    const auto t = decoherence_time(s, 0.01);
    REQUIRE(t);
    // prod cos(2 g t) ~ exp(-2 t^2 sum g^2) before any revival
    const double gaussian = std::sqrt(std::log(100.0) / (2.0 * g2));
    CHECK(*t <= 1.5 * gaussian);
    CHECK(*t >= 0.5 * gaussian);
  }
}

TEST_CASE("convergence check") {
  const std::vector<double> flat(50, 0.25);
  const Convergence c = convergence_check(flat, 10);
  CHECK(c.converged);
  CHECK(c.settled == 0.25);

  std::vector<double> wave;
  for (int j = 0; j < 200; ++j) wave.push_back(std::cos(0.1 * j));
  CHECK_FALSE(convergence_check(wave, 40).converged);

  CHECK_THROWS_AS(convergence_check(flat, 0), DomainError);
  CHECK_THROWS_AS(convergence_check(flat, 51), DomainError);
  CHECK(default_convergence_window(2001) == 400);
  CHECK(default_convergence_window(3) == 1);
}

TEST_CASE("pointer coherence of a twelve-spin bath settles near zero") {
  const double a = 1.0 / std::sqrt(2.0);
  const BathRun run = dephasing_run(305, 12, {a, a}, 4.0, 400);
  const Operator sxx = tensor(pauli::x(), pauli::x());
  const std::vector<std::size_t> keep{0, 1};
  std::vector<double> series;
  for (std::size_t j = 0; j < run.traj.size(); ++j) series.push_back(expectation(sxx, partial_trace(run.traj.state(j), keep)));
  const Convergence c = convergence_check(series, default_convergence_window(series.size()));
  CHECK(c.converged);
  CHECK(std::abs(c.settled) <= 0.02);
}

TEST_CASE("collapse comparison") {
  const DensityOperator plus = DensityOperator::from_pure(PureState::normalized(Vector::Ones(2), {2}));
  const DensityOperator mixed(Operator(0.5 * Matrix::Identity(2, 2), {2}));
  CHECK(compare_to_collapse(plus, plus) <= 1e-15);
  CHECK(compare_to_collapse(plus, mixed) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(trace_distance(plus, DensityOperator(Operator(0.25 * Matrix::Identity(4, 4), {4}))), DimensionError);

  SUBCASE("bounded by the weighted decoherence factors once they are small") {
    oracle::Random rng(306);
    const Vector c = rng.state(2);
    const BathRun run = dephasing_run(307, 10, {c(0), c(1)}, 3.0, 300);
    const DecoherenceSeries s = decoherence_factors(branch_states(run.traj, run.model.coefficients));
    const DensityOperator rho_c = build_collapsed_mixture(run.model);
    const std::vector<std::size_t> keep{0, 1};
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double bound = 2.0 * std::abs(c(0) * c(1) * s.r[j](0, 1));
      const double dist = trace_distance(partial_trace(run.traj.state(j), keep), rho_c);
      CHECK(dist <= bound + 1e-12);
    }
  }
}

}  // TEST_SUITE
