#include <doctest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>
#include <vector>

#include "fxhhw/error.hpp"
#include "fxhhw/integrators.hpp"

using namespace fxhhw;

namespace {

// Random sparse matrix with eigenvalues in the left half-plane.
SparseMatrix random_stable(int n, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pick(0.0, 1.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && pick(rng) < density) a(i, j) = u(rng);
  // Diagonal dominance by a margin makes every Gershgorin disc lie left of -1.
  for (int i = 0; i < n; ++i) a(i, i) = -(a.row(i).cwiseAbs().sum() + 1.0 + pick(rng));
  return a.sparseView();
}

double rel_err(const Eigen::VectorXd& x, const Eigen::VectorXd& ref) { return (x - ref).norm() / ref.norm(); }

}  // namespace

TEST_CASE("dense Pade exponential against the Eigen reference") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  for (double scale : {0.01, 1.0, 30.0}) {
    Eigen::MatrixXd a(12, 12);
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j) a(i, j) = scale * n01(rng) / 4.0;
    const Eigen::MatrixXd ref = a.exp();
    CHECK((expm_dense(a) - ref).norm() <= 1e-11 * ref.norm());
  }
  CHECK((expm_dense(Eigen::MatrixXd::Zero(3, 3)) - Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-15);
}

TEST_CASE("Krylov action matches the dense exponential on random stable matrices") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SparseMatrix a = random_stable(50, 0.1, seed);
    Eigen::VectorXd v = Eigen::VectorXd::Random(50);
    KrylovConfig cfg;
    cfg.Y = 30;
    cfg.tau = 0.5;
    KrylovStats st;
    const Eigen::VectorXd x = krylov_expm_action(a, v, cfg, &st);
    const Eigen::VectorXd ref = (0.5 * Eigen::MatrixXd(a)).exp() * v;
    CHECK(rel_err(x, ref) <= 1e-8);
    CHECK(st.subspace_used <= 30);
  }
}

TEST_CASE("Krylov action without substeps on a modest norm") {
  const SparseMatrix a = random_stable(50, 0.05, 99);
  const Eigen::VectorXd v = Eigen::VectorXd::Ones(50);
  KrylovConfig cfg;
  cfg.Y = 30;
  cfg.tau = 0.05;
  cfg.allow_substeps = false;
  const Eigen::VectorXd ref = (0.05 * Eigen::MatrixXd(a)).exp() * v;
  CHECK(rel_err(krylov_expm_action(a, v, cfg), ref) <= 1e-8);
  cfg.tau = 50.0;
  cfg.Y = 3;
  CHECK_THROWS_AS(krylov_expm_action(a, v, cfg), KrylovError);
}

TEST_CASE("Krylov breakdown gives exact results") {
  KrylovConfig cfg;
  cfg.Y = 20;
  // Zero matrix: exp(0) v = v.
  SparseMatrix z(8, 8);
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(8, 1.0, 8.0);
  CHECK(krylov_expm_action(z, v, cfg) == v);

  // Nilpotent shift: exp(N) v is a finite Taylor sum.
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i + 1 < 6; ++i) n(i, i + 1) = 2.0;
  KrylovStats st;
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(6);
  const Eigen::VectorXd x = krylov_expm_action(n.sparseView(), w, cfg, &st);
  CHECK(st.breakdown);
  CHECK(rel_err(x, n.exp() * w) <= 1e-13);

  // Rank-one matrix: the Krylov space has dimension two.
  const Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(10, -1.0, 1.0);
  const Eigen::VectorXd y = Eigen::VectorXd::Ones(10) * 0.1;
  const Eigen::MatrixXd r1 = u * y.transpose();
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(10, 0.5, 2.0);
  KrylovStats st2;
  const Eigen::VectorXd xr = krylov_expm_action(r1.sparseView(), b, cfg, &st2);
  CHECK(st2.breakdown);
  CHECK(st2.subspace_used <= 2);
  CHECK(rel_err(xr, r1.exp() * b) <= 1e-13);
}

TEST_CASE("Krylov action on a diagonal matrix") {
  const int n = 12;
  Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(n, -3.0, 0.5);
  const SparseMatrix a = Eigen::MatrixXd(d.asDiagonal()).sparseView();
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0);
  KrylovConfig cfg;
  cfg.Y = n;
  const Eigen::VectorXd x = krylov_expm_action(a, v, cfg);
  for (int i = 0; i < n; ++i) CHECK(x(i) == doctest::Approx(std::exp(d(i)) * v(i)).epsilon(1e-10));
}

TEST_CASE("Krylov input validation") {
  SparseMatrix a(4, 4);
  a.setIdentity();
  KrylovConfig cfg;
  CHECK_THROWS_AS(krylov_expm_action(a, Eigen::VectorXd::Zero(4), cfg), InvalidArgument);
  CHECK_THROWS_AS(krylov_expm_action(a, Eigen::VectorXd::Ones(3), cfg), InvalidArgument);
  cfg.Y = 0;
  CHECK_THROWS_AS(krylov_expm_action(a, Eigen::VectorXd::Ones(4), cfg), InvalidArgument);
}

namespace {

double midpoint_scalar(double lambda, double b, double horizon, int steps) {
  MidpointConfig cfg;
  cfg.delta_tau = horizon / steps;
  cfg.steps = steps;
  Eigen::VectorXd v0(1);
  v0(0) = 1.0;
  const auto x = modified_midpoint_solve(
      [&](double tau, const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = (lambda + b * tau) * x; }, v0, cfg);
  return x(0);
}

}  // namespace

TEST_CASE("midpoint is second order on scalar problems") {
  const double T = 1.0;
  for (double lambda : {-2.0, 0.7}) {
    std::vector<double> err;
    for (int n : {10, 20, 40, 80}) err.push_back(std::abs(midpoint_scalar(lambda, 0.0, T, n) - std::exp(lambda * T)));
    for (std::size_t k = 1; k < err.size(); ++k) CHECK(std::log2(err[k - 1] / err[k]) == doctest::Approx(2.0).epsilon(0.1));
  }
  // A(tau) = a + b tau: exact solution exp(a T + b T^2 / 2).
  std::vector<double> err;
  for (int n : {10, 20, 40, 80})
    err.push_back(std::abs(midpoint_scalar(-1.0, 0.8, T, n) - std::exp(-1.0 * T + 0.8 * T * T / 2.0)));
  for (std::size_t k = 1; k < err.size(); ++k) CHECK(std::log2(err[k - 1] / err[k]) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("midpoint is second order on a 10x10 system") {
  const SparseMatrix a = random_stable(10, 0.4, 5);
  const Eigen::VectorXd v0 = Eigen::VectorXd::LinSpaced(10, 1.0, -1.0);
  const Eigen::VectorXd ref = Eigen::MatrixXd(a).exp() * v0;
  std::vector<double> err;
  for (int n : {40, 80, 160, 320}) {
    MidpointConfig cfg;
    cfg.delta_tau = 1.0 / n;
    cfg.steps = n;
    MidpointStats st;
    err.push_back(rel_err(modified_midpoint_solve(a, v0, cfg, &st), ref));
    CHECK(st.macro_steps == n);
  }
  for (std::size_t k = 1; k < err.size(); ++k) CHECK(std::log2(err[k - 1] / err[k]) >= 1.8);
}

TEST_CASE("midpoint trivial and unstable cases") {
  SparseMatrix z(3, 3);
  const Eigen::VectorXd v = Eigen::VectorXd::Ones(3);
  MidpointConfig cfg;
  cfg.delta_tau = 1.0;
  cfg.steps = 1;
  CHECK(modified_midpoint_solve(z, v, cfg) == v);

  // Far beyond the stability bound the guard aborts.
  SparseMatrix a(1, 1);
  a.insert(0, 0) = -400.0;
  MidpointConfig bad;
  bad.delta_tau = 0.1;
  bad.steps = 200;
  CHECK_THROWS_AS(modified_midpoint_solve(a, Eigen::VectorXd::Ones(1), bad), InstabilityError);

  MidpointConfig none;
  CHECK_THROWS_AS(modified_midpoint_solve(z, v, none), InvalidArgument);
}

TEST_CASE("spectral estimates") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d.diagonal() << -1.0, -2.0, -3.0;
  const auto rep = estimate_lambda_max(d.sparseView());
  CHECK(rep.re_lambda_max == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(rep.dominant.real() == doctest::Approx(-3.0).epsilon(1e-6));
  CHECK(rep.symmetric_lambda_max == doctest::Approx(-1.0).epsilon(1e-6));

  // Larger diagonal plus a skew part: rightmost eigenvalue known exactly.
  const int n = 200;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) a(i, i) = -1.0 - i;
  const auto r2 = estimate_lambda_max(a.sparseView());
  CHECK(r2.converged);
  CHECK(r2.dominant.real() == doctest::Approx(-200.0).epsilon(1e-6));
  CHECK(r2.re_lambda_max == doctest::Approx(-1.0).epsilon(1e-4));
}
