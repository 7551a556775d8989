#include <doctest.h>

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "fxhhw/error.hpp"
#include "fxhhw/grid.hpp"
#include "fxhhw/rbf_stencil.hpp"

using namespace fxhhw;
using namespace fxhhw::rbf;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Polynomial finite-difference weights for the given derivative order on
// arbitrary offsets, from the transposed Vandermonde system.
std::vector<double> polynomial_fd_weights(const std::vector<double>& x, int order) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd v(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) v(k, j) = std::pow(x[j], k);
  double fact = 1.0;
  for (int k = 2; k <= order; ++k) fact *= k;
  rhs(order) = fact;
  const Eigen::VectorXd w = v.fullPivLu().solve(rhs);
  return {w.data(), w.data() + n};
}

double apply_to(const WeightSet& w, double x0, double (*f)(double)) {
  double acc = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) acc += w.weights[j] * f(x0 + w.node_offsets[j]);
  return acc;
}

}  // namespace

TEST_CASE("gaussian basis values") {
  CHECK(gaussian_rbf(0.0, 3.0) == 1.0);
  CHECK(gaussian_rbf(2.5, 2.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(gaussian_rbf(2.0, 1.0) == doctest::Approx(0.0183156388887342).epsilon(1e-12));
  CHECK_THROWS_AS(gaussian_rbf(1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(gaussian_rbf(-1.0, 1.0), InvalidArgument);
}

TEST_CASE("first-derivative weights on a uniform stencil are antisymmetric") {
  const double h = 0.1, c = 3.0;
  const auto w = first_derivative_weights({h, 1.0, c});
  const double edge = (c * c + h * h) / (2.0 * c * c * h);
  CHECK(w.weights[0] == doctest::Approx(-edge).epsilon(1e-14));
  CHECK(std::abs(w.weights[1]) < 1e-12);
  CHECK(w.weights[2] == doctest::Approx(edge).epsilon(1e-14));
}

TEST_CASE("first-derivative weights reduce to classical non-uniform differences") {
  for (double omega : {0.5, 1.0, 1.7, 3.0}) {
    const double h = 0.37;
    const auto w = first_derivative_weights({h, omega, kInf});
    const auto ref = polynomial_fd_weights({-h, 0.0, omega * h}, 1);
    CHECK(w.weights[0] == doctest::Approx(-omega / (h * (omega + 1.0))).epsilon(1e-13));
    CHECK(w.weights[1] == doctest::Approx((omega - 1.0) / (h * omega)).epsilon(1e-13));
    CHECK(w.weights[2] == doctest::Approx(1.0 / (h * omega * (omega + 1.0))).epsilon(1e-13));
    for (int j = 0; j < 3; ++j) CHECK(std::abs(w.weights[j] - ref[j]) <= 1e-8 * (1.0 + std::abs(ref[j])));
  }
}

TEST_CASE("second-derivative weights reduce to classical non-uniform differences") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ua(1.1, 3.0), ub(0.4, 2.5);
  for (int trial = 0; trial < 50; ++trial) {
    const double h = 0.05, a = ua(rng), b = ub(rng);
    const auto w = second_derivative_weights({h, a, b, kInf});
    const auto ref = polynomial_fd_weights({-a * h, -h, 0.0, b * h}, 2);
    for (int j = 0; j < 4; ++j) CHECK(std::abs(w.weights[j] - ref[j]) <= 1e-8 * (1.0 + std::abs(ref[j])));
  }
}

TEST_CASE("near-boundary and boundary rows in the polynomial limit") {
  const double h = 0.2;
  const auto nb = near_boundary_second_weights(h, 1.0, kInf);
  CHECK(nb.weights[0] == doctest::Approx(1.0 / (h * h)));
  CHECK(nb.weights[1] == doctest::Approx(-2.0 / (h * h)));
  CHECK(nb.weights[2] == doctest::Approx(1.0 / (h * h)));

  const auto bf = boundary_first_weights(1.0, kInf);
  CHECK(bf.weights[0] == -1.0);
  CHECK(bf.weights[1] == 1.0);
}

TEST_CASE("boundary rows for finite shape parameters") {
  const auto bf = boundary_first_weights(0.5, 2.0);
  CHECK(bf.weights[0] == doctest::Approx(-1.875).epsilon(1e-15));
  CHECK(bf.weights[1] == doctest::Approx(2.0).epsilon(1e-15));
  // Applied to a constant the row leaves exactly h/c^2.
  CHECK(bf.weights[0] + bf.weights[1] == doctest::Approx(0.5 / 4.0).epsilon(1e-14));

  const auto b1 = boundary_second_weights(1.0);
  CHECK(b1.weights[0] == -4.0);
  CHECK(b1.weights[1] == 2.0);
  const auto b2 = boundary_second_weights(2.0);
  CHECK(b2.weights[0] == doctest::Approx(-1.0));
  CHECK(b2.weights[1] == doctest::Approx(0.5));
  for (double c : {0.3, 1.0, 7.0, 120.0}) {
    const auto b = boundary_second_weights(c);
    CHECK(b.weights[0] + b.weights[1] == doctest::Approx(-2.0 / (c * c)).epsilon(1e-14));
  }
}

TEST_CASE("second-derivative weights on quadratics and constants") {
  // Sum of weights times x^2 recovers 2 up to O(h^2) corrections in 1/c^2;
  // the weights annihilate constants up to rounding.
  const double c = 5.0;
  for (double h : {0.1, 0.05, 0.025}) {
    const auto w = second_derivative_weights({h, 2.0, 1.0, c});
    const double val = apply_to(w, 0.0, [](double x) { return x * x; });
    CHECK(val == doctest::Approx(2.0).epsilon(0.01));
    const double s = std::abs(w.weights[0] + w.weights[1] + w.weights[2] + w.weights[3]);
    CHECK(s <= 1e-12 * std::abs(w.weights[2]));
  }
}

TEST_CASE("near-boundary second derivative is first order on linear functions") {
  double prev = 0.0;
  for (double h : {0.1, 0.05, 0.025}) {
    const double c = 10.0 / h;
    const auto w = near_boundary_second_weights(h, 1.3, c);
    const double val = std::abs(apply_to(w, 1.0, [](double x) { return x; }));
    if (prev > 0.0) CHECK(val < prev);
    prev = val;
  }
}

TEST_CASE("derivative approximation orders on sin with c = 10/h") {
  auto order_first = [](double omega) {
    std::vector<double> err;
    for (double h : {0.1, 0.05, 0.025, 0.0125}) {
      const auto w = first_derivative_weights({h, omega, 10.0 / h});
      err.push_back(std::abs(apply_to(w, 0.7, [](double x) { return std::sin(x); }) - std::cos(0.7)));
    }
    return std::log2(err[2] / err[3]);
  };
  auto order_second = [](double a, double b) {
    std::vector<double> err;
    for (double h : {0.1, 0.05, 0.025, 0.0125}) {
      const auto w = second_derivative_weights({h, a, b, 10.0 / h});
      err.push_back(std::abs(apply_to(w, 0.7, [](double x) { return std::sin(x); }) + std::sin(0.7)));
    }
    return std::log2(err[2] / err[3]);
  };
  CHECK(order_first(1.0) >= 1.8);
  CHECK(order_first(1.6) >= 1.8);
  CHECK(order_second(2.0, 1.0) >= 1.8);
  CHECK(order_second(2.4, 1.3) >= 1.8);
}

TEST_CASE("collocation oracle structure") {
  const double h = 0.1, c = 2.0;
  const std::vector<double> sym = {-h, 0.0, h};
  const auto w = collocation_weights_oracle(sym, c, 1);
  CHECK(w.weights[0] == doctest::Approx(-w.weights[2]).epsilon(1e-10));
  CHECK(std::abs(w.weights[1]) < 1e-9);

  // Two nodes: the oracle reproduces the boundary row up to O(h^2/c^2).
  const std::vector<double> two = {0.0, 0.5};
  const auto o = collocation_weights_oracle(two, 20.0, 1);
  const auto b = boundary_first_weights(0.5, 20.0);
  CHECK(o.weights[0] == doctest::Approx(b.weights[0]).epsilon(1e-3));
  CHECK(o.weights[1] == doctest::Approx(b.weights[1]).epsilon(1e-3));
}

TEST_CASE("closed-form weights agree with the collocation oracle to leading order") {
  // The closed forms are small-h/c expansions of the collocation solution:
  // agreement improves as (h/c)^2.
  std::vector<double> gaps;
  for (double c : {1.0, 2.0, 4.0}) {
    const auto w = first_derivative_weights({0.1, 1.5, c});
    const auto o = collocation_weights_oracle(w.node_offsets, c, 1);
    double gap = 0.0;
    for (int j = 0; j < 3; ++j) gap = std::max(gap, std::abs(w.weights[j] - o.weights[j]) / std::abs(o.weights[j]));
    gaps.push_back(gap);
  }
  CHECK(gaps[0] < 0.05);
  CHECK(gaps[1] < gaps[0] / 3.0);
  CHECK(gaps[2] < gaps[1] / 3.0);
}

TEST_CASE("oracle refuses ill-conditioned systems") {
  const std::vector<double> nodes = {-1e-6, 0.0, 1e-6, 2e-6};
  CHECK_THROWS_AS(collocation_weights_oracle(nodes, 100.0, 2), ConditioningError);
}

TEST_CASE("invalid stencil geometries") {
  CHECK_THROWS_AS(first_derivative_weights({0.0, 1.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(first_derivative_weights({0.1, 1.0, -1.0}), InvalidArgument);
  CHECK_THROWS_AS(first_derivative_weights({0.1, 0.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(first_derivative_weights({0.1, 1.0, 0.05}), InvalidArgument);
  CHECK_THROWS_AS(second_derivative_weights({0.1, 1.0, 1.0, 5.0}), InvalidArgument);
  CHECK_THROWS_AS(near_boundary_second_weights(0.1, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("shape parameter close to the step emits a warning") {
  std::vector<std::string> codes;
  set_warning_handler([&](const Warning& w) { codes.push_back(w.code); });
  first_derivative_weights({0.1, 1.0, 0.3});
  set_warning_handler(nullptr);
  REQUIRE(codes.size() == 1);
  CHECK(codes[0] == "rbf.shape_close_to_step");
}

TEST_CASE("shape parameters follow the largest increments") {
  const auto g = make_grid({build_uniform_axis(11, 0.0, 1.0), build_uniform_axis(5, 0.0, 1.0),
                            build_uniform_axis(5, -1.0, 1.0), build_uniform_axis(5, -1.0, 1.0)});
  const auto c = shape_parameters(g);
  CHECK(c.c_s == doctest::Approx(0.2));
  CHECK(c.c_v == doctest::Approx(0.75));
  CHECK(c.c_rd == doctest::Approx(1.5));
  CHECK(c[axis_rf] == doctest::Approx(1.5));
}

TEST_CASE("published shape parameters of the stretched grids") {
  struct Row {
    std::array<int, 4> m;
    double cs, cv, cr;
  };
  // Constant mean-reversion table of the third experiment.
  const Row rows[] = {{{8, 6, 6, 6}, 1834.59, 24.25, 3.09},
                      {{10, 8, 8, 8}, 1595.55, 20.81, 2.84},
                      {{12, 10, 10, 10}, 1405.92, 18.06, 2.58},
                      {{16, 14, 10, 10}, 1130.55, 14.15, 2.58},
                      {{20, 14, 10, 10}, 942.98, 14.15, 2.58}};
  for (const auto& r : rows) {
    const auto g = build_grid(default_grid_config(r.m, 100.0, 0.04, 0.1, 0.1));
    const auto c = shape_parameters(g);
    CHECK(c.c_s == doctest::Approx(r.cs).epsilon(1e-5));
    CHECK(c.c_v == doctest::Approx(r.cv).epsilon(1e-3));
    // The published rate values carry two truncated decimals.
    CHECK(c.c_rd == doctest::Approx(r.cr).epsilon(4e-3));
    CHECK(c.c_rf == doctest::Approx(r.cr).epsilon(4e-3));
  }
  // Refinement table: m1 = 8 also has h_min = 13.02.
  const auto g8 = build_grid(default_grid_config({8, 6, 6, 6}, 100.0, 0.04, 0.1, 0.1));
  CHECK(g8.min_increment(axis_s) == doctest::Approx(13.02).epsilon(1e-3));
}
