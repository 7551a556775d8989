#include <doctest.h>

#include <cmath>

#include "fxhhw/error.hpp"
#include "fxhhw/mc.hpp"

using namespace fxhhw;

namespace {

// Heston dynamics with zero, frozen rates.
ModelParams zero_rate_heston() {
  ModelParams p;
  p.s0 = 100.0;
  p.v0 = 0.04;
  p.rd0 = 0.0;
  p.rf0 = 0.0;
  p.kappa = 0.5;
  p.vbar = 0.05;
  p.gamma = 0.3;
  p.theta_d_params = {0.0, 0.0, 0.0};
  p.theta_f_params = {0.0, 0.0, 0.0};
  p.correlation = {-0.4, 0.0, 0.0, 0.0, 0.0, 0.0};
  return p;
}

}  // namespace

TEST_CASE("spot is a martingale under zero rates") {
  const auto p = zero_rate_heston();
  const OptionSpec near_forward{OptionKind::call, 1e-6, 1.0};
  McConfig cfg;
  cfg.paths = 40000;
  cfg.steps_per_year = 50;
  const auto est = simulate_price(p, near_forward, cfg);
  CHECK(est.paths == 40000);
  CHECK(est.std_error > 0.0);
  CHECK(std::abs(est.mean - (100.0 - 1e-6)) < 4.0 * est.std_error);
}

TEST_CASE("deterministic limit is reproduced exactly") {
  ModelParams p;
  p.s0 = 100.0;
  p.rd0 = 0.05;
  p.rf0 = 0.02;
  p.theta_d_params = {0.05, 0.0, 0.0};
  p.theta_f_params = {0.02, 0.0, 0.0};
  const OptionSpec call{OptionKind::call, 95.0, 1.0};
  McConfig cfg;
  cfg.paths = 2000;
  cfg.steps_per_year = 20;
  const auto est = simulate_price(p, call, cfg);
  const double exact = std::exp(-0.05) * (100.0 * std::exp(0.03) - 95.0);
  CHECK(est.mean == doctest::Approx(exact).epsilon(1e-10));
  CHECK(est.std_error < 1e-6);
}

TEST_CASE("estimates do not depend on the worker count") {
  const auto p = zero_rate_heston();
  const OptionSpec put{OptionKind::put, 100.0, 0.5};
  McConfig cfg;
  cfg.paths = 10000;
  cfg.steps_per_year = 40;
  cfg.batch_size = 700;
  cfg.workers = 1;
  const auto a = simulate_price(p, put, cfg);
  cfg.workers = 5;
  const auto b = simulate_price(p, put, cfg);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  cfg.seed += 1;
  const auto c = simulate_price(p, put, cfg);
  CHECK(c.mean != a.mean);
}

TEST_CASE("standard error halves with four times the paths") {
  const auto p = zero_rate_heston();
  const OptionSpec call{OptionKind::call, 100.0, 1.0};
  McConfig cfg;
  cfg.steps_per_year = 20;
  cfg.paths = 8000;
  const double se1 = simulate_price(p, call, cfg).std_error;
  cfg.paths = 32000;
  const double se4 = simulate_price(p, call, cfg).std_error;
  CHECK(se1 / se4 == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("antithetic sampling keeps the estimate unbiased") {
  const auto p = zero_rate_heston();
  const OptionSpec call{OptionKind::call, 100.0, 1.0};
  McConfig cfg;
  cfg.steps_per_year = 20;
  cfg.paths = 20000;
  const auto plain = simulate_price(p, call, cfg);
  cfg.antithetic = true;
  const auto anti = simulate_price(p, call, cfg);
  CHECK(std::abs(plain.mean - anti.mean) < 4.0 * std::hypot(plain.std_error, anti.std_error));
}

TEST_CASE("pathwise delta") {
  const auto p = zero_rate_heston();
  McConfig cfg;
  cfg.paths = 8000;
  cfg.steps_per_year = 20;
  const auto deep = pathwise_delta(p, {OptionKind::call, 1000.0, 1.0}, cfg);
  CHECK(std::abs(deep.mean) < 1e-6);
  const auto itm = pathwise_delta(p, {OptionKind::call, 1e-6, 1.0}, cfg);
  CHECK(itm.mean == doctest::Approx(1.0).epsilon(0.02));
  const auto put = pathwise_delta(p, {OptionKind::put, 100.0, 1.0}, cfg);
  CHECK(put.mean < 0.0);
  CHECK(put.mean > -1.0);
}

TEST_CASE("invalid Monte Carlo settings") {
  const auto p = zero_rate_heston();
  const OptionSpec call{OptionKind::call, 100.0, 1.0};
  McConfig cfg;
  cfg.paths = 0;
  CHECK_THROWS_AS(simulate_price(p, call, cfg), Error);
  cfg.paths = 100;
  cfg.steps_per_year = 0;
  CHECK_THROWS_AS(simulate_price(p, call, cfg), Error);
  CHECK(default_worker_count() >= 1);
}
