#pragma once

// Monte Carlo reference prices: full-truncation Euler on (log s, v, r_d, r_f)
// with correlated Gaussian increments and trapezoidal stochastic discounting.

#include <cstdint>

#include "fxhhw/model.hpp"

namespace fxhhw {

struct McConfig {
  std::int64_t paths = 200000;
  int steps_per_year = 200;
  std::uint64_t seed = 20110101;
  bool antithetic = false;
  std::int64_t batch_size = 4096;  // paths per independently seeded batch
  int workers = 0;                 // 0: FXHHW_WORKERS env var, else hardware concurrency
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t paths = 0;
};

/// Discounted payoff E[exp(-int r_d) payoff(s_T)] from (s0, v0, rd0, rf0).
/// Batches are seeded from (seed, batch index) and reduced by a fixed
/// pairwise tree, so results do not depend on the worker count.
McEstimate simulate_price(const ModelParams& model, const OptionSpec& option, const McConfig& cfg);

/// Pathwise delta: E[1{s_T > E} s_T / s0 D] for calls, -E[1{s_T < E} s_T / s0 D] for puts.
McEstimate pathwise_delta(const ModelParams& model, const OptionSpec& option, const McConfig& cfg);

/// Worker count from FXHHW_WORKERS (if set and positive) or the hardware.
int default_worker_count();

}  // namespace fxhhw
