#include "fxhhw/mc.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>
#include <vector>

#include "fxhhw/error.hpp"

namespace fxhhw {

namespace {

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::int64_t n = 0;
};

Moments combine(const Moments& a, const Moments& b) { return {a.sum + b.sum, a.sum_sq + b.sum_sq, a.n + b.n}; }

Moments pairwise_reduce(const std::vector<Moments>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return v[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return combine(pairwise_reduce(v, lo, mid), pairwise_reduce(v, mid, hi));
}

Eigen::Matrix4d correlation_factor(const ModelParams& model) {
  const Eigen::Matrix4d r = model.correlation.matrix();
  validate_correlation(r);
  Eigen::LLT<Eigen::Matrix4d> llt(r);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::LLT<Eigen::Matrix4d> shifted(r + 1e-10 * Eigen::Matrix4d::Identity());
  if (shifted.info() != Eigen::Success) throw ModelError("correlation matrix is not Cholesky-decomposable");
  return shifted.matrixL();
}

enum class Quantity { price, delta };

// Simulates one path given a source of standard normals; returns (payoff, delta) contributions.
template <class Normal>
double simulate_path(const ModelParams& p, const OptionSpec& o, const Eigen::Matrix4d& l, int steps, double dt,
                     Quantity q, Normal&& normal) {
  double x = std::log(p.s0);
  double v = p.v0;
  double rd = p.rd0;
  double rf = p.rf0;
  double integral = 0.0;
  const double sdt = std::sqrt(dt);
  for (int k = 0; k < steps; ++k) {
    const double tau = o.maturity - k * dt;  // backward time of the current step
    const double z0 = normal(), z1 = normal(), z2 = normal(), z3 = normal();
    const double w0 = l(0, 0) * z0;
    const double w1 = l(1, 0) * z0 + l(1, 1) * z1;
    const double w2 = l(2, 0) * z0 + l(2, 1) * z1 + l(2, 2) * z2;
    const double w3 = l(3, 0) * z0 + l(3, 1) * z1 + l(3, 2) * z2 + l(3, 3) * z3;
    const double vp = std::max(v, 0.0);
    const double sv = std::sqrt(vp);
    const double rd_old = rd;
    x += (rd - rf - 0.5 * vp) * dt + sv * sdt * w0;
    v += p.kappa * (p.vbar - vp) * dt + p.gamma * sv * sdt * w1;
    rd += p.lambda_d * (p.theta_d_params(tau) - rd) * dt + p.eta_d * sdt * w2;
    rf += (p.lambda_f * (p.theta_f_params(tau) - rf) - p.eta_f * p.correlation.sf * sv) * dt + p.eta_f * sdt * w3;
    integral += 0.5 * (rd_old + rd) * dt;
  }
  const double s = std::exp(x);
  const double disc = std::exp(-integral);
  if (q == Quantity::price) return disc * payoff(o, s);
  if (o.kind == OptionKind::call) return s > o.strike ? disc * s / p.s0 : 0.0;
  return s < o.strike ? -disc * s / p.s0 : 0.0;
}

McEstimate run(const ModelParams& model, const OptionSpec& option, const McConfig& cfg, Quantity q) {
  model.validate();
  option.validate();
  if (cfg.paths < 1) throw InvalidArgument("McConfig: paths must be >= 1");
  if (cfg.steps_per_year < 1) throw InvalidArgument("McConfig: steps_per_year must be >= 1");
  if (cfg.batch_size < 1) throw InvalidArgument("McConfig: batch_size must be >= 1");
  const Eigen::Matrix4d l = correlation_factor(model);
  const int steps = std::max(1, static_cast<int>(std::ceil(cfg.steps_per_year * option.maturity - 1e-9)));
  const double dt = option.maturity / steps;

  const std::int64_t batches = (cfg.paths + cfg.batch_size - 1) / cfg.batch_size;
  std::vector<Moments> partial(static_cast<std::size_t>(batches));
  std::atomic<std::int64_t> next{0};

  auto worker = [&]() {
    for (std::int64_t b = next++; b < batches; b = next++) {
      std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                        static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(static_cast<std::uint64_t>(b) >> 32)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> nd;
      const std::int64_t first = b * cfg.batch_size;
      const std::int64_t count = std::min(cfg.batch_size, cfg.paths - first);
      Moments m;
      if (cfg.antithetic) {
        std::vector<double> zs;
        for (std::int64_t i = 0; i < count; ++i) {
          zs.clear();
          auto draw = [&]() {
            zs.push_back(nd(rng));
            return zs.back();
          };
          const double a = simulate_path(model, option, l, steps, dt, q, draw);
          std::size_t pos = 0;
          auto mirror = [&]() { return -zs[pos++]; };
          const double c = simulate_path(model, option, l, steps, dt, q, mirror);
          const double y = 0.5 * (a + c);
          m.sum += y;
          m.sum_sq += y * y;
          ++m.n;
        }
      } else {
        auto draw = [&]() { return nd(rng); };
        for (std::int64_t i = 0; i < count; ++i) {
          const double y = simulate_path(model, option, l, steps, dt, q, draw);
          m.sum += y;
          m.sum_sq += y * y;
          ++m.n;
        }
      }
      partial[static_cast<std::size_t>(b)] = m;
    }
  };

  const int workers = std::max(1, std::min<int>(cfg.workers > 0 ? cfg.workers : default_worker_count(),
                                                static_cast<int>(batches)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  const Moments total = pairwise_reduce(partial, 0, partial.size());
  McEstimate e;
  e.paths = total.n;
  e.mean = total.sum / total.n;
  if (total.n > 1) {
    const double var = std::max(0.0, (total.sum_sq - total.n * e.mean * e.mean) / (total.n - 1));
    e.std_error = std::sqrt(var / total.n);
  }
  return e;
}

}  // namespace

int default_worker_count() {
  if (const char* env = std::getenv("FXHHW_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

McEstimate simulate_price(const ModelParams& model, const OptionSpec& option, const McConfig& cfg) {
  return run(model, option, cfg, Quantity::price);
}

McEstimate pathwise_delta(const ModelParams& model, const OptionSpec& option, const McConfig& cfg) {
  return run(model, option, cfg, Quantity::delta);
}

}  // namespace fxhhw
