#pragma once

// FX-HHW model: Heston variance for the FX rate plus Hull-White domestic and
// foreign short rates, fully correlated.

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace fxhhw {

/// Pairwise correlations between the (s, v, r_d, r_f) Brownian drivers.
struct Correlation {
  double sv = 0.0;
  double sd = 0.0;
  double sf = 0.0;
  double vd = 0.0;
  double vf = 0.0;
  double df = 0.0;

  Eigen::Matrix4d matrix() const;
  static Correlation from_matrix(const Eigen::Matrix4d& r);
};

/// Mean-reversion level a1 - a2 exp(-a3 tau) in backward time tau.
struct ThetaParams {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;

  double operator()(double tau) const;
  bool is_constant() const { return a2 == 0.0; }
};

struct ModelParams {
  double s0 = 100.0;
  double v0 = 0.0;
  double rd0 = 0.0;
  double rf0 = 0.0;
  double kappa = 0.0;
  double vbar = 0.0;
  double gamma = 0.0;
  double lambda_d = 0.0;
  double lambda_f = 0.0;
  double eta_d = 0.0;
  double eta_f = 0.0;
  ThetaParams theta_d_params;
  ThetaParams theta_f_params;
  Correlation correlation;

  /// Every violated constraint, one message per field; empty when valid.
  std::vector<std::string> violations() const;
  /// Throws ModelError listing all violations.
  void validate() const;
};

enum class OptionKind { call, put };

struct OptionSpec {
  OptionKind kind = OptionKind::call;
  double strike = 100.0;
  double maturity = 1.0;

  std::vector<std::string> violations() const;
  void validate() const;
};

enum class ThetaMode { time_dependent, constant_approx };

double theta_d(const ModelParams& p, double tau);
double theta_f(const ModelParams& p, double tau);

/// Levels frozen at tau = 1: a1 - a2 exp(-a3).
std::pair<double, double> theta_constant_approx(const ModelParams& p);

/// theta levels used by the PDE at backward time tau under the given mode.
std::pair<double, double> theta_levels(const ModelParams& p, ThetaMode mode, double tau);

/// True when the operator does not depend on tau under the given mode.
bool is_time_independent(const ModelParams& p, ThetaMode mode);

struct FellerResult {
  double ratio = 0.0;  // 2 kappa vbar / gamma^2
  bool satisfied = false;
};

FellerResult feller_check(const ModelParams& p);

double payoff(const OptionSpec& spec, double s);

/// Symmetric, unit diagonal, entries in [-1, 1], smallest eigenvalue >= -1e-10.
/// Throws ModelError naming the violation (and the offending eigenvalue).
void validate_correlation(const Eigen::Matrix4d& r);

std::string to_string(OptionKind k);
std::string to_string(ThetaMode m);
OptionKind option_kind_from_string(const std::string& s);
ThetaMode theta_mode_from_string(const std::string& s);

}  // namespace fxhhw
