#include "fxhhw/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "fxhhw/error.hpp"

namespace fxhhw {

namespace {

constexpr double kPsdTolerance = 1e-10;

void require_nonnegative(std::vector<std::string>& out, const char* name, double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    std::ostringstream os;
    os << name << " must be finite and >= 0 (got " << x << ")";
    out.push_back(os.str());
  }
}

void require_finite(std::vector<std::string>& out, const char* name, double x) {
  if (!std::isfinite(x)) out.push_back(std::string(name) + " must be finite");
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

}  // namespace

Eigen::Matrix4d Correlation::matrix() const {
  Eigen::Matrix4d r;
  r << 1.0, sv, sd, sf,
       sv, 1.0, vd, vf,
       sd, vd, 1.0, df,
       sf, vf, df, 1.0;
  return r;
}

Correlation Correlation::from_matrix(const Eigen::Matrix4d& r) {
  validate_correlation(r);
  return Correlation{r(0, 1), r(0, 2), r(0, 3), r(1, 2), r(1, 3), r(2, 3)};
}

double ThetaParams::operator()(double tau) const {
  if (a2 == 0.0) return a1;
  return a1 - a2 * std::exp(-a3 * tau);
}

std::vector<std::string> ModelParams::violations() const {
  std::vector<std::string> out;
  if (!(s0 > 0.0) || !std::isfinite(s0)) out.push_back("s0 must be finite and > 0");
  require_nonnegative(out, "v0", v0);
  require_finite(out, "rd0", rd0);
  require_finite(out, "rf0", rf0);
  require_nonnegative(out, "kappa", kappa);
  require_nonnegative(out, "vbar", vbar);
  require_nonnegative(out, "gamma", gamma);
  require_nonnegative(out, "lambda_d", lambda_d);
  require_nonnegative(out, "lambda_f", lambda_f);
  require_nonnegative(out, "eta_d", eta_d);
  require_nonnegative(out, "eta_f", eta_f);
  for (auto [name, x] : {std::pair{"theta_d.a1", theta_d_params.a1}, std::pair{"theta_d.a2", theta_d_params.a2},
                         std::pair{"theta_d.a3", theta_d_params.a3}, std::pair{"theta_f.a1", theta_f_params.a1},
                         std::pair{"theta_f.a2", theta_f_params.a2}, std::pair{"theta_f.a3", theta_f_params.a3}})
    require_finite(out, name, x);
  try {
    validate_correlation(correlation.matrix());
  } catch (const Error& e) {
    out.push_back(e.what());
  }
  return out;
}

void ModelParams::validate() const {
  const auto v = violations();
  if (!v.empty()) throw ModelError("invalid model parameters: " + join(v));
}

std::vector<std::string> OptionSpec::violations() const {
  std::vector<std::string> out;
  if (!(strike > 0.0) || !std::isfinite(strike)) out.push_back("strike must be finite and > 0");
  if (!(maturity > 0.0) || !std::isfinite(maturity)) out.push_back("maturity must be finite and > 0");
  return out;
}

void OptionSpec::validate() const {
  const auto v = violations();
  if (!v.empty()) throw InvalidArgument("invalid option: " + join(v));
}

double theta_d(const ModelParams& p, double tau) { return p.theta_d_params(tau); }
double theta_f(const ModelParams& p, double tau) { return p.theta_f_params(tau); }

std::pair<double, double> theta_constant_approx(const ModelParams& p) {
  return {p.theta_d_params(1.0), p.theta_f_params(1.0)};
}

std::pair<double, double> theta_levels(const ModelParams& p, ThetaMode mode, double tau) {
  if (mode == ThetaMode::constant_approx) return theta_constant_approx(p);
  return {theta_d(p, tau), theta_f(p, tau)};
}

bool is_time_independent(const ModelParams& p, ThetaMode mode) {
  if (mode == ThetaMode::constant_approx) return true;
  const bool d_const = p.theta_d_params.is_constant() || p.lambda_d == 0.0;
  const bool f_const = p.theta_f_params.is_constant() || p.lambda_f == 0.0;
  return d_const && f_const;
}

FellerResult feller_check(const ModelParams& p) {
  FellerResult r;
  if (p.gamma == 0.0) {
    r.ratio = p.kappa * p.vbar > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  } else {
    r.ratio = 2.0 * p.kappa * p.vbar / (p.gamma * p.gamma);
  }
  r.satisfied = r.ratio > 1.0;
  return r;
}

double payoff(const OptionSpec& spec, double s) {
  const double x = spec.kind == OptionKind::call ? s - spec.strike : spec.strike - s;
  return x > 0.0 ? x : 0.0;
}

void validate_correlation(const Eigen::Matrix4d& r) {
  if (!r.allFinite()) throw ModelError("correlation matrix has non-finite entries");
  for (int i = 0; i < 4; ++i) {
    if (r(i, i) != 1.0) {
      std::ostringstream os;
      os << "correlation matrix diagonal entry (" << i << "," << i << ") is " << r(i, i) << ", expected 1";
      throw ModelError(os.str());
    }
    for (int j = 0; j < 4; ++j) {
      if (std::abs(r(i, j) - r(j, i)) > 1e-14) throw ModelError("correlation matrix is not symmetric");
      if (r(i, j) < -1.0 || r(i, j) > 1.0) {
        std::ostringstream os;
        os << "correlation entry (" << i << "," << j << ") = " << r(i, j) << " lies outside [-1, 1]";
        throw ModelError(os.str());
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(r, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin < -kPsdTolerance) {
    std::ostringstream os;
    os << "correlation matrix is not positive semidefinite (smallest eigenvalue " << lmin << ")";
    throw ModelError(os.str());
  }
}

std::string to_string(OptionKind k) { return k == OptionKind::call ? "call" : "put"; }

std::string to_string(ThetaMode m) {
  return m == ThetaMode::time_dependent ? "time_dependent" : "constant_approx";
}

OptionKind option_kind_from_string(const std::string& s) {
  if (s == "call") return OptionKind::call;
  if (s == "put") return OptionKind::put;
  throw ConfigError("unknown option kind '" + s + "' (expected call or put)");
}

ThetaMode theta_mode_from_string(const std::string& s) {
  if (s == "time_dependent") return ThetaMode::time_dependent;
  if (s == "constant_approx" || s == "constant") return ThetaMode::constant_approx;
  throw ConfigError("unknown theta mode '" + s + "' (expected time_dependent or constant_approx)");
}

}  // namespace fxhhw
