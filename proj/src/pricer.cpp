#include "fxhhw/pricer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "fxhhw/error.hpp"
#include "fxhhw/fdkm.hpp"

namespace fxhhw {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Weights w such that the interpolant at xq equals sum_j w_j y_j.
Eigen::VectorXd interpolation_weights(const std::vector<double>& x, double xq, InterpolationKind kind) {
  const int m = static_cast<int>(x.size());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  const double tol = 1e-12 * (x.back() - x.front());
  if (!(xq >= x.front() - tol && xq <= x.back() + tol)) {
    std::ostringstream os;
    os << "interpolate: coordinate " << xq << " outside [" << x.front() << ", " << x.back() << "]";
    throw RangeError(os.str());
  }
  for (int j = 0; j < m; ++j)
    if (x[j] == xq) {
      w(j) = 1.0;
      return w;
    }
  xq = std::min(std::max(xq, x.front()), x.back());
  int i = static_cast<int>(std::upper_bound(x.begin(), x.end(), xq) - x.begin()) - 1;
  i = std::min(std::max(i, 0), m - 2);
  const double h = x[i + 1] - x[i];
  const double a = (x[i + 1] - xq) / h;
  const double b = (xq - x[i]) / h;

  if (kind == InterpolationKind::linear || m == 2) {
    w(i) = a;
    w(i + 1) = b;
    return w;
  }
  if (m == 3) {
    for (int j = 0; j < 3; ++j) {
      double l = 1.0;
      for (int k = 0; k < 3; ++k)
        if (k != j) l *= (xq - x[k]) / (x[j] - x[k]);
      w(j) = l;
    }
    return w;
  }

  // Not-a-knot cubic spline: K M = R y for the nodal second derivatives M.
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, m);
  std::vector<double> d(m - 1);
  for (int j = 0; j + 1 < m; ++j) d[j] = x[j + 1] - x[j];
  k(0, 0) = d[1];
  k(0, 1) = -(d[0] + d[1]);
  k(0, 2) = d[0];
  for (int j = 1; j < m - 1; ++j) {
    k(j, j - 1) = d[j - 1];
    k(j, j) = 2.0 * (d[j - 1] + d[j]);
    k(j, j + 1) = d[j];
    r(j, j - 1) = 6.0 / d[j - 1];
    r(j, j) = -6.0 / d[j - 1] - 6.0 / d[j];
    r(j, j + 1) = 6.0 / d[j];
  }
  k(m - 1, m - 3) = d[m - 2];
  k(m - 1, m - 2) = -(d[m - 3] + d[m - 2]);
  k(m - 1, m - 1) = d[m - 3];
  const Eigen::MatrixXd g = k.partialPivLu().solve(r);  // M = g y

  const double cm_i = (a * a * a - a) * h * h / 6.0;
  const double cm_i1 = (b * b * b - b) * h * h / 6.0;
  w = cm_i * g.row(i).transpose() + cm_i1 * g.row(i + 1).transpose();
  w(i) += a;
  w(i + 1) += b;
  return w;
}

std::array<Eigen::VectorXd, 4> point_weights(const Grid4D& grid, const std::array<double, 4>& p,
                                             InterpolationKind kind) {
  std::array<Eigen::VectorXd, 4> w;
  for (int a = 0; a < 4; ++a) w[a] = interpolation_weights(grid.nodes[a], p[a], kind);
  return w;
}

void check_field(const SolutionField& f) {
  if (static_cast<std::size_t>(f.values.size()) != f.grid.size())
    throw InvalidArgument("solution field size does not match its grid");
}

}  // namespace

std::string to_string(SolverKind k) {
  switch (k) {
    case SolverKind::automatic: return "auto";
    case SolverKind::krylov: return "krylov";
    case SolverKind::midpoint: return "midpoint";
  }
  return "?";
}

std::string to_string(Method m) { return m == Method::pm ? "pm" : "fdkm"; }
std::string to_string(InterpolationKind k) { return k == InterpolationKind::cubic ? "cubic" : "linear"; }

SolverKind solver_kind_from_string(const std::string& s) {
  if (s == "auto") return SolverKind::automatic;
  if (s == "krylov") return SolverKind::krylov;
  if (s == "midpoint") return SolverKind::midpoint;
  throw ConfigError("unknown solver '" + s + "' (expected auto, krylov or midpoint)");
}

Method method_from_string(const std::string& s) {
  if (s == "pm" || s == "rbf") return Method::pm;
  if (s == "fdkm") return Method::fdkm;
  throw ConfigError("unknown method '" + s + "' (expected pm or fdkm)");
}

InterpolationKind interpolation_kind_from_string(const std::string& s) {
  if (s == "cubic") return InterpolationKind::cubic;
  if (s == "linear") return InterpolationKind::linear;
  throw ConfigError("unknown interpolation '" + s + "' (expected cubic or linear)");
}

Grid4D pricing_grid(const PricingConfig& cfg) {
  if (cfg.method == Method::fdkm) return fdkm_grid(cfg.grid);
  return build_grid(cfg.grid);
}

rbf::ShapeParams pricing_shapes(const Grid4D& grid, const PricingConfig& cfg) {
  if (cfg.method == Method::fdkm) return fdkm_shapes();
  return rbf::shape_parameters(grid, cfg.shape);
}

SolutionField initial_field(const Grid4D& grid, const OptionSpec& option) {
  SolutionField f;
  f.grid = grid;
  f.values.resize(static_cast<Eigen::Index>(grid.size()));
  const auto d = grid.dims();
  for (std::size_t k = 0; k < grid.size(); ++k) f.values(static_cast<Eigen::Index>(k)) = payoff(option, grid.nodes[0][k % d[0]]);
  return f;
}

SolutionField price(const ModelParams& model, const OptionSpec& option, const PricingConfig& cfg, SolveStats* stats) {
  model.validate();
  option.validate();
  const auto t0 = Clock::now();
  SolveStats st;

  const bool constant = is_time_independent(model, cfg.theta_mode);
  SolverKind solver = cfg.solver;
  if (solver == SolverKind::automatic) solver = constant ? SolverKind::krylov : SolverKind::midpoint;
  if (solver == SolverKind::krylov && !constant)
    throw ConfigError("solver krylov needs a tau-independent operator: use theta_mode constant_approx or "
                      "theta amplitudes of zero");

  Grid4D grid = pricing_grid(cfg);
  const auto shapes = pricing_shapes(grid, cfg);
  AssemblyOptions opts{shapes, cfg.theta_mode};
  AffineOperator op(grid, model, option, opts, cfg.boundary);

  SolutionField field = initial_field(grid, option);
  field.shapes = shapes;
  field.anchor = {option.strike, model.v0, model.rd0, model.rf0};
  st.nodes = grid.size();
  st.assembly_seconds = seconds_since(t0);
  const auto t1 = Clock::now();
  const double horizon = option.maturity;

  if (solver == SolverKind::krylov) {
    const SparseOperator a = op.at(0.0);
    st.nnz = a.nnz();
    KrylovConfig kc = cfg.krylov;
    kc.tau = horizon;
    if (field.values.norm() > 0.0) field.values = krylov_expm_action(a.matrix, field.values, kc, &st.krylov);
  } else {
    st.nnz = static_cast<std::size_t>(op.base.nonZeros());
    MidpointConfig mc;
    mc.delta_tau = cfg.delta_tau > 0.0 ? cfg.delta_tau : horizon / 400.0;
    const double steps = horizon / mc.delta_tau;
    mc.steps = static_cast<int>(std::llround(steps));
    if (mc.steps < 1 || std::abs(mc.steps * mc.delta_tau - horizon) > 1e-9 * horizon) {
      std::ostringstream os;
      os << "delta_tau " << mc.delta_tau << " does not divide the maturity " << horizon;
      throw ConfigError(os.str());
    }
    mc.substeps = cfg.midpoint_substeps;
    mc.growth_limit = cfg.growth_limit;
    field.values = modified_midpoint_solve(
        [&op](double tau, const Eigen::VectorXd& x, Eigen::VectorXd& y) { op.apply(tau, x, y); }, field.values, mc,
        &st.midpoint);
  }
  st.solver_used = solver;
  st.solve_seconds = seconds_since(t1);
  field.tau = horizon;
  if (!field.values.allFinite()) throw InstabilityError("price: solution contains non-finite values", INFINITY);
  if (stats) *stats = st;
  return field;
}

double interpolate(const SolutionField& field, std::array<double, 4> point, InterpolationKind kind) {
  check_field(field);
  const auto w = point_weights(field.grid, point, kind);
  const auto d = field.grid.dims();
  double acc = 0.0;
  std::size_t k = 0;
  for (int jf = 0; jf < d[3]; ++jf) {
    const double wf = w[3](jf);
    for (int id = 0; id < d[2]; ++id) {
      const double wd = wf * w[2](id);
      for (int iv = 0; iv < d[1]; ++iv) {
        const double wv = wd * w[1](iv);
        if (wv == 0.0) {
          k += d[0];
          continue;
        }
        double line = 0.0;
        for (int is = 0; is < d[0]; ++is, ++k) line += w[0](is) * field.values(static_cast<Eigen::Index>(k));
        acc += wv * line;
      }
    }
  }
  return acc;
}

Eigen::MatrixXd sv_slice(const SolutionField& field, double rd, double rf, InterpolationKind kind) {
  check_field(field);
  const auto d = field.grid.dims();
  const auto wd = interpolation_weights(field.grid.nodes[2], rd, kind);
  const auto wf = interpolation_weights(field.grid.nodes[3], rf, kind);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d[0], d[1]);
  for (int jf = 0; jf < d[3]; ++jf)
    for (int id = 0; id < d[2]; ++id) {
      const double w = wf(jf) * wd(id);
      if (w == 0.0) continue;
      for (int iv = 0; iv < d[1]; ++iv)
        for (int is = 0; is < d[0]; ++is) out(is, iv) += w * field.at(is, iv, id, jf);
    }
  return out;
}

GreeksSlice greeks(const SolutionField& field, double rd, double rf, InterpolationKind kind) {
  GreeksSlice g;
  g.s = field.grid.nodes[0];
  g.v = field.grid.nodes[1];
  g.rd = rd;
  g.rf = rf;
  g.value = sv_slice(field, rd, rf, kind);
  const SparseMatrix ds = first_derivative_matrix(g.s, field.shapes.c_s, axis_s).matrix;
  const SparseMatrix dv = first_derivative_matrix(g.v, field.shapes.c_v, axis_v).matrix;
  const Eigen::MatrixXd dvt = Eigen::MatrixXd(dv).transpose();
  g.delta = ds * g.value;
  g.vega = g.value * dvt;
  g.vanna = ds * g.vega;
  return g;
}

std::optional<double> roc(double v_m, double v_2m, double v_4m) {
  const double den = v_2m - v_m;
  const double num = v_4m - v_2m;
  if (den == 0.0 || num == 0.0 || !std::isfinite(num / den)) return std::nullopt;
  return std::abs(std::log2(std::abs(num / den)));
}

double relative_error(double v, double v_ref) {
  if (v_ref == 0.0 || !std::isfinite(v_ref)) throw InvalidArgument("relative_error: reference must be finite and non-zero");
  return std::abs(v - v_ref) / std::abs(v_ref);
}

}  // namespace fxhhw
