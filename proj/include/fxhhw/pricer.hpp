#pragma once

// Pricing pipeline: grid -> operator -> time integration -> queries.

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fxhhw/grid.hpp"
#include "fxhhw/integrators.hpp"
#include "fxhhw/model.hpp"
#include "fxhhw/operator.hpp"
#include "fxhhw/rbf_stencil.hpp"

namespace fxhhw {

enum class SolverKind { automatic, krylov, midpoint };
enum class Method { pm, fdkm };
enum class InterpolationKind { cubic, linear };

std::string to_string(SolverKind k);
std::string to_string(Method m);
std::string to_string(InterpolationKind k);
SolverKind solver_kind_from_string(const std::string& s);
Method method_from_string(const std::string& s);
InterpolationKind interpolation_kind_from_string(const std::string& s);

struct PricingConfig {
  GridConfig grid;
  rbf::ShapeMultipliers shape;
  Method method = Method::pm;
  SolverKind solver = SolverKind::automatic;
  BoundaryMode boundary = BoundaryMode::abc;
  ThetaMode theta_mode = ThetaMode::time_dependent;
  KrylovConfig krylov;        // tau is overwritten with the maturity
  double delta_tau = 0.0;     // midpoint macro step; 0 picks maturity / 400
  int midpoint_substeps = 2;
  double growth_limit = 1e6;
};

struct SolveStats {
  SolverKind solver_used = SolverKind::krylov;
  std::size_t nodes = 0;
  std::size_t nnz = 0;
  KrylovStats krylov;
  MidpointStats midpoint;
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;
};

struct SolutionField {
  Grid4D grid;
  Eigen::VectorXd values;  // natural ordering (s fastest)
  double tau = 0.0;
  rbf::ShapeParams shapes;
  std::array<double, 4> anchor{};  // (E, v0, r_d0, r_f0): default point for slices

  double at(int is, int iv, int id, int jf) const { return values(grid.index(is, iv, id, jf)); }
};

/// Axes actually used for a configuration (uniform for FDKM).
Grid4D pricing_grid(const PricingConfig& cfg);
rbf::ShapeParams pricing_shapes(const Grid4D& grid, const PricingConfig& cfg);

/// Payoff on the grid at tau = 0.
SolutionField initial_field(const Grid4D& grid, const OptionSpec& option);

SolutionField price(const ModelParams& model, const OptionSpec& option, const PricingConfig& cfg,
                    SolveStats* stats = nullptr);

/// Tensor-product interpolation; cubic uses not-a-knot splines per axis
/// (falls back to lower order on axes with fewer than 4 nodes). Exact at nodes.
double interpolate(const SolutionField& field, std::array<double, 4> point,
                   InterpolationKind kind = InterpolationKind::cubic);

/// Values on an (s, v) slice at fixed (r_d, r_f), interpolated along the rate axes.
Eigen::MatrixXd sv_slice(const SolutionField& field, double rd, double rf,
                         InterpolationKind kind = InterpolationKind::cubic);

struct GreeksSlice {
  std::vector<double> s;
  std::vector<double> v;
  double rd = 0.0;
  double rf = 0.0;
  Eigen::MatrixXd value;  // (i_s, i_v)
  Eigen::MatrixXd delta;  // dV/ds
  Eigen::MatrixXd vega;   // dV/dv
  Eigen::MatrixXd vanna;  // d2V/ds dv
};

/// Greeks from the field's own first-derivative matrices.
GreeksSlice greeks(const SolutionField& field, double rd, double rf,
                   InterpolationKind kind = InterpolationKind::cubic);

/// |log2((v4 - v2) / (v2 - v1))|; empty when undefined.
std::optional<double> roc(double v_m, double v_2m, double v_4m);

double relative_error(double v, double v_ref);

struct ConvergenceRow {
  std::array<int, 4> m{};
  double v1 = 0.0;
  double v2 = 0.0;
  std::optional<double> eps1;
  std::optional<double> eps2;
  double seconds = 0.0;
  std::optional<double> lambda_max;
};

}  // namespace fxhhw
