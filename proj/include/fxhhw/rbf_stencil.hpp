#pragma once

// Gaussian RBF-FD stencil weights on non-uniform 1D stencils.
//
// All closed-form weights take the stencil in "step units": a base step h and
// ratios of the neighbouring steps to h. Passing c = +infinity selects the
// classical (polynomial) finite-difference limit of each formula.

#include <span>
#include <vector>

namespace fxhhw {

struct Grid4D;

namespace rbf {

/// exp(-(r/c)^2). Throws InvalidArgument for c <= 0 or r < 0.
double gaussian_rbf(double r, double c);

/// Three-node stencil {x - h, x, x + omega_plus*h} for the first derivative.
struct StencilGeometry1 {
  double h = 0.0;
  double omega_plus = 1.0;
  double c = 0.0;
};

/// Four-node stencil {x - w_minus2*h, x - h, x, x + w_plus1*h} for the
/// second derivative. w_minus2 > 1 keeps the nodes ordered.
struct StencilGeometry2 {
  double h = 0.0;
  double w_minus2 = 2.0;
  double w_plus1 = 1.0;
  double c = 0.0;
};

struct WeightSet {
  std::vector<double> weights;
  std::vector<double> node_offsets;  // relative to the evaluation node

  std::size_t size() const { return weights.size(); }
  /// Sum of weights[j] * f(node_offsets[j]) given sampled values f_j.
  double apply(std::span<const double> values) const;
};

WeightSet first_derivative_weights(const StencilGeometry1& g);
WeightSet second_derivative_weights(const StencilGeometry2& g);

/// Two-node first-derivative row used at either end of an axis:
/// (h/c^2 - 1/h, 1/h) on the nodes {0, h}.
WeightSet boundary_first_weights(double h, double c);

/// Two-node second-derivative row (-4/c^2, 2/c^2). The step h only positions
/// the second node in node_offsets; the weights do not depend on it.
WeightSet boundary_second_weights(double c, double h = 1.0);

/// Three-node second-derivative row for the node next to the boundary, on
/// {x - h, x, x + omega1*h}. First order only.
WeightSet near_boundary_second_weights(double h, double omega1, double c);

struct ShapeMultipliers {
  double s = 2.0;
  double v = 3.0;
  double rd = 3.0;
  double rf = 3.0;
};

struct ShapeParams {
  double c_s = 0.0;
  double c_v = 0.0;
  double c_rd = 0.0;
  double c_rf = 0.0;

  double operator[](int axis) const;
};

/// Per-axis shape parameters, each a multiple of the largest increment on
/// that axis.
ShapeParams shape_parameters(const Grid4D& grid, ShapeMultipliers k = {});

/// Brute-force reference: solves the dense Gaussian collocation system so the
/// weights reproduce the order-th derivative at offset 0 of every Gaussian
/// centred at a stencil node. LU with partial pivoting; refuses systems whose
/// condition estimate exceeds 1e14 (ConditioningError).
WeightSet collocation_weights_oracle(std::span<const double> node_offsets, double c, int order);

}  // namespace rbf
}  // namespace fxhhw
