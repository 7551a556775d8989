#include "fxhhw/rbf_stencil.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fxhhw/error.hpp"
#include "fxhhw/grid.hpp"

namespace fxhhw::rbf {

namespace {

constexpr double kMinRatio = 1e-8;
constexpr double kMaxCondition = 1e14;

void require_shape(double c, const char* where) {
  if (!(c > 0.0)) {
    std::ostringstream os;
    os << where << ": shape parameter must be positive (got " << c << ")";
    throw InvalidArgument(os.str());
  }
}

void require_step(double h, const char* where) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    std::ostringstream os;
    os << where << ": step must be positive and finite (got " << h << ")";
    throw InvalidArgument(os.str());
  }
}

void require_ratio(double w, const char* name, const char* where) {
  if (!(w >= kMinRatio) || !std::isfinite(w)) {
    std::ostringstream os;
    os << where << ": step ratio " << name << " must be >= " << kMinRatio << " (got " << w << ")";
    throw InvalidArgument(os.str());
  }
}

// c >= h is required; c < 5h is allowed with a warning.
void check_validity_regime(double h, double c, const char* where) {
  if (std::isinf(c)) return;
  if (c < h) {
    std::ostringstream os;
    os << where << ": shape parameter " << c << " is below the step " << h;
    throw InvalidArgument(os.str());
  }
  if (c < 5.0 * h) {
    std::ostringstream os;
    os << where << ": shape parameter " << c << " is less than 5x the step " << h;
    emit_warning("rbf.shape_close_to_step", os.str());
  }
}

}  // namespace

double WeightSet::apply(std::span<const double> values) const {
  if (values.size() != weights.size())
    throw InvalidArgument("WeightSet::apply: value count does not match stencil size");
  double acc = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) acc += weights[j] * values[j];
  return acc;
}

double gaussian_rbf(double r, double c) {
  require_shape(c, "gaussian_rbf");
  if (!(r >= 0.0)) throw InvalidArgument("gaussian_rbf: distance must be non-negative");
  const double q = r / c;
  return std::exp(-q * q);
}

WeightSet first_derivative_weights(const StencilGeometry1& g) {
  require_step(g.h, "first_derivative_weights");
  require_ratio(g.omega_plus, "omega_plus", "first_derivative_weights");
  require_shape(g.c, "first_derivative_weights");
  check_validity_regime(g.h, g.c, "first_derivative_weights");

  const double h = g.h;
  const double w = g.omega_plus;
  WeightSet out;
  out.node_offsets = {-h, 0.0, w * h};
  if (std::isinf(g.c)) {
    out.weights = {-w / (h * (w + 1.0)), (w - 1.0) / (h * w), 1.0 / (h * w * (w + 1.0))};
    return out;
  }
  const double c = g.c;
  const double c2 = c * c;
  const double h2 = h * h;
  const double a_left = w * (h2 * (2.0 * w - 5.0) - 3.0 * c2) / (3.0 * c2 * h * (w + 1.0));
  const double a_mid = (w - 1.0) / (h * w) - 2.0 * h * (w - 1.0) / (3.0 * c2);
  const double a_right = (h2 * (5.0 * w - 2.0) / c2 + 3.0 / w) / (3.0 * h * (w + 1.0));
  out.weights = {a_left, a_mid, a_right};
  return out;
}

WeightSet second_derivative_weights(const StencilGeometry2& g) {
  require_step(g.h, "second_derivative_weights");
  require_ratio(g.w_minus2, "w_minus2", "second_derivative_weights");
  require_ratio(g.w_plus1, "w_plus1", "second_derivative_weights");
  require_shape(g.c, "second_derivative_weights");
  if (!(g.w_minus2 > 1.0 + kMinRatio))
    throw InvalidArgument("second_derivative_weights: w_minus2 must exceed 1 so that x[i-2] < x[i-1]");
  check_validity_regime(g.h, g.c, "second_derivative_weights");

  const double h = g.h;
  const double a = g.w_minus2;  // outer-left ratio
  const double b = g.w_plus1;   // right ratio
  WeightSet out;
  out.node_offsets = {-a * h, -h, 0.0, b * h};
  const double h2 = h * h;
  if (std::isinf(g.c)) {
    out.weights = {2.0 * (b - 1.0) / (h2 * (a - 1.0) * a * (a + b)),
                   2.0 * (a - b) / (h2 * (a - 1.0) * (b + 1.0)),
                   -2.0 * (a - b + 1.0) / (h2 * a * b),
                   2.0 * (a + 1.0) / (h2 * (a + b) * (b * b + b))};
    return out;
  }
  const double c2 = g.c * g.c;

  const double beta_m2 =
      ((b - 1.0) * (2.0 * c2 - h2 * b) + 3.0 * h2 * a * a * (b - 1.0) - h2 * a * ((b - 3.0) * b + 1.0)) /
      (c2 * h2 * (a - 1.0) * a * (a + b));
  const double mu1 = -b * (2.0 * c2 + h2 * a * (a + 3.0) + 3.0 * h2) + a * (2.0 * c2 + h2 * a + 3.0 * h2) +
                     h2 * (a + 1.0) * b * b;
  const double mu2 = -a * (2.0 * c2 + h2 * (b - 1.0) * b + h2) + (b - 1.0) * (2.0 * c2 - h2 * b) +
                     h2 * (b - 1.0) * a * a;
  const double beta_m1 = mu1 / (c2 * h2 * (a - 1.0) * (b + 1.0));
  const double beta_0 = mu2 / (c2 * h2 * a * b);
  const double beta_p1 =
      ((a + 1.0) * (2.0 * c2 + h2 * a) + 3.0 * h2 * (a + 1.0) * b * b - h2 * (a * (a + 3.0) + 1.0) * b) /
      (c2 * h2 * b * (b + 1.0) * (a + b));
  out.weights = {beta_m2, beta_m1, beta_0, beta_p1};
  return out;
}

WeightSet boundary_first_weights(double h, double c) {
  require_step(h, "boundary_first_weights");
  require_shape(c, "boundary_first_weights");
  WeightSet out;
  out.node_offsets = {0.0, h};
  const double shift = std::isinf(c) ? 0.0 : h / (c * c);
  out.weights = {shift - 1.0 / h, 1.0 / h};
  return out;
}

WeightSet boundary_second_weights(double c, double h) {
  require_shape(c, "boundary_second_weights");
  WeightSet out;
  out.node_offsets = {0.0, h};
  if (std::isinf(c)) {
    out.weights = {0.0, 0.0};
  } else {
    const double c2 = c * c;
    out.weights = {-4.0 / c2, 2.0 / c2};
  }
  return out;
}

WeightSet near_boundary_second_weights(double h, double omega1, double c) {
  require_step(h, "near_boundary_second_weights");
  require_ratio(omega1, "omega1", "near_boundary_second_weights");
  require_shape(c, "near_boundary_second_weights");
  check_validity_regime(h, c, "near_boundary_second_weights");

  const double w = omega1;
  const double h2 = h * h;
  WeightSet out;
  out.node_offsets = {-h, 0.0, w * h};
  if (std::isinf(c)) {
    out.weights = {2.0 / ((w + 1.0) * h2), -2.0 / (w * h2), 2.0 / (h2 * w * (w + 1.0))};
    return out;
  }
  const double c2 = c * c;
  const double b_left = 2.0 * ((2.0 * (w - 2.0) * w + 5.0) / c2 + 3.0 / h2) / (3.0 * (w + 1.0));
  const double b_mid = 2.0 * ((-2.0 * w * w + w - 2.0) / c2 - 3.0 / h2) / (3.0 * w);
  const double b_right = (6.0 * c2 + 2.0 * h2 * (w * (5.0 * w - 4.0) + 2.0)) / (3.0 * c2 * h2 * w * (w + 1.0));
  out.weights = {b_left, b_mid, b_right};
  return out;
}

double ShapeParams::operator[](int axis) const {
  switch (axis) {
    case 0: return c_s;
    case 1: return c_v;
    case 2: return c_rd;
    case 3: return c_rf;
    default: throw InvalidArgument("ShapeParams: axis index out of range");
  }
}

ShapeParams shape_parameters(const Grid4D& grid, ShapeMultipliers k) {
  auto max_increment = [&](int axis) {
    const auto& d = grid.increments[axis];
    if (d.empty())
      throw InvalidArgument("shape_parameters: axis " + std::to_string(axis) + " has fewer than 2 nodes");
    return *std::max_element(d.begin(), d.end());
  };
  ShapeParams p;
  p.c_s = k.s * max_increment(0);
  p.c_v = k.v * max_increment(1);
  p.c_rd = k.rd * max_increment(2);
  p.c_rf = k.rf * max_increment(3);
  return p;
}

WeightSet collocation_weights_oracle(std::span<const double> node_offsets, double c, int order) {
  require_shape(c, "collocation_weights_oracle");
  if (order != 1 && order != 2) throw InvalidArgument("collocation_weights_oracle: order must be 1 or 2");
  const auto n = static_cast<Eigen::Index>(node_offsets.size());
  if (n < 2 || n > 6) throw InvalidArgument("collocation_weights_oracle: stencil must have 2 to 6 nodes");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (node_offsets[i] == node_offsets[j])
        throw InvalidArgument("collocation_weights_oracle: node offsets must be distinct");

  const double c2 = c * c;
  Eigen::MatrixXd phi(n, n);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double xj = node_offsets[j];
    for (Eigen::Index k = 0; k < n; ++k) {
      const double d = node_offsets[k] - xj;
      phi(j, k) = std::exp(-d * d / c2);
    }
    // derivative at 0 of exp(-(x - xj)^2 / c^2)
    const double e = std::exp(-xj * xj / c2);
    rhs(j) = order == 1 ? 2.0 * xj / c2 * e : (4.0 * xj * xj / (c2 * c2) - 2.0 / c2) * e;
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(phi);
  const double rcond = lu.rcond();
  const double condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(condition <= kMaxCondition)) {
    std::ostringstream os;
    os << "collocation_weights_oracle: collocation matrix is ill-conditioned (estimate " << condition << ")";
    throw ConditioningError(os.str(), condition);
  }
  const Eigen::VectorXd w = lu.solve(rhs);

  WeightSet out;
  out.node_offsets.assign(node_offsets.begin(), node_offsets.end());
  out.weights.assign(w.data(), w.data() + n);
  return out;
}

}  // namespace fxhhw::rbf
