#pragma once

// Truncated 4D computational domain (s, v, r_d, r_f) with sinh-stretched axes.

#include <array>
#include <cstddef>
#include <vector>

namespace fxhhw {

enum Axis : int { axis_s = 0, axis_v = 1, axis_rd = 2, axis_rf = 3 };

struct AxisSpec {
  int m = 0;            // node count
  double lower = 0.0;   // domain bounds
  double upper = 0.0;
  double focus = 0.0;   // concentration point (E, v0, r_d0 or r_f0)
  double xi = 0.0;      // stretch; below 1e-10 the axis is uniform
};

struct GridConfig {
  AxisSpec s;
  AxisSpec v;
  AxisSpec rd;
  AxisSpec rf;
  bool uniform = false;  // ignore xi and use equal spacing on every axis

  const AxisSpec& axis(int k) const;
  AxisSpec& axis(int k);
};

struct Grid4D {
  std::array<std::vector<double>, 4> nodes;
  std::array<std::vector<double>, 4> increments;  // nodes[k][i+1] - nodes[k][i]

  std::array<int, 4> dims() const;
  std::size_t size() const;
  /// Natural ordering: s fastest, then v, then r_d, then r_f.
  std::size_t index(int is, int iv, int id, int jf) const;
  std::array<int, 4> multi_index(std::size_t k) const;
  double min_increment(int axis) const;
  double max_increment(int axis) const;
};

// Stretch threshold below which axes fall back to uniform spacing.
inline constexpr double kUniformXi = 1e-10;

/// s_i = sinh(x_i asinh(xi (upper - E)) - (1 - x_i) asinh(xi (E - lower))) / xi + E.
std::vector<double> build_s_axis(const AxisSpec& spec);
/// Same map centred at v0; endpoints are pinned to [lower, upper].
std::vector<double> build_v_axis(const AxisSpec& spec);
/// r_k = r0 + d sinh(asinh((lower - r0)/d) + k dzeta) with d = max(|lower|,|upper|)/xi.
std::vector<double> build_rate_axis(const AxisSpec& spec);
std::vector<double> build_uniform_axis(int m, double lower, double upper);

Grid4D build_grid(const GridConfig& config);
/// Wraps explicit node vectors (validated for monotonicity).
Grid4D make_grid(std::array<std::vector<double>, 4> nodes);

/// Default truncation and stretch settings: s in [0, 14E] with xi_s = 0.1,
/// v in [0, 10] with xi_v = 50, rates in [-1, 1] with xi_r = 500.
GridConfig default_grid_config(std::array<int, 4> m, double strike, double v0, double rd0, double rf0);

}  // namespace fxhhw
