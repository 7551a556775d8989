#include "fxhhw/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fxhhw/error.hpp"

namespace fxhhw {

namespace {

constexpr double kDegeneracy = 1e-13;

void require_bounds(const AxisSpec& spec, const char* where) {
  if (!std::isfinite(spec.lower) || !std::isfinite(spec.upper) || !(spec.lower < spec.upper)) {
    std::ostringstream os;
    os << where << ": need finite lower < upper (got " << spec.lower << ", " << spec.upper << ")";
    throw InvalidArgument(os.str());
  }
  if (spec.m < 2) {
    std::ostringstream os;
    os << where << ": need at least 2 nodes (got " << spec.m << ")";
    throw InvalidArgument(os.str());
  }
  if (!(spec.xi >= 0.0) || !std::isfinite(spec.xi)) {
    std::ostringstream os;
    os << where << ": stretch xi must be finite and non-negative (got " << spec.xi << ")";
    throw InvalidArgument(os.str());
  }
}

// Two-sided sinh map concentrating nodes around `focus`.
std::vector<double> sinh_axis(const AxisSpec& spec) {
  if (spec.xi < kUniformXi) return build_uniform_axis(spec.m, spec.lower, spec.upper);
  const double xi = spec.xi;
  const double e = spec.focus;
  const double a_hi = std::asinh(xi * (spec.upper - e));
  const double a_lo = std::asinh(xi * (e - spec.lower));
  std::vector<double> out(spec.m);
  for (int i = 0; i < spec.m; ++i) {
    const double x = static_cast<double>(i) / (spec.m - 1);
    out[i] = std::sinh(x * a_hi - (1.0 - x) * a_lo) / xi + e;
  }
  out.front() = spec.lower;
  out.back() = spec.upper;
  return out;
}

void check_axis(const std::vector<double>& x, const char* name) {
  const double range = x.back() - x.front();
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double d = x[i + 1] - x[i];
    if (!(d > kDegeneracy * range)) {
      std::ostringstream os;
      os << name << " axis: increment " << d << " between nodes " << i << " and " << i + 1
         << " is below " << kDegeneracy << " of the axis range";
      throw GridDegeneracy(os.str());
    }
  }
}

std::vector<double> diff(const std::vector<double>& x) {
  std::vector<double> d(x.size() > 0 ? x.size() - 1 : 0);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = x[i + 1] - x[i];
  return d;
}

}  // namespace

const AxisSpec& GridConfig::axis(int k) const {
  switch (k) {
    case axis_s: return s;
    case axis_v: return v;
    case axis_rd: return rd;
    case axis_rf: return rf;
    default: throw InvalidArgument("GridConfig::axis: index out of range");
  }
}

AxisSpec& GridConfig::axis(int k) {
  return const_cast<AxisSpec&>(static_cast<const GridConfig&>(*this).axis(k));
}

std::array<int, 4> Grid4D::dims() const {
  return {static_cast<int>(nodes[0].size()), static_cast<int>(nodes[1].size()),
          static_cast<int>(nodes[2].size()), static_cast<int>(nodes[3].size())};
}

std::size_t Grid4D::size() const {
  return nodes[0].size() * nodes[1].size() * nodes[2].size() * nodes[3].size();
}

std::size_t Grid4D::index(int is, int iv, int id, int jf) const {
  const std::size_t m1 = nodes[0].size(), m2 = nodes[1].size(), m3 = nodes[2].size();
  return static_cast<std::size_t>(is) + m1 * (static_cast<std::size_t>(iv) +
                                               m2 * (static_cast<std::size_t>(id) + m3 * static_cast<std::size_t>(jf)));
}

std::array<int, 4> Grid4D::multi_index(std::size_t k) const {
  std::array<int, 4> out{};
  for (int a = 0; a < 4; ++a) {
    const std::size_t m = nodes[a].size();
    out[a] = static_cast<int>(k % m);
    k /= m;
  }
  return out;
}

double Grid4D::min_increment(int axis) const {
  const auto& d = increments.at(axis);
  if (d.empty()) throw InvalidArgument("Grid4D::min_increment: axis has fewer than 2 nodes");
  return *std::min_element(d.begin(), d.end());
}

double Grid4D::max_increment(int axis) const {
  const auto& d = increments.at(axis);
  if (d.empty()) throw InvalidArgument("Grid4D::max_increment: axis has fewer than 2 nodes");
  return *std::max_element(d.begin(), d.end());
}

std::vector<double> build_uniform_axis(int m, double lower, double upper) {
  if (m < 2) throw InvalidArgument("build_uniform_axis: need at least 2 nodes");
  if (!(lower < upper)) throw InvalidArgument("build_uniform_axis: need lower < upper");
  std::vector<double> out(m);
  for (int i = 0; i < m; ++i) out[i] = lower + (upper - lower) * static_cast<double>(i) / (m - 1);
  out.back() = upper;
  return out;
}

std::vector<double> build_s_axis(const AxisSpec& spec) {
  require_bounds(spec, "build_s_axis");
  if (!(spec.focus > spec.lower && spec.focus < spec.upper)) {
    std::ostringstream os;
    os << "build_s_axis: strike " << spec.focus << " must lie strictly inside (" << spec.lower << ", "
       << spec.upper << ")";
    throw InvalidArgument(os.str());
  }
  auto x = sinh_axis(spec);
  check_axis(x, "s");
  return x;
}

std::vector<double> build_v_axis(const AxisSpec& spec) {
  require_bounds(spec, "build_v_axis");
  if (!(spec.focus >= spec.lower && spec.focus < spec.upper)) {
    std::ostringstream os;
    os << "build_v_axis: v0 " << spec.focus << " must lie in [" << spec.lower << ", " << spec.upper << ")";
    throw InvalidArgument(os.str());
  }
  auto x = sinh_axis(spec);
  check_axis(x, "v");
  return x;
}

std::vector<double> build_rate_axis(const AxisSpec& spec) {
  require_bounds(spec, "build_rate_axis");
  if (!(spec.focus > spec.lower && spec.focus < spec.upper)) {
    std::ostringstream os;
    os << "build_rate_axis: r0 " << spec.focus << " must lie strictly inside (" << spec.lower << ", "
       << spec.upper << ")";
    throw InvalidArgument(os.str());
  }
  if (spec.xi < kUniformXi) {
    auto x = build_uniform_axis(spec.m, spec.lower, spec.upper);
    check_axis(x, "rate");
    return x;
  }
  const double d = std::max(std::abs(spec.lower), std::abs(spec.upper)) / spec.xi;
  const double z0 = std::asinh((spec.lower - spec.focus) / d);
  const double dz = (std::asinh((spec.upper - spec.focus) / d) - z0) / (spec.m - 1);
  std::vector<double> x(spec.m);
  for (int k = 0; k < spec.m; ++k) x[k] = spec.focus + d * std::sinh(z0 + k * dz);
  x.front() = spec.lower;
  x.back() = spec.upper;
  check_axis(x, "rate");
  return x;
}

Grid4D make_grid(std::array<std::vector<double>, 4> nodes) {
  static const char* names[4] = {"s", "v", "r_d", "r_f"};
  Grid4D g;
  for (int a = 0; a < 4; ++a) {
    if (nodes[a].size() < 2) throw InvalidArgument(std::string("make_grid: ") + names[a] + " axis needs 2+ nodes");
    for (std::size_t i = 0; i + 1 < nodes[a].size(); ++i)
      if (!(nodes[a][i + 1] > nodes[a][i]))
        throw GridDegeneracy(std::string("make_grid: ") + names[a] + " axis is not strictly increasing");
    g.increments[a] = diff(nodes[a]);
    g.nodes[a] = std::move(nodes[a]);
  }
  return g;
}

Grid4D build_grid(const GridConfig& config) {
  for (int a = 0; a < 4; ++a)
    if (config.axis(a).m < 4)
      throw InvalidArgument("build_grid: every axis needs at least 4 nodes (axis " + std::to_string(a) +
                            " has " + std::to_string(config.axis(a).m) + ")");
  std::array<std::vector<double>, 4> nodes;
  if (config.uniform) {
    for (int a = 0; a < 4; ++a) {
      const auto& ax = config.axis(a);
      nodes[a] = build_uniform_axis(ax.m, ax.lower, ax.upper);
    }
  } else {
    nodes[0] = build_s_axis(config.s);
    nodes[1] = build_v_axis(config.v);
    nodes[2] = build_rate_axis(config.rd);
    nodes[3] = build_rate_axis(config.rf);
  }
  return make_grid(std::move(nodes));
}

GridConfig default_grid_config(std::array<int, 4> m, double strike, double v0, double rd0, double rf0) {
  GridConfig g;
  g.s = AxisSpec{m[0], 0.0, 14.0 * strike, strike, 0.1};
  g.v = AxisSpec{m[1], 0.0, 10.0, v0, 50.0};
  g.rd = AxisSpec{m[2], -1.0, 1.0, rd0, 500.0};
  g.rf = AxisSpec{m[3], -1.0, 1.0, rf0, 500.0};
  return g;
}

}  // namespace fxhhw
