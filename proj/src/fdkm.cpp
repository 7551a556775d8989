#include "fxhhw/fdkm.hpp"

#include <limits>

namespace fxhhw {

Grid4D fdkm_grid(const GridConfig& config) {
  GridConfig g = config;
  g.uniform = true;
  return build_grid(g);
}

rbf::ShapeParams fdkm_shapes() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return rbf::ShapeParams{inf, inf, inf, inf};
}

SparseOperator assemble_fdkm_operator(const FdkmConfig& config, const ModelParams& model, const OptionSpec& option,
                                      double tau, ThetaMode theta_mode, BoundaryMode mode) {
  GridConfig g = config.bounds;
  for (int a = 0; a < 4; ++a) g.axis(a).m = config.m[a];
  const Grid4D grid = fdkm_grid(g);
  auto op = assemble_operator(grid, model, option, AssemblyOptions{fdkm_shapes(), theta_mode}, tau);
  return impose_boundaries(std::move(op), grid, mode, option);
}

}  // namespace fxhhw
