#pragma once

// Finite-difference baseline: classical central differences on uniform axes,
// mixed derivatives from tensor products of central first differences (the
// nine-point cross). Shares the boundary machinery of the RBF-FD pipeline.

#include <array>

#include "fxhhw/grid.hpp"
#include "fxhhw/model.hpp"
#include "fxhhw/operator.hpp"
#include "fxhhw/rbf_stencil.hpp"

namespace fxhhw {

struct FdkmConfig {
  std::array<int, 4> m{};
  GridConfig bounds;  // only lower/upper of each axis are used
};

/// Uniform axes over the bounds of `config` (stretch settings ignored).
Grid4D fdkm_grid(const GridConfig& config);

/// Shape parameters of +infinity on every axis (classical FD weights).
rbf::ShapeParams fdkm_shapes();

SparseOperator assemble_fdkm_operator(const FdkmConfig& config, const ModelParams& model, const OptionSpec& option,
                                      double tau, ThetaMode theta_mode = ThetaMode::time_dependent,
                                      BoundaryMode mode = BoundaryMode::abc);

}  // namespace fxhhw
