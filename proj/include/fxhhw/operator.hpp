#pragma once

// Sparse differentiation matrices and the 4D FX-HHW spatial operator.

#include <Eigen/Sparse>

#include <array>
#include <iosfwd>
#include <span>
#include <string>

#include "fxhhw/grid.hpp"
#include "fxhhw/model.hpp"
#include "fxhhw/rbf_stencil.hpp"

namespace fxhhw {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class BoundaryMode { dirichlet, neumann_flux, abc };

std::string to_string(BoundaryMode m);
BoundaryMode boundary_mode_from_string(const std::string& s);

struct DiffMatrix1D {
  SparseMatrix matrix;
  int axis = 0;
  int order = 1;
};

/// Interior rows: three-node weights with h = x_i - x_{i-1}, omega = h_{i+1}/h_i.
/// First and last rows: two-node boundary weights. c = +inf gives plain FD.
DiffMatrix1D first_derivative_matrix(std::span<const double> nodes, double c, int axis = 0);

/// Rows 3..m-1: four-node weights; row 2: three-node near-boundary weights;
/// rows 1 and m: (-4/c^2, 2/c^2).
DiffMatrix1D second_derivative_matrix(std::span<const double> nodes, double c, int axis = 0);

struct SparseOperator {
  SparseMatrix matrix;
  std::array<int, 4> dims{};
  bool time_dependent = false;
  double tau = 0.0;
  BoundaryMode boundary = BoundaryMode::abc;

  std::size_t nnz() const { return static_cast<std::size_t>(matrix.nonZeros()); }
  /// max |i - j| over stored entries.
  long bandwidth() const;
};

struct AssemblyOptions {
  rbf::ShapeParams shapes;  // +inf on an axis selects classical FD weights
  ThetaMode theta_mode = ThetaMode::time_dependent;
};

/// Full PDE operator at backward time tau, discretised at every node with the
/// differentiation-matrix boundary rows (boundary mode abc).
SparseOperator assemble_operator(const Grid4D& grid, const ModelParams& params, const OptionSpec& option,
                                 const AssemblyOptions& options, double tau);

/// Tensor-product boundary projector P; the constrained operator is P * A.
/// abc yields the identity.
SparseMatrix boundary_projector(const Grid4D& grid, BoundaryMode mode, const OptionSpec& option);

/// Replaces boundary rows of an abc operator according to mode:
///   dirichlet:     V = 0 at s = 0 (call only), V_ss = 0 at s_max, V_vv = 0 at v_max,
///                  V_rr = 0 at both rate ends; v = 0 keeps the degenerate PDE row.
///   neumann_flux:  as dirichlet but V_ss = 0 also at s = 0 (any option kind).
///   abc:           unchanged.
/// Second-derivative conditions are enforced by linear extrapolation of the
/// time derivative from the two nearest interior nodes.
SparseOperator impose_boundaries(SparseOperator op, const Grid4D& grid, BoundaryMode mode, const OptionSpec& option);

/// A(tau) = base + theta_d(tau) * d_part + theta_f(tau) * f_part.
class AffineOperator {
public:
  SparseMatrix base;
  SparseMatrix d_part;  // lambda_d * d/dr_d
  SparseMatrix f_part;  // lambda_f * d/dr_f
  std::array<int, 4> dims{};
  BoundaryMode boundary = BoundaryMode::abc;

  AffineOperator(const Grid4D& grid, const ModelParams& params, const OptionSpec& option,
                 const AssemblyOptions& options, BoundaryMode mode);

  bool time_dependent() const { return time_dependent_; }
  std::pair<double, double> theta(double tau) const;
  SparseOperator at(double tau) const;
  /// y = A(tau) x without forming A(tau).
  void apply(double tau, const Eigen::VectorXd& x, Eigen::VectorXd& y) const;

private:
  ModelParams params_;
  ThetaMode mode_;
  bool time_dependent_ = false;
};

/// "row col value" lines (0-based), with a header line "rows cols nnz".
void write_triplets(std::ostream& os, const SparseMatrix& m);

}  // namespace fxhhw
