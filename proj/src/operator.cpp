#include "fxhhw/operator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

#include "fxhhw/error.hpp"

namespace fxhhw {

namespace {

using Entry = std::pair<int, double>;
using RowTable = std::vector<std::vector<Entry>>;

RowTable rows_of(const SparseMatrix& m) {
  RowTable rows(m.rows());
  for (int i = 0; i < m.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) rows[i].emplace_back(static_cast<int>(it.col()), it.value());
  return rows;
}

SparseMatrix from_rows(const std::vector<std::vector<Entry>>& rows, int cols) {
  SparseMatrix m(static_cast<Eigen::Index>(rows.size()), cols);
  std::size_t nnz = 0;
  for (const auto& r : rows) nnz += r.size();
  m.reserve(static_cast<Eigen::Index>(nnz));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m.startVec(static_cast<Eigen::Index>(i));
    for (const auto& [j, v] : rows[i]) m.insertBack(static_cast<Eigen::Index>(i), j) = v;
  }
  m.finalize();
  return m;
}

void check_nodes(std::span<const double> x, std::size_t min_nodes, const char* where) {
  if (x.size() < min_nodes) {
    std::ostringstream os;
    os << where << ": need at least " << min_nodes << " nodes (got " << x.size() << ")";
    throw InvalidArgument(os.str());
  }
  const double range = x.back() - x.front();
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    if (!(x[i + 1] - x[i] > 1e-13 * range)) {
      std::ostringstream os;
      os << where << ": degenerate increment between nodes " << i << " and " << i + 1;
      throw GridDegeneracy(os.str());
    }
}

// Which pieces of the PDE to assemble.
enum class TermSet { full, theta_d_only, theta_f_only };

struct NodeCoefficients {
  double ss, vv, dd, ff;         // diffusion
  double sv, sd, sf, vd, vf, df;  // mixed
  double s, v, d, f;             // convection
  double source;
};

class Assembler {
public:
  Assembler(const Grid4D& grid, const ModelParams& p, const rbf::ShapeParams& shapes) : grid_(grid), p_(p) {
    for (int a = 0; a < 4; ++a) {
      if (grid.nodes[a].size() < 4)
        throw InvalidArgument("assemble_operator: every axis needs at least 4 nodes");
      d1_[a] = rows_of(first_derivative_matrix(grid.nodes[a], shapes[a], a).matrix);
      d2_[a] = rows_of(second_derivative_matrix(grid.nodes[a], shapes[a], a).matrix);
    }
    if (grid.nodes[axis_v].front() < 0.0) throw InvalidArgument("assemble_operator: invalid grid, negative v nodes");
  }

  SparseMatrix build(double th_d, double th_f, TermSet set) const {
    const auto dims = grid_.dims();
    const std::size_t n = grid_.size();
    std::vector<std::vector<Entry>> rows(n);
    std::vector<Entry> scratch;
    scratch.reserve(128);
    const double g = p_.gamma, ed = p_.eta_d, ef = p_.eta_f;
    const auto& rho = p_.correlation;

    for (int jf = 0; jf < dims[3]; ++jf)
      for (int id = 0; id < dims[2]; ++id)
        for (int iv = 0; iv < dims[1]; ++iv)
          for (int is = 0; is < dims[0]; ++is) {
            const std::array<int, 4> idx{is, iv, id, jf};
            const double s = grid_.nodes[0][is];
            const double v = grid_.nodes[1][iv];
            const double rd = grid_.nodes[2][id];
            const double rf = grid_.nodes[3][jf];
            const double sq = std::sqrt(v);
            NodeCoefficients c{};
            if (set == TermSet::full) {
              c.ss = 0.5 * s * s * v;
              c.vv = 0.5 * g * g * v;
              c.dd = 0.5 * ed * ed;
              c.ff = 0.5 * ef * ef;
              c.sv = rho.sv * g * s * v;
              c.sd = rho.sd * ed * s * sq;
              c.sf = rho.sf * ef * s * sq;
              c.vd = rho.vd * g * ed * sq;
              c.vf = rho.vf * g * ef * sq;
              c.df = rho.df * ed * ef;
              c.s = (rd - rf) * s;
              c.v = p_.kappa * (p_.vbar - v);
              c.d = p_.lambda_d * (th_d - rd);
              c.f = p_.lambda_f * (th_f - rf) - rho.sf * ef * sq;
              c.source = -rd;
            } else if (set == TermSet::theta_d_only) {
              c.d = p_.lambda_d;
            } else {
              c.f = p_.lambda_f;
            }

            scratch.clear();
            add_single(scratch, d2_, 0, idx, c.ss);
            add_single(scratch, d2_, 1, idx, c.vv);
            add_single(scratch, d2_, 2, idx, c.dd);
            add_single(scratch, d2_, 3, idx, c.ff);
            add_mixed(scratch, 0, 1, idx, c.sv);
            add_mixed(scratch, 0, 2, idx, c.sd);
            add_mixed(scratch, 0, 3, idx, c.sf);
            add_mixed(scratch, 1, 2, idx, c.vd);
            add_mixed(scratch, 1, 3, idx, c.vf);
            add_mixed(scratch, 2, 3, idx, c.df);
            add_single(scratch, d1_, 0, idx, c.s);
            add_single(scratch, d1_, 1, idx, c.v);
            add_single(scratch, d1_, 2, idx, c.d);
            add_single(scratch, d1_, 3, idx, c.f);
            const auto row = grid_.index(is, iv, id, jf);
            if (c.source != 0.0) scratch.emplace_back(static_cast<int>(row), c.source);

            rows[row] = merge(scratch, row);
          }
    return from_rows(rows, static_cast<int>(n));
  }

private:
  int column(std::array<int, 4> idx) const { return static_cast<int>(grid_.index(idx[0], idx[1], idx[2], idx[3])); }

  void add_single(std::vector<Entry>& out, const std::array<RowTable, 4>& dm, int axis, std::array<int, 4> idx,
                  double coef) const {
    if (coef == 0.0) return;
    for (const auto& [j, w] : dm[axis][idx[axis]]) {
      auto at = idx;
      at[axis] = j;
      out.emplace_back(column(at), coef * w);
    }
  }

  void add_mixed(std::vector<Entry>& out, int a, int b, std::array<int, 4> idx, double coef) const {
    if (coef == 0.0) return;
    for (const auto& [ja, wa] : d1_[a][idx[a]])
      for (const auto& [jb, wb] : d1_[b][idx[b]]) {
        auto at = idx;
        at[a] = ja;
        at[b] = jb;
        out.emplace_back(column(at), coef * (wa * wb));
      }
  }

  static std::vector<Entry> merge(std::vector<Entry>& entries, std::size_t row) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& x, const Entry& y) { return x.first < y.first; });
    std::vector<Entry> out;
    for (const auto& e : entries) {
      if (!std::isfinite(e.second)) {
        std::ostringstream os;
        os << "assemble_operator: non-finite coefficient in row " << row;
        throw AssemblyError(os.str());
      }
      if (!out.empty() && out.back().first == e.first)
        out.back().second += e.second;
      else
        out.push_back(e);
    }
    out.erase(std::remove_if(out.begin(), out.end(), [](const Entry& e) { return e.second == 0.0; }), out.end());
    return out;
  }

  const Grid4D& grid_;
  const ModelParams& p_;
  std::array<RowTable, 4> d1_;
  std::array<RowTable, 4> d2_;
};

enum class EndRule { pde, zero, extrapolate };

// 1D projector: identity rows except at constrained ends.
SparseMatrix projector_1d(const std::vector<double>& x, EndRule lo, EndRule hi) {
  const int m = static_cast<int>(x.size());
  std::vector<std::vector<Entry>> rows(m);
  for (int i = 0; i < m; ++i) rows[i] = {{i, 1.0}};
  if (lo == EndRule::zero) rows[0].clear();
  if (lo == EndRule::extrapolate) {
    const double q = (x[1] - x[0]) / (x[2] - x[1]);
    rows[0] = {{1, 1.0 + q}, {2, -q}};
  }
  if (hi == EndRule::zero) rows[m - 1].clear();
  if (hi == EndRule::extrapolate) {
    const double q = (x[m - 1] - x[m - 2]) / (x[m - 2] - x[m - 3]);
    rows[m - 1] = {{m - 3, -q}, {m - 2, 1.0 + q}};
  }
  return from_rows(rows, m);
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  std::vector<std::vector<Entry>> rows(static_cast<std::size_t>(a.rows() * b.rows()));
  const int bc = static_cast<int>(b.cols());
  for (int i = 0; i < a.outerSize(); ++i)
    for (int k = 0; k < b.outerSize(); ++k) {
      auto& row = rows[static_cast<std::size_t>(i) * b.rows() + k];
      for (SparseMatrix::InnerIterator ia(a, i); ia; ++ia)
        for (SparseMatrix::InnerIterator ib(b, k); ib; ++ib)
          row.emplace_back(static_cast<int>(ia.col()) * bc + static_cast<int>(ib.col()), ia.value() * ib.value());
    }
  return from_rows(rows, static_cast<int>(a.cols() * b.cols()));
}

}  // namespace

std::string to_string(BoundaryMode m) {
  switch (m) {
    case BoundaryMode::dirichlet: return "dirichlet";
    case BoundaryMode::neumann_flux: return "neumann_flux";
    case BoundaryMode::abc: return "abc";
  }
  return "?";
}

BoundaryMode boundary_mode_from_string(const std::string& s) {
  if (s == "dirichlet") return BoundaryMode::dirichlet;
  if (s == "neumann_flux") return BoundaryMode::neumann_flux;
  if (s == "abc") return BoundaryMode::abc;
  throw ConfigError("unknown boundary mode '" + s + "' (expected dirichlet, neumann_flux or abc)");
}

DiffMatrix1D first_derivative_matrix(std::span<const double> x, double c, int axis) {
  check_nodes(x, 3, "first_derivative_matrix");
  const int m = static_cast<int>(x.size());
  std::vector<std::vector<Entry>> rows(m);
  {
    const auto w = rbf::boundary_first_weights(x[1] - x[0], c);
    rows[0] = {{0, w.weights[0]}, {1, w.weights[1]}};
  }
  for (int i = 1; i < m - 1; ++i) {
    const double h = x[i] - x[i - 1];
    const auto w = rbf::first_derivative_weights({h, (x[i + 1] - x[i]) / h, c});
    rows[i] = {{i - 1, w.weights[0]}, {i, w.weights[1]}, {i + 1, w.weights[2]}};
  }
  {
    const auto w = rbf::boundary_first_weights(x[m - 1] - x[m - 2], c);
    rows[m - 1] = {{m - 2, w.weights[0]}, {m - 1, w.weights[1]}};
  }
  return DiffMatrix1D{from_rows(rows, m), axis, 1};
}

DiffMatrix1D second_derivative_matrix(std::span<const double> x, double c, int axis) {
  check_nodes(x, 4, "second_derivative_matrix");
  const int m = static_cast<int>(x.size());
  std::vector<std::vector<Entry>> rows(m);
  const auto edge = rbf::boundary_second_weights(c);
  rows[0] = {{0, edge.weights[0]}, {1, edge.weights[1]}};
  {
    const double h = x[1] - x[0];
    const auto w = rbf::near_boundary_second_weights(h, (x[2] - x[1]) / h, c);
    rows[1] = {{0, w.weights[0]}, {1, w.weights[1]}, {2, w.weights[2]}};
  }
  for (int i = 2; i < m - 1; ++i) {
    const double h = x[i] - x[i - 1];
    const auto w = rbf::second_derivative_weights({h, (x[i] - x[i - 2]) / h, (x[i + 1] - x[i]) / h, c});
    rows[i] = {{i - 2, w.weights[0]}, {i - 1, w.weights[1]}, {i, w.weights[2]}, {i + 1, w.weights[3]}};
  }
  rows[m - 1] = {{m - 2, edge.weights[0]}, {m - 1, edge.weights[1]}};
  return DiffMatrix1D{from_rows(rows, m), axis, 2};
}

long SparseOperator::bandwidth() const {
  long bw = 0;
  for (int i = 0; i < matrix.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(matrix, i); it; ++it) bw = std::max(bw, std::labs(static_cast<long>(it.col()) - i));
  return bw;
}

SparseOperator assemble_operator(const Grid4D& grid, const ModelParams& params, const OptionSpec& option,
                                 const AssemblyOptions& options, double tau) {
  option.validate();
  if (!(tau >= 0.0)) throw InvalidArgument("assemble_operator: tau must be >= 0");
  const auto [th_d, th_f] = theta_levels(params, options.theta_mode, tau);
  Assembler assembler(grid, params, options.shapes);
  SparseOperator op;
  op.matrix = assembler.build(th_d, th_f, TermSet::full);
  op.dims = grid.dims();
  op.time_dependent = !is_time_independent(params, options.theta_mode);
  op.tau = tau;
  op.boundary = BoundaryMode::abc;
  return op;
}

SparseMatrix boundary_projector(const Grid4D& grid, BoundaryMode mode, const OptionSpec& option) {
  const std::size_t n = grid.size();
  if (mode == BoundaryMode::abc) {
    SparseMatrix eye(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    eye.setIdentity();
    return eye;
  }
  if (mode == BoundaryMode::dirichlet && option.kind != OptionKind::call)
    throw ConfigError("boundary mode dirichlet pins V = 0 at s = 0 and is only valid for calls; use abc or "
                      "neumann_flux for puts");
  for (int a = 0; a < 4; ++a)
    if (grid.nodes[a].size() < 4) throw InvalidArgument("boundary_projector: every axis needs at least 4 nodes");
  const EndRule s_lo = mode == BoundaryMode::dirichlet ? EndRule::zero : EndRule::extrapolate;
  const auto ps = projector_1d(grid.nodes[0], s_lo, EndRule::extrapolate);
  const auto pv = projector_1d(grid.nodes[1], EndRule::pde, EndRule::extrapolate);
  const auto pd = projector_1d(grid.nodes[2], EndRule::extrapolate, EndRule::extrapolate);
  const auto pf = projector_1d(grid.nodes[3], EndRule::extrapolate, EndRule::extrapolate);
  return kron(kron(kron(pf, pd), pv), ps);
}

SparseOperator impose_boundaries(SparseOperator op, const Grid4D& grid, BoundaryMode mode, const OptionSpec& option) {
  if (op.boundary != BoundaryMode::abc)
    throw ConfigError("impose_boundaries: boundaries already imposed (" + to_string(op.boundary) + ")");
  if (static_cast<std::size_t>(op.matrix.rows()) != grid.size())
    throw InvalidArgument("impose_boundaries: operator size does not match grid");
  if (mode != BoundaryMode::abc) {
    const SparseMatrix p = boundary_projector(grid, mode, option);
    op.matrix = (p * op.matrix).pruned();
  }
  op.boundary = mode;
  return op;
}

AffineOperator::AffineOperator(const Grid4D& grid, const ModelParams& params, const OptionSpec& option,
                               const AssemblyOptions& options, BoundaryMode mode)
    : dims(grid.dims()), boundary(mode), params_(params), mode_(options.theta_mode) {
  option.validate();
  time_dependent_ = !is_time_independent(params, options.theta_mode);
  Assembler assembler(grid, params, options.shapes);
  base = assembler.build(0.0, 0.0, TermSet::full);
  d_part = assembler.build(0.0, 0.0, TermSet::theta_d_only);
  f_part = assembler.build(0.0, 0.0, TermSet::theta_f_only);
  if (mode != BoundaryMode::abc) {
    const SparseMatrix p = boundary_projector(grid, mode, option);
    base = (p * base).pruned();
    d_part = (p * d_part).pruned();
    f_part = (p * f_part).pruned();
  }
}

std::pair<double, double> AffineOperator::theta(double tau) const { return theta_levels(params_, mode_, tau); }

SparseOperator AffineOperator::at(double tau) const {
  const auto [td, tf] = theta(tau);
  SparseOperator op;
  op.matrix = base + td * d_part + tf * f_part;
  op.dims = dims;
  op.time_dependent = time_dependent_;
  op.tau = tau;
  op.boundary = boundary;
  return op;
}

void AffineOperator::apply(double tau, const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  const auto [td, tf] = theta(tau);
  y.noalias() = base * x;
  if (td != 0.0) y.noalias() += td * (d_part * x);
  if (tf != 0.0) y.noalias() += tf * (f_part * x);
}

void write_triplets(std::ostream& os, const SparseMatrix& m) {
  const auto old = os.precision(17);
  os << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  for (int i = 0; i < m.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) os << i << ' ' << it.col() << ' ' << it.value() << '\n';
  os.precision(old);
}

}  // namespace fxhhw
