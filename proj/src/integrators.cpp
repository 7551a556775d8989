#include "fxhhw/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "fxhhw/error.hpp"

namespace fxhhw {

namespace {

double norm1(const SparseMatrix& a) {
  Eigen::VectorXd col = Eigen::VectorXd::Zero(a.cols());
  for (int i = 0; i < a.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) col(it.col()) += std::abs(it.value());
  return a.cols() > 0 ? col.maxCoeff() : 0.0;
}

// Arnoldi with modified Gram-Schmidt. Returns the dimension k actually built;
// basis has k+1 columns when no breakdown happened.
struct ArnoldiResult {
  Eigen::MatrixXd basis;  // n x (k+1)
  Eigen::MatrixXd h;      // (k+1) x k
  int k = 0;
  bool breakdown = false;
};

template <class Apply>
ArnoldiResult arnoldi(const Apply& apply, const Eigen::VectorXd& start, int dim, double breakdown_abs) {
  const auto n = start.size();
  ArnoldiResult r;
  r.basis.resize(n, dim + 1);
  r.h = Eigen::MatrixXd::Zero(dim + 1, dim);
  r.basis.col(0) = start / start.norm();
  Eigen::VectorXd p(n);
  for (int j = 0; j < dim; ++j) {
    apply(r.basis.col(j), p);
    for (int i = 0; i <= j; ++i) {
      const double hij = r.basis.col(i).dot(p);
      r.h(i, j) = hij;
      p.noalias() -= hij * r.basis.col(i);
    }
    const double hn = p.norm();
    r.h(j + 1, j) = hn;
    r.k = j + 1;
    if (hn <= breakdown_abs) {
      r.breakdown = true;
      break;
    }
    r.basis.col(j + 1) = p / hn;
  }
  return r;
}

}  // namespace

Eigen::MatrixXd expm_dense(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("expm_dense: matrix must be square");
  const auto n = a.rows();
  if (n == 0) return a;
  if (!a.allFinite()) throw InvalidArgument("expm_dense: matrix has non-finite entries");
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;
  const double nrm = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (nrm > theta13) s = std::max(0, static_cast<int>(std::ceil(std::log2(nrm / theta13))));
  const Eigen::MatrixXd x = a / std::ldexp(1.0, s);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd x2 = x * x;
  const Eigen::MatrixXd x4 = x2 * x2;
  const Eigen::MatrixXd x6 = x4 * x2;
  const Eigen::MatrixXd u =
      x * (x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id);
  const Eigen::MatrixXd v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;
  Eigen::MatrixXd r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

Eigen::VectorXd krylov_expm_action(const SparseMatrix& a, const Eigen::VectorXd& v0, const KrylovConfig& cfg,
                                   KrylovStats* stats) {
  if (a.rows() != a.cols() || a.rows() != v0.size())
    throw InvalidArgument("krylov_expm_action: dimension mismatch");
  if (cfg.Y < 1) throw InvalidArgument("krylov_expm_action: Y must be >= 1");
  if (!(cfg.tau >= 0.0)) throw InvalidArgument("krylov_expm_action: tau must be >= 0");
  const double beta0 = v0.norm();
  if (!(beta0 > 0.0)) throw InvalidArgument("krylov_expm_action: starting vector is zero");
  if (!std::isfinite(beta0)) throw InvalidArgument("krylov_expm_action: starting vector is not finite");

  const auto n = static_cast<int>(v0.size());
  int y = cfg.Y;
  if (y > n) {
    emit_warning("krylov.subspace_clamped",
                 "Krylov subspace dimension " + std::to_string(y) + " exceeds N = " + std::to_string(n) + "; clamped");
    y = n;
  }

  KrylovStats st;
  Eigen::VectorXd w = v0;
  if (cfg.tau == 0.0) {
    if (stats) *stats = st;
    return w;
  }
  const double anorm = norm1(a);
  const double breakdown_abs = cfg.breakdown_tol * std::max(anorm, std::numeric_limits<double>::min());
  auto apply = [&](const auto& x, Eigen::VectorXd& out) { out.noalias() = a * x; };

  double t = 0.0;
  double dt = cfg.tau;
  while (t < cfg.tau) {
    if (st.steps >= cfg.max_substeps) {
      std::ostringstream os;
      os << "krylov_expm_action: exceeded " << cfg.max_substeps << " substeps";
      throw KrylovError(os.str(), st.error_estimate);
    }
    const double beta = w.norm();
    if (beta == 0.0) break;
    auto ar = arnoldi(apply, w, y, breakdown_abs);
    st.matvecs += ar.k;
    st.subspace_used = std::max(st.subspace_used, ar.k);
    const int k = ar.k;
    const double hnext = ar.h(k, k - 1);

    // A maps w to zero: the exact result is w itself.
    if (ar.breakdown && k == 1 && ar.h(0, 0) == 0.0) {
      st.breakdown = true;
      ++st.steps;
      break;
    }

    while (true) {
      const double step = std::min(dt, cfg.tau - t);
      // Augmented matrix [[step H, e1], [0, 0]] yields exp(step H) e1 and phi1(step H) e1.
      Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(k + 1, k + 1);
      aug.topLeftCorner(k, k) = step * ar.h.topLeftCorner(k, k);
      aug(0, k) = 1.0;
      const Eigen::MatrixXd e = expm_dense(aug);
      const double err = ar.breakdown ? 0.0 : beta * hnext * step * std::abs(e(k - 1, k));
      const double allowed = cfg.tol * beta0 * (step / cfg.tau);
      if (err <= allowed || (!cfg.allow_substeps && ar.breakdown)) {
        w = beta * (ar.basis.leftCols(k) * e.col(0).head(k));
        t = (step == cfg.tau - t) ? cfg.tau : t + step;
        st.error_estimate += err / beta0;
        st.breakdown = st.breakdown || ar.breakdown;
        ++st.steps;
        if (err < 0.1 * allowed) dt = step * 2.0;
        break;
      }
      if (!cfg.allow_substeps) {
        std::ostringstream os;
        os << "krylov_expm_action: error estimate " << err / beta0 << " exceeds tolerance " << cfg.tol
           << " with Y = " << k << " and substeps disabled";
        throw KrylovError(os.str(), err / beta0);
      }
      dt = step * 0.5;
      if (dt < cfg.tau * 1e-12) throw KrylovError("krylov_expm_action: step size underflow", err / beta0);
    }
    if (!w.allFinite()) throw KrylovError("krylov_expm_action: non-finite result", st.error_estimate);
  }
  if (stats) *stats = st;
  return w;
}

Eigen::VectorXd modified_midpoint_solve(const OperatorAction& a, const Eigen::VectorXd& v0, const MidpointConfig& cfg,
                                        MidpointStats* stats) {
  if (!(cfg.delta_tau > 0.0) || !std::isfinite(cfg.delta_tau))
    throw InvalidArgument("modified_midpoint_solve: delta_tau must be > 0");
  if (cfg.steps < 1) throw InvalidArgument("modified_midpoint_solve: steps must be >= 1");
  if (cfg.substeps < 1) throw InvalidArgument("modified_midpoint_solve: substeps must be >= 1");

  MidpointStats st;
  const int n = cfg.substeps;
  const double h = cfg.delta_tau / n;
  const double ref = std::max(v0.norm(), std::numeric_limits<double>::min());
  const double limit = cfg.growth_limit * ref;
  Eigen::VectorXd y = v0;
  Eigen::VectorXd z_prev(v0.size()), z(v0.size()), f(v0.size()), z_next(v0.size());

  auto guard = [&](const Eigen::VectorXd& x, int step) {
    const double nx = x.norm();
    st.max_growth = std::max(st.max_growth, nx / ref);
    if (!(nx <= limit)) {
      std::ostringstream os;
      os << "modified_midpoint_solve: solution norm grew by " << nx / ref << "x at step " << step
         << "; the time step is likely outside the stability region (compare delta_tau with 1/|lambda_max|)";
      throw InstabilityError(os.str(), nx / ref);
    }
  };

  for (int m = 0; m < cfg.steps; ++m) {
    const double t0 = m * cfg.delta_tau;
    z_prev = y;
    a(t0, z_prev, f);
    z = z_prev + h * f;
    ++st.matvecs;
    for (int k = 1; k < n; ++k) {
      a(t0 + k * h, z, f);
      ++st.matvecs;
      z_next = z_prev + 2.0 * h * f;
      z_prev.swap(z);
      z.swap(z_next);
    }
    a(t0 + n * h, z, f);
    ++st.matvecs;
    y = 0.5 * (z + z_prev + h * f);
    guard(y, m + 1);
    ++st.macro_steps;
  }
  if (stats) *stats = st;
  return y;
}

Eigen::VectorXd modified_midpoint_solve(const SparseMatrix& a, const Eigen::VectorXd& v0, const MidpointConfig& cfg,
                                        MidpointStats* stats) {
  if (a.rows() != a.cols() || a.rows() != v0.size())
    throw InvalidArgument("modified_midpoint_solve: dimension mismatch");
  return modified_midpoint_solve([&a](double, const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = a * x; },
                                 v0, cfg, stats);
}

namespace {

enum class Which { largest_modulus, largest_real };

struct Ritz {
  std::complex<double> value;
  bool converged = false;
  int iterations = 0;
};

template <class Apply>
Ritz extreme_ritz(const Apply& apply, Eigen::Index n, Which which, const SpectralOptions& opts, double scale) {
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXd start(n);
  for (Eigen::Index i = 0; i < n; ++i) start(i) = nd(rng);
  const int dim = static_cast<int>(std::min<Eigen::Index>(opts.max_subspace, n));
  Ritz best;
  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    auto ar = arnoldi(apply, start, dim, 1e-14 * std::max(scale, 1e-300));
    best.iterations += ar.k;
    const int k = ar.k;
    Eigen::EigenSolver<Eigen::MatrixXd> es(ar.h.topLeftCorner(k, k));
    const auto& ev = es.eigenvalues();
    Eigen::Index pick = 0;
    for (Eigen::Index i = 1; i < ev.size(); ++i) {
      const bool better = which == Which::largest_modulus ? std::abs(ev(i)) > std::abs(ev(pick))
                                                          : ev(i).real() > ev(pick).real();
      if (better) pick = i;
    }
    const Eigen::VectorXcd yv = es.eigenvectors().col(pick);
    const double resid = ar.breakdown ? 0.0 : ar.h(k, k - 1) * std::abs(yv(k - 1)) / yv.norm();
    best.value = ev(pick);
    if (resid <= opts.tol * std::max(std::abs(ev(pick)), scale * 1e-12)) {
      best.converged = true;
      break;
    }
    // Restart from the real part of the Ritz vector (plus imaginary part for complex pairs).
    const Eigen::VectorXcd x = ar.basis.leftCols(k).template cast<std::complex<double>>() * yv;
    start = x.real() + x.imag();
    if (!(start.norm() > 0.0)) break;
  }
  return best;
}

}  // namespace

SpectralReport estimate_lambda_max(const SparseMatrix& a, const SpectralOptions& opts) {
  if (a.rows() != a.cols() || a.rows() == 0) throw InvalidArgument("estimate_lambda_max: matrix must be square");
  const auto n = a.rows();
  const double scale = norm1(a);
  SpectralReport rep;
  if (scale == 0.0) {
    rep.converged = true;
    return rep;
  }
  auto apply_a = [&](const auto& x, Eigen::VectorXd& out) { out.noalias() = a * x; };
  const auto dom = extreme_ritz(apply_a, n, Which::largest_modulus, opts, scale);
  rep.dominant = dom.value;

  const double sigma = std::abs(dom.value);
  auto apply_shift = [&](const auto& x, Eigen::VectorXd& out) {
    out.noalias() = a * x;
    out += sigma * x;
  };
  const auto right = extreme_ritz(apply_shift, n, Which::largest_real, opts, scale + sigma);
  rep.re_lambda_max = right.value.real() - sigma;

  const SparseMatrix sym = 0.5 * (SparseMatrix(a.transpose()) + a);
  auto apply_sym = [&](const auto& x, Eigen::VectorXd& out) { out.noalias() = sym * x; };
  const auto sdom = extreme_ritz(apply_sym, n, Which::largest_modulus, opts, scale);
  const double ssigma = std::abs(sdom.value);
  auto apply_sym_shift = [&](const auto& x, Eigen::VectorXd& out) {
    out.noalias() = sym * x;
    out += ssigma * x;
  };
  const auto sright = extreme_ritz(apply_sym_shift, n, Which::largest_real, opts, scale + ssigma);
  rep.symmetric_lambda_max = sright.value.real() - ssigma;

  rep.iterations = dom.iterations + right.iterations + sdom.iterations + sright.iterations;
  rep.converged = dom.converged && right.converged && sdom.converged && sright.converged;
  return rep;
}

}  // namespace fxhhw
