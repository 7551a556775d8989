#pragma once

// Time integration of V'(tau) = A(tau) V(tau) and spectral diagnostics.

#include <Eigen/Dense>

#include <complex>
#include <functional>

#include "fxhhw/operator.hpp"

namespace fxhhw {

/// Dense matrix exponential, scaling-and-squaring with a degree-13 Pade approximant.
Eigen::MatrixXd expm_dense(const Eigen::MatrixXd& a);

struct KrylovConfig {
  int Y = 100;                   // subspace dimension, clamped to N
  double breakdown_tol = 1e-14;  // relative to ||tau A||_1
  double tau = 1.0;              // horizon; A is scaled by tau before Arnoldi
  double tol = 1e-10;            // relative local error target per step
  bool allow_substeps = true;    // split the horizon when one subspace is not enough
  int max_substeps = 100000;
};

struct KrylovStats {
  int subspace_used = 0;       // largest Arnoldi dimension actually built
  int steps = 0;               // Krylov steps taken over the horizon
  int matvecs = 0;
  bool breakdown = false;      // happy breakdown reached (exact invariant subspace)
  double error_estimate = 0.0; // accumulated a posteriori estimate, relative to ||v0||
};

/// exp(tau A) v0 by Arnoldi (modified Gram-Schmidt) and exp(H_Y).
/// Throws InvalidArgument for v0 = 0, KrylovError when the error estimate
/// stays above tol and substeps are disabled or exhausted.
Eigen::VectorXd krylov_expm_action(const SparseMatrix& a, const Eigen::VectorXd& v0, const KrylovConfig& cfg,
                                   KrylovStats* stats = nullptr);

/// y = A(tau) x.
using OperatorAction = std::function<void(double tau, const Eigen::VectorXd& x, Eigen::VectorXd& y)>;

struct MidpointConfig {
  double delta_tau = 0.0;      // macro step
  int steps = 0;               // number of macro steps; steps * delta_tau = horizon
  int substeps = 2;            // modified-midpoint substeps per macro step (>= 1)
  double growth_limit = 1e6;   // abort when ||Z|| exceeds this multiple of ||V(0)||
};

struct MidpointStats {
  int macro_steps = 0;
  int matvecs = 0;
  double max_growth = 0.0;
};

/// Modified midpoint (Gragg) integration. Each macro step of length delta_tau
/// uses n = substeps sub-intervals of H = delta_tau / n:
///   Z0 = V, Z1 = Z0 + H A Z0, Z(k+1) = Z(k-1) + 2 H A Z(k),
///   V_next = (Z(n) + Z(n-1) + H A Z(n)) / 2.
/// With substeps = steps and a single macro step this is the literal global scheme.
Eigen::VectorXd modified_midpoint_solve(const OperatorAction& a, const Eigen::VectorXd& v0, const MidpointConfig& cfg,
                                        MidpointStats* stats = nullptr);
Eigen::VectorXd modified_midpoint_solve(const SparseMatrix& a, const Eigen::VectorXd& v0, const MidpointConfig& cfg,
                                        MidpointStats* stats = nullptr);

struct SpectralReport {
  std::complex<double> dominant;    // largest-modulus eigenvalue
  double re_lambda_max = 0.0;       // largest real part
  double symmetric_lambda_max = 0.0;  // largest eigenvalue of (A^T + A)/2
  int iterations = 0;
  bool converged = false;
};

struct SpectralOptions {
  int max_subspace = 120;
  int max_restarts = 30;
  double tol = 1e-8;
  unsigned seed = 12345;
};

/// Arnoldi-based estimates. The largest real part is found by running Arnoldi
/// on A + sigma I with sigma = |dominant|, which moves the rightmost
/// eigenvalues to the largest modulus.
SpectralReport estimate_lambda_max(const SparseMatrix& a, const SpectralOptions& opts = {});

}  // namespace fxhhw
