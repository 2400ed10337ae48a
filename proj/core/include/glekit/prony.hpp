// Regularized Prony fitting of correlation estimates: Hankel recurrence
// coefficients, companion-matrix roots, decay clamping with branch-cut
// augmentation, and a constrained RKHS-regularized amplitude fit.
#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "glekit/correlation.hpp"
#include "glekit/prony_series.hpp"

namespace glekit {

struct PronyConfig {
  int p_prime = 10;          // model order before augmentation
  double sigma = 0.05;       // exponential-decay threshold (1/time)
  bool constrain_derivative_zero = true;  // enforce sum w_k lambda_k = 0
  // Clamp when |r| >= e^{-sigma dt_obs} (continuous-time rate). The paper's
  // literal e^{-sigma} threshold is available as a toggle.
  bool clamp_literal_threshold = false;
  std::vector<double> lcurve_grid;  // empty: 30 log points on [1e-12,1]*scale
  double pinv_tol = 1e-10;          // relative singular-value cutoff
  double branch_angle_tol = 1e-6;   // radians from the negative real axis
  double root_merge_tol = 1e-8;     // repeated-mode collapse tolerance

  void validate(int n_lags) const;
};

struct PronyDiagnostics {
  std::vector<cdouble> raw_roots;
  int clamped = 0;
  int discarded = 0;
  int augmented = 0;   // extra modes from branch-cut splitting
  int merged = 0;      // collapsed near-duplicate modes
  double lambda_reg = 0.0;
  double residual = 0.0;       // ||Z w - data||
  bool noise_floor_fit = false;  // exact-data guard skipped the L-curve
};

// Least-squares solution of the (N-p') x p' Hankel recurrence system with
// rhs -(h_{p'+1}, ..., h_N); singular values below pinv_tol * s_max are
// truncated.
Eigen::VectorXd hankel_coefficients(std::span<const double> values, int p_prime,
                                    double pinv_tol);

// Roots of z^p' + a_1 z^{p'-1} + ... + a_p', as companion-matrix eigenvalues.
std::vector<cdouble> characteristic_roots(const Eigen::VectorXd& a);

// Clamps root magnitudes to the decay threshold, takes principal logarithms,
// splits roots on the branch cut into both +/- i pi modes, and collapses
// repeated modes. Output rates are sorted with conjugate pairs adjacent.
std::vector<cdouble> regularize_roots(std::span<const cdouble> roots, double dt_obs,
                                      const PronyConfig& cfg,
                                      PronyDiagnostics* diag = nullptr);

// min ||Z w - y||^2 + lambda ||(Z* Z)^+ w||^2  over  sum w_k lambda_k = 0
// (when constrained), with Z_{n,k} = exp(lambda_k lag_n dt) and lambda by
// the L-curve corner. The equality constraint is eliminated exactly through
// a null-space parameterization; returned weights are averaged to exact
// conjugate symmetry.
std::vector<cdouble> fit_weights(std::span<const cdouble> rates, std::span<const double> values,
                                 std::span<const int> lags, double dt_obs,
                                 const PronyConfig& cfg, PronyDiagnostics* diag = nullptr);

// Full pipeline on the autocorrelation lags 1..N.
PronySeries prony_fit(const CorrelationEstimate& est, const PronyConfig& cfg,
                      PronyDiagnostics* diag = nullptr);

// Same pipeline on the force correlation; lag 0 joins the amplitude fit and
// the derivative constraint is disabled (phi'(0) need not vanish).
PronySeries prony_fit_force_corr(const CorrelationEstimate& est, const PronyConfig& cfg,
                                 PronyDiagnostics* diag = nullptr);

}  // namespace glekit
