// Weighted-Sobolev-loss regression of the memory kernel over a cubic spline
// basis:  E(theta) = ||g - theta * h||^2_{H1_alpha(rho)}  with RKHS-regularized
// normal equations, plus the plain-L2 and derivative-only variants.
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>

#include "glekit/prony_series.hpp"
#include "glekit/spline_basis.hpp"

namespace glekit {

enum class AlphaConvention {
  balanced_square,  // (a1'^2, a2'^2) / (a1'^2 + a2'^2): balances the transform at 0 and inf
  paper_literal,    // (a1', a2') / (a1'^2 + a2'^2)
  sum_linear,       // (a1', a2') / (a1' + a2')
};

struct AlphaSelection {
  double alpha1_raw = 0.0;  // h(0) = sum w_k
  double alpha2_raw = 0.0;  // int_0^inf h = sum w_k / (-lambda_k)
  double alpha1 = 0.0;      // selected convention
  double alpha2 = 0.0;
  AlphaConvention convention = AlphaConvention::balanced_square;
};

// Scale parameters from the fitted autocorrelation. Both raw components must
// come out real and positive (imaginary parts below 1e-10 relative are
// discarded); otherwise throws numeric_error.
AlphaSelection alpha_from_h(const PronySeries& h,
                            AlphaConvention convention = AlphaConvention::balanced_square);

struct WeightedSpace {
  double omega = 0.0;   // measure density e^{-2 omega t}
  double alpha1 = 0.5;
  double alpha2 = 0.5;
  void validate() const;  // omega > 0, alpha >= 0, alpha1 + alpha2 = 1 (1e-12)
};

// Closed-form evaluation of (psi * h)(t) and its derivative for a piecewise
// cubic psi and Prony h, via exact polynomial-times-exponential moments.
// The derivative uses (psi*h)'(t) = psi(t) h(0) + (psi*h')(t) analytically.
class BasisConvolution {
 public:
  BasisConvolution(const PiecewisePoly& psi, const PronySeries& h);

  struct ValueDeriv {
    double value;
    double deriv;
  };
  ValueDeriv eval(double t) const;

 private:
  PiecewisePoly psi_;
  std::vector<cdouble> weights_, rates_;
  double h0_;
  // prefix_[j * p + k] = int_{b0}^{b_j} psi(s) e^{lambda_k (b_j - s)} ds
  std::vector<cdouble> prefix_;
};

struct AssemblyOptions {
  double tail_tol = 1e-12;        // integrand truncation threshold
  double panel_width_scale = 1.0; // < 1 refines the composite rule
};

// Shared quadrature tables for one (basis, h, g, omega): the Sobolev inner
// products split into a value part and a derivative part, mixed by alpha.
struct RegressionProblem {
  SplineBasis basis;
  PronySeries h_fit, g_fit;
  double omega = 0.0;
  Eigen::MatrixXd a_val, a_der;  // <f_i, f_j>_{L2(rho)}, <f_i', f_j'>_{L2(rho)}
  Eigen::VectorXd b_val, b_der;  // <f_i, g>, <f_i', g'>
  double g_sq_val = 0.0, g_sq_der = 0.0;
  double t_int = 0.0;            // quadrature truncation point

  static RegressionProblem assemble(const SplineBasis& basis, const PronySeries& h,
                                    const PronySeries& g, double omega,
                                    const AssemblyOptions& options = {});

  // A = alpha1 A_val + alpha2 A_der (symmetrized, PSD-checked), b likewise.
  std::pair<Eigen::MatrixXd, Eigen::VectorXd> normal_system(const WeightedSpace& space) const;
  double loss_constant(const WeightedSpace& space) const {
    return space.alpha1 * g_sq_val + space.alpha2 * g_sq_der;
  }
};

std::pair<Eigen::MatrixXd, Eigen::VectorXd> assemble_normal_system(
    const SplineBasis& basis, const PronySeries& h, const PronySeries& g,
    const WeightedSpace& space, const AssemblyOptions& options = {});

struct RkhsDiagnostics {
  double lambda_reg = 0.0;
  double loss_value = 0.0;   // quadratic loss at the solution (with constant)
  double penalty = 0.0;      // c^T A^+ c
  int effective_rank = 0;
  bool noise_floor_fit = false;
};

// argmin c^T A c - 2 b^T c + lambda c^T A^+ c over the numerical range of A
// (eigenvalues > pinv_tol * max; null-space coefficients are zero), lambda
// by the L-curve corner over the grid. loss_constant shifts the recorded
// loss so it is nonnegative.
Eigen::VectorXd solve_rkhs(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                           std::span<const double> lcurve_grid, double pinv_tol,
                           double loss_constant, RkhsDiagnostics* diag = nullptr);

enum class LossKind { E, E1, E2 };

struct KernelEstimate {
  SplineBasis basis;
  Eigen::VectorXd coeffs;
  LossKind loss = LossKind::E;
  double omega = 0.0;
  double alpha1 = 0.0, alpha2 = 0.0;
  double lambda_reg = 0.0;
  double loss_value = 0.0;

  double eval(double t) const;
  double deriv(double t) const;
};

struct EstimateOptions {
  std::vector<double> lcurve_grid;  // empty: 30 log points on [1e-12,1]*trace(A)/K
  double pinv_tol = 1e-10;
  AssemblyOptions assembly;
};

// loss == E uses the alpha pair from `space`; E1 forces (1, 0); E2 forces
// (0, 1). Everything else in the pipeline is identical.
KernelEstimate estimate_kernel(const RegressionProblem& problem, const WeightedSpace& space,
                               LossKind loss, const EstimateOptions& options = {},
                               RkhsDiagnostics* diag = nullptr);
KernelEstimate estimate_kernel(const PronySeries& h, const PronySeries& g,
                               const SplineBasis& basis, const WeightedSpace& space,
                               LossKind loss, const EstimateOptions& options = {},
                               RkhsDiagnostics* diag = nullptr);

// Direct quadrature of the Sobolev loss of a spline candidate; used to
// cross-check the quadratic form and the E = a1 E1 + a2 E2 decomposition.
double sobolev_loss_direct(const SplineBasis& basis, const Eigen::VectorXd& coeffs,
                           const PronySeries& h, const PronySeries& g,
                           const WeightedSpace& space, const AssemblyOptions& options = {});

}  // namespace glekit
