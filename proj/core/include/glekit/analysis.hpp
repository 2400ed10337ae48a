// Weighted norms, Laplace-domain coercivity constants, theoretical error
// bounds, and the frequency-domain diagnostics behind the figure data.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "glekit/laplace_domain.hpp"
#include "glekit/prony_series.hpp"
#include "glekit/sobolev_regress.hpp"

namespace glekit {

// int_0^inf |f(t)|^2 e^{-2 omega t} dt, closed form over mode pairs.
double l2_rho_norm_sq(const PronySeries& f, double omega);

// Same integral for a general evaluable function; quadrature splits at the
// supplied breakpoints and truncates using the decay-rate envelope (the
// polynomial-tail case passes decay_rate 0 and an explicit t_max).
struct FunctionProbe {
  std::function<double(double)> value;
  std::function<double(double)> deriv;  // only needed for Sobolev norms
  std::vector<double> breakpoints;
  double decay_rate = 0.0;
  double t_max = 0.0;  // support/decay hint; 0 = derive from decay_rate
};
double l2_rho_norm_sq(const FunctionProbe& f, double omega);

// alpha1 ||f||^2_{L2(rho)} + alpha2 ||f'||^2_{L2(rho)}.
double h1_alpha_norm_sq(const PronySeries& f, double omega, double alpha1, double alpha2);
double h1_alpha_norm_sq(const FunctionProbe& f, double omega, double alpha1, double alpha2);

// Probes for common comparisons.
FunctionProbe probe_difference(const PronySeries& a, const KernelEstimate& b);
FunctionProbe probe_difference(const std::function<double(double)>& fn, double fn_t_max,
                               const KernelEstimate& b);

struct TauGridSpec {
  double tau_min = 1e-5;
  double tau_max = 1e5;
  int points = 2000;
};

enum class CoercivityFunction { h_sobolev, h_plain, h_derivative, gamma_sobolev };

struct CoercivityReport {
  double omega = 0.0;
  double alpha1 = 0.0, alpha2 = 0.0;
  double m_lower = 0.0;
  double M_upper = 0.0;
  double argmin_tau = 0.0;
  double argmax_tau = 0.0;
  // Analytic limit values of q along the scan line and at the origin:
  // q(tau -> inf) = alpha2 |sum w_k|^2 and the z -> 0 balance value
  // alpha1 |f^(0)|^2 (diagnostic; not an attainable point of the scan line).
  double q_limit_inf = 0.0;
  double q_balance_zero = 0.0;
  std::string which;
  std::vector<double> tau_grid;   // scan curve, for CSV dumps
  std::vector<double> q_values;
};

// q(tau) = alpha1 |f^(omega + i tau)|^2 + alpha2 |(omega + i tau) f^(...)|^2
// scanned on a log grid plus tau = 0, golden-section refined around the
// discrete extrema; m/M are the min/max over all candidates including the
// tau -> inf limit.
CoercivityReport coercivity_bounds(const PronySeries& f, double omega, double alpha1,
                                   double alpha2, const TauGridSpec& grid = {},
                                   CoercivityFunction which = CoercivityFunction::h_sobolev);

enum class ErrorBoundCase { known_h, estimated_h };

// Theorem-style bound on ||gamma - theta||^2_{L2(rho)}:
//   known_h:     g_err_sq / m
//   estimated_h: (2/m) (M_gamma h_err_sq + g_err_sq)
double error_bound(double h_err_sq, double g_err_sq, double m_heps, double m_gamma_upper,
                   ErrorBoundCase which);

// Fourier transform of a kernel estimate on a frequency grid.
std::vector<cdouble> spectral_function(const PronySeries& kernel, std::span<const double> freqs);
std::vector<cdouble> spectral_function(const DeltaKernel& kernel, std::span<const double> freqs,
                                       bool mollified = false);
std::vector<cdouble> spectral_function(const KernelEstimate& kernel,
                                       std::span<const double> freqs);

// (1/2pi) int |f^(omega + i tau)|^2 dtau by adaptive quadrature with an
// analytic 1/tau^2 tail estimate; equals the time-domain norm by the
// transform isometry (used as a numerical cross-check).
double l2_rho_norm_sq_laplace(const PronySeries& f, double omega, double rel_tol = 1e-8);

}  // namespace glekit
