#include "glekit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "glekit/quadrature.hpp"

namespace glekit {

double l2_rho_norm_sq(const PronySeries& f, double omega) {
  if (!(omega > 0.0)) throw validation_error("norm needs omega > 0");
  for (const cdouble& r : f.rates())
    if (!(r.real() < omega))
      throw numeric_error("norm integral diverges: mode grows faster than the measure decays");
  // int |f|^2 e^{-2wt} = sum_ij w_i conj(w_j) / (2w - lambda_i - conj(lambda_j))
  cdouble acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = 0; j < f.size(); ++j)
      acc += f.weights()[i] * std::conj(f.weights()[j]) /
             (2.0 * omega - f.rates()[i] - std::conj(f.rates()[j]));
  return acc.real();
}

double l2_rho_norm_sq(const FunctionProbe& f, double omega) {
  if (!(omega > 0.0)) throw validation_error("norm needs omega > 0");
  double t_end = f.t_max;
  if (f.decay_rate > 0.0) {
    const double tail = std::log(1e12) / (2.0 * omega + 2.0 * f.decay_rate);
    t_end = std::max(t_end, tail);
  }
  if (!(t_end > 0.0)) throw validation_error("norm probe needs a decay rate or t_max");
  const double width = 1.0 / std::max(omega, 0.25);
  const PanelRule rule = composite_gauss16(t_end, width, f.breakpoints);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = rule.nodes[i];
    const double v = f.value(t);
    acc += rule.weights[i] * v * v * std::exp(-2.0 * omega * t);
  }
  return acc;
}

double h1_alpha_norm_sq(const PronySeries& f, double omega, double alpha1, double alpha2) {
  return alpha1 * l2_rho_norm_sq(f, omega) + alpha2 * l2_rho_norm_sq(f.derivative(), omega);
}

double h1_alpha_norm_sq(const FunctionProbe& f, double omega, double alpha1, double alpha2) {
  FunctionProbe d = f;
  d.value = f.deriv;
  return alpha1 * l2_rho_norm_sq(f, omega) + alpha2 * l2_rho_norm_sq(d, omega);
}

FunctionProbe probe_difference(const PronySeries& a, const KernelEstimate& b) {
  FunctionProbe p;
  p.value = [a, b](double t) { return a.eval(t) - b.eval(t); };
  p.deriv = [a, b](double t) { return a.deriv(t) - b.deriv(t); };
  p.breakpoints = b.basis.breakpoints();
  p.decay_rate = a.min_decay();
  p.t_max = b.basis.t_end;
  return p;
}

FunctionProbe probe_difference(const std::function<double(double)>& fn, double fn_t_max,
                               const KernelEstimate& b) {
  FunctionProbe p;
  p.value = [fn, b](double t) { return fn(t) - b.eval(t); };
  p.deriv = {};
  p.breakpoints = b.basis.breakpoints();
  p.decay_rate = 0.0;
  p.t_max = std::max(fn_t_max, b.basis.t_end);
  return p;
}

CoercivityReport coercivity_bounds(const PronySeries& f, double omega, double alpha1,
                                   double alpha2, const TauGridSpec& grid,
                                   CoercivityFunction which) {
  if (!(omega > 0.0)) throw validation_error("coercivity scan needs omega > 0");
  if (grid.points < 2) throw validation_error("coercivity scan needs at least 2 grid points");
  f.require_decaying();

  auto q = [&](double tau) {
    const cdouble z(omega, tau);
    const cdouble fz = laplace_eval(f, z);
    return alpha1 * std::norm(fz) + alpha2 * std::norm(z * fz);
  };

  CoercivityReport report;
  report.omega = omega;
  report.alpha1 = alpha1;
  report.alpha2 = alpha2;
  switch (which) {
    case CoercivityFunction::h_sobolev: report.which = "h-sobolev"; break;
    case CoercivityFunction::h_plain: report.which = "h-plain"; break;
    case CoercivityFunction::h_derivative: report.which = "h-derivative"; break;
    case CoercivityFunction::gamma_sobolev: report.which = "gamma-sobolev"; break;
  }

  report.tau_grid.reserve(static_cast<std::size_t>(grid.points) + 1);
  report.tau_grid.push_back(0.0);
  const double log_min = std::log(grid.tau_min), log_max = std::log(grid.tau_max);
  for (int i = 0; i < grid.points; ++i)
    report.tau_grid.push_back(std::exp(log_min + (log_max - log_min) * i / (grid.points - 1)));
  report.q_values.reserve(report.tau_grid.size());
  for (double tau : report.tau_grid) report.q_values.push_back(q(tau));

  std::size_t imin = 0, imax = 0;
  for (std::size_t i = 1; i < report.q_values.size(); ++i) {
    if (report.q_values[i] < report.q_values[imin]) imin = i;
    if (report.q_values[i] > report.q_values[imax]) imax = i;
  }

  auto refine = [&](std::size_t idx, bool minimize) {
    const double lo = report.tau_grid[idx > 0 ? idx - 1 : 0];
    const double hi =
        report.tau_grid[std::min(idx + 1, report.tau_grid.size() - 1)];
    if (!(hi > lo)) return std::pair<double, double>{report.tau_grid[idx], report.q_values[idx]};
    const double arg = minimize
                           ? golden_section_min(q, lo, hi, 1e-6)
                           : golden_section_min([&](double t) { return -q(t); }, lo, hi, 1e-6);
    return std::pair<double, double>{arg, q(arg)};
  };
  auto [argmin, qmin] = refine(imin, true);
  auto [argmax, qmax] = refine(imax, false);
  if (report.q_values[imin] < qmin) { qmin = report.q_values[imin]; argmin = report.tau_grid[imin]; }
  if (report.q_values[imax] > qmax) { qmax = report.q_values[imax]; argmax = report.tau_grid[imax]; }

  // Limit candidates: q -> alpha2 |sum w|^2 as tau -> +-inf (attained only in
  // the limit); the z -> 0 balance value is reported but is not a point of
  // the scan line.
  report.q_limit_inf = alpha2 * std::norm(f.weight_sum());
  report.q_balance_zero = alpha1 * std::norm(f.integral_to_infinity());
  if (report.q_limit_inf < qmin) {
    qmin = report.q_limit_inf;
    argmin = std::numeric_limits<double>::infinity();
  }
  if (report.q_limit_inf > qmax) {
    qmax = report.q_limit_inf;
    argmax = std::numeric_limits<double>::infinity();
  }

  report.m_lower = qmin;
  report.M_upper = qmax;
  report.argmin_tau = argmin;
  report.argmax_tau = argmax;
  return report;
}

double error_bound(double h_err_sq, double g_err_sq, double m_heps, double m_gamma_upper,
                   ErrorBoundCase which) {
  if (!(m_heps > 0.0))
    throw numeric_error("coercivity failure: lower constant m is not positive");
  if (which == ErrorBoundCase::known_h) return g_err_sq / m_heps;
  return 2.0 / m_heps * (m_gamma_upper * h_err_sq + g_err_sq);
}

std::vector<cdouble> spectral_function(const PronySeries& kernel, std::span<const double> freqs) {
  std::vector<cdouble> out;
  out.reserve(freqs.size());
  for (double w : freqs) out.push_back(laplace_eval(kernel, cdouble(0.0, w)));
  return out;
}

std::vector<cdouble> spectral_function(const DeltaKernel& kernel, std::span<const double> freqs,
                                       bool mollified) {
  std::vector<cdouble> out;
  out.reserve(freqs.size());
  for (double w : freqs) out.push_back(kernel.fourier(w, mollified));
  return out;
}

std::vector<cdouble> spectral_function(const KernelEstimate& kernel,
                                       std::span<const double> freqs) {
  std::vector<cdouble> out;
  out.reserve(freqs.size());
  const std::vector<double> bp = kernel.basis.breakpoints();
  for (double w : freqs) {
    // Oscillation-aware panel width.
    const double width = std::min(kernel.basis.knot_spacing(),
                                  w > 0.0 ? std::numbers::pi / (2.0 * w) : 1e300);
    const PanelRule rule = composite_gauss16(kernel.basis.t_end, width, bp);
    cdouble acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t = rule.nodes[i];
      acc += rule.weights[i] * kernel.eval(t) * std::exp(cdouble(0.0, -w * t));
    }
    out.push_back(acc);
  }
  return out;
}

double l2_rho_norm_sq_laplace(const PronySeries& f, double omega, double rel_tol) {
  if (f.empty()) return 0.0;
  auto integrand = [&](double tau) { return std::norm(laplace_eval(f, cdouble(omega, tau))); };
  const double tau_cut = 1e4 * std::max({1.0, f.max_abs_rate(), omega});
  double acc = integrate_adaptive(integrand, 0.0, tau_cut, rel_tol * 0.1);
  acc += integrate_adaptive(integrand, -tau_cut, 0.0, rel_tol * 0.1);
  // |f^|^2 -> |sum w|^2 / |z|^2: integrable tail added in closed form.
  const double s1 = std::norm(f.weight_sum());
  acc += 2.0 * s1 * (std::numbers::pi / 2.0 - std::atan(tau_cut / omega)) / omega;
  return acc / (2.0 * std::numbers::pi);
}

}  // namespace glekit
