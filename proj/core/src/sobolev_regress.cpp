#include "glekit/sobolev_regress.hpp"

#include <algorithm>
#include <cmath>

#include "glekit/quadrature.hpp"
#include "glekit/regularization.hpp"

namespace glekit {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// M_m(x; lambda) = int_0^x s^m e^{lambda s} ds for m = 0..3, Re(lambda) < 0,
// x >= 0: every factor stays bounded.
void exp_moments(cdouble lambda, double x, cdouble out[4]) {
  const cdouble lx = lambda * x;
  if (std::abs(lx) < 0.05) {
    for (int m = 0; m < 4; ++m) {
      cdouble sum = 0.0, term = 1.0;
      for (int i = 0; i < 16; ++i) {
        sum += term / static_cast<double>(m + i + 1);
        term *= lx / static_cast<double>(i + 1);
        if (std::abs(term) < 1e-20) break;
      }
      out[m] = std::pow(x, m + 1) * sum;
    }
    return;
  }
  const cdouble e = std::exp(lx);
  out[0] = expm1c(lx) / lambda;
  double xm = 1.0;
  for (int m = 1; m < 4; ++m) {
    xm *= x;
    out[m] = (xm * e - static_cast<double>(m) * out[m - 1]) / lambda;
  }
}

// int_0^x q(u) e^{lambda (x - u)} du for a local cubic q; substituting
// s = x - u turns it into bounded moments of q(x - s).
cdouble cubic_exp_integral(const std::array<double, 4>& q, cdouble lambda, double x) {
  // q(x - s) = d0 + d1 s + d2 s^2 + d3 s^3
  const double d0 = q[0] + x * (q[1] + x * (q[2] + x * q[3]));
  const double d1 = -(q[1] + x * (2.0 * q[2] + 3.0 * x * q[3]));
  const double d2 = q[2] + 3.0 * x * q[3];
  const double d3 = -q[3];
  cdouble m[4];
  exp_moments(lambda, x, m);
  return d0 * m[0] + d1 * m[1] + d2 * m[2] + d3 * m[3];
}

}  // namespace

AlphaSelection alpha_from_h(const PronySeries& h, AlphaConvention convention) {
  if (h.empty()) throw validation_error("alpha selection needs a nonempty series");
  h.require_decaying();
  const cdouble a1c = h.weight_sum();
  const cdouble a2c = h.integral_to_infinity();
  if (std::abs(a1c.imag()) > 1e-10 * std::abs(a1c) ||
      std::abs(a2c.imag()) > 1e-10 * std::abs(a2c))
    throw numeric_error("alpha selection: scale components are not real");
  AlphaSelection sel;
  sel.alpha1_raw = a1c.real();
  sel.alpha2_raw = a2c.real();
  sel.convention = convention;
  if (!(sel.alpha1_raw > 0.0) || !(sel.alpha2_raw > 0.0))
    throw numeric_error("alpha selection: degenerate h with non-positive h(0) or integral");
  const double s1 = sel.alpha1_raw, s2 = sel.alpha2_raw;
  switch (convention) {
    case AlphaConvention::balanced_square:
      sel.alpha1 = s1 * s1 / (s1 * s1 + s2 * s2);
      sel.alpha2 = s2 * s2 / (s1 * s1 + s2 * s2);
      break;
    case AlphaConvention::paper_literal:
      sel.alpha1 = s1 / (s1 * s1 + s2 * s2);
      sel.alpha2 = s2 / (s1 * s1 + s2 * s2);
      break;
    case AlphaConvention::sum_linear:
      sel.alpha1 = s1 / (s1 + s2);
      sel.alpha2 = s2 / (s1 + s2);
      break;
  }
  return sel;
}

void WeightedSpace::validate() const {
  if (!(omega > 0.0)) throw validation_error("weighted space needs omega > 0");
  if (!(alpha1 >= 0.0) || !(alpha2 >= 0.0))
    throw validation_error("alpha components must be nonnegative");
  if (std::abs(alpha1 + alpha2 - 1.0) > 1e-12)
    throw validation_error("alpha components must sum to 1");
}

BasisConvolution::BasisConvolution(const PiecewisePoly& psi, const PronySeries& h)
    : psi_(psi),
      weights_(h.weights().begin(), h.weights().end()),
      rates_(h.rates().begin(), h.rates().end()),
      h0_(h.eval(0.0)) {
  h.require_decaying();
  const std::size_t p = rates_.size();
  const std::size_t spans = psi_.span_count();
  prefix_.assign((spans + 1) * p, cdouble(0.0));
  const auto& bp = psi_.breakpoints();
  for (std::size_t j = 0; j < spans; ++j) {
    const double width = bp[j + 1] - bp[j];
    for (std::size_t k = 0; k < p; ++k) {
      // C(j+1) = e^{lambda w} C(j) + int_span psi e^{lambda (b_{j+1} - s)} ds
      const cdouble full = cubic_exp_integral(psi_.span_coeffs(j), rates_[k], width);
      prefix_[(j + 1) * p + k] = std::exp(rates_[k] * width) * prefix_[j * p + k] + full;
    }
  }
}

BasisConvolution::ValueDeriv BasisConvolution::eval(double t) const {
  const std::size_t p = rates_.size();
  const auto& bp = psi_.breakpoints();
  ValueDeriv out{0.0, 0.0};
  if (t <= bp.front() || p == 0) {
    out.deriv = psi_.eval(t) * h0_;
    return out;
  }
  cdouble value = 0.0, rate_value = 0.0;
  if (t >= bp.back()) {
    const std::size_t spans = psi_.span_count();
    for (std::size_t k = 0; k < p; ++k) {
      const cdouble ik = std::exp(rates_[k] * (t - bp.back())) * prefix_[spans * p + k];
      value += weights_[k] * ik;
      rate_value += weights_[k] * rates_[k] * ik;
    }
  } else {
    const auto it = std::upper_bound(bp.begin(), bp.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - bp.begin()) - 1;
    const double x = t - bp[j];
    for (std::size_t k = 0; k < p; ++k) {
      const cdouble partial = cubic_exp_integral(psi_.span_coeffs(j), rates_[k], x);
      const cdouble ik = std::exp(rates_[k] * x) * prefix_[j * p + k] + partial;
      value += weights_[k] * ik;
      rate_value += weights_[k] * rates_[k] * ik;
    }
  }
  out.value = value.real();
  out.deriv = psi_.eval(t) * h0_ + rate_value.real();
  return out;
}

RegressionProblem RegressionProblem::assemble(const SplineBasis& basis, const PronySeries& h,
                                              const PronySeries& g, double omega,
                                              const AssemblyOptions& options) {
  if (!(omega > 0.0)) throw validation_error("assembly needs omega > 0");
  h.require_decaying();
  g.require_decaying();
  const int K = basis.size();
  if (K < 4) throw validation_error("spline basis too small");

  RegressionProblem prob;
  prob.basis = basis;
  prob.h_fit = h;
  prob.g_fit = g;
  prob.omega = omega;

  // Truncate where e^{-2 omega t} times the slowest decay envelope falls
  // below tail_tol; panels never exceed min(knot spacing, 1/sigma_eff).
  const double sigma_min = std::min(h.min_decay(), g.min_decay());
  const double tail_rate = 2.0 * omega + 2.0 * std::max(sigma_min, 0.0);
  const double log_tol = std::log(1.0 / options.tail_tol);
  // The measure alone kills the integrand past ~log(1/tol)/(2 omega).
  prob.t_int = std::min(basis.t_end + log_tol / std::max(tail_rate, 1e-3),
                        std::max(1.0, 1.05 * log_tol / (2.0 * omega)));
  const double max_width =
      options.panel_width_scale *
      std::min(basis.knot_spacing(), 1.0 / std::max(std::max(sigma_min, omega), 1e-2));
  const PanelRule rule = composite_gauss16(prob.t_int, max_width, basis.breakpoints());

  std::vector<BasisConvolution> conv;
  conv.reserve(static_cast<std::size_t>(K));
  for (const PiecewisePoly& psi : basis.elements) conv.emplace_back(psi, h);

  MatrixXd av = MatrixXd::Zero(K, K), ad = MatrixXd::Zero(K, K);
  VectorXd bv = VectorXd::Zero(K), bd = VectorXd::Zero(K);
  double gv = 0.0, gd = 0.0;
  VectorXd f(K), fd(K);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double t = rule.nodes[q];
    const double wr = rule.weights[q] * std::exp(-2.0 * omega * t);
    for (int i = 0; i < K; ++i) {
      const auto vd = conv[static_cast<std::size_t>(i)].eval(t);
      f(i) = vd.value;
      fd(i) = vd.deriv;
    }
    const double gval = g.eval(t);
    const double gder = g.deriv(t);
    av.selfadjointView<Eigen::Lower>().rankUpdate(f, wr);
    ad.selfadjointView<Eigen::Lower>().rankUpdate(fd, wr);
    bv += wr * gval * f;
    bd += wr * gder * fd;
    gv += wr * gval * gval;
    gd += wr * gder * gder;
  }
  prob.a_val = av.selfadjointView<Eigen::Lower>();
  prob.a_der = ad.selfadjointView<Eigen::Lower>();
  prob.b_val = bv;
  prob.b_der = bd;
  prob.g_sq_val = gv;
  prob.g_sq_der = gd;
  return prob;
}

std::pair<MatrixXd, VectorXd> RegressionProblem::normal_system(const WeightedSpace& space) const {
  space.validate();
  MatrixXd a = space.alpha1 * a_val + space.alpha2 * a_der;
  a = 0.5 * (a + a.transpose()).eval();
  // PSD sanity: quadrature of a squared integrand cannot go meaningfully negative.
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(a, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10 * a.trace())
    throw numeric_error("assembled normal matrix is not positive semidefinite");
  VectorXd b = space.alpha1 * b_val + space.alpha2 * b_der;
  return {std::move(a), std::move(b)};
}

std::pair<MatrixXd, VectorXd> assemble_normal_system(const SplineBasis& basis,
                                                     const PronySeries& h, const PronySeries& g,
                                                     const WeightedSpace& space,
                                                     const AssemblyOptions& options) {
  return RegressionProblem::assemble(basis, h, g, space.omega, options).normal_system(space);
}

VectorXd solve_rkhs(const MatrixXd& a, const VectorXd& b, std::span<const double> lcurve_grid,
                    double pinv_tol, double loss_constant, RkhsDiagnostics* diag) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(a);
  if (eig.info() != Eigen::Success) throw numeric_error("eigendecomposition of A failed");
  const VectorXd& lam = eig.eigenvalues();
  const MatrixXd& q = eig.eigenvectors();
  const double cutoff = pinv_tol * std::max(lam.cwiseAbs().maxCoeff(), 0.0);
  const VectorXd beta = q.transpose() * b;

  std::vector<Eigen::Index> range;
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (lam(i) > cutoff && lam(i) > 0.0) range.push_back(i);

  auto solution = [&](double lreg) {
    VectorXd y = VectorXd::Zero(lam.size());
    for (Eigen::Index i : range) y(i) = beta(i) / (lam(i) + lreg / lam(i));
    return y;
  };
  auto loss_of = [&](const VectorXd& y) {
    double s = loss_constant;
    for (Eigen::Index i : range) s += lam(i) * y(i) * y(i) - 2.0 * beta(i) * y(i);
    return s;
  };
  auto penalty_of = [&](const VectorXd& y) {
    double s = 0.0;
    for (Eigen::Index i : range) s += y(i) * y(i) / lam(i);
    return s;
  };

  RkhsDiagnostics local;
  local.effective_rank = static_cast<int>(range.size());
  VectorXd y = solution(0.0);
  const double loss0 = loss_of(y);
  if (loss0 <= 1e-10 * std::max(loss_constant, 1e-300)) {
    local.noise_floor_fit = true;
    local.lambda_reg = 0.0;
    local.loss_value = loss0;
    local.penalty = penalty_of(y);
  } else {
    std::vector<double> grid(lcurve_grid.begin(), lcurve_grid.end());
    if (grid.empty())
      grid = default_lcurve_grid(a.trace() / static_cast<double>(std::max<Eigen::Index>(1, a.rows())));
    std::vector<LCurvePoint> points;
    std::vector<VectorXd> sols;
    for (double lr : grid) {
      VectorXd yl = solution(lr);
      points.push_back({lr, std::max(loss_of(yl), 0.0), penalty_of(yl)});
      sols.push_back(std::move(yl));
    }
    const std::size_t pick = lcurve_corner(points, std::max(loss_constant, 1e-300));
    y = sols[pick];
    local.lambda_reg = points[pick].lambda_reg;
    local.loss_value = points[pick].residual_sq;
    local.penalty = points[pick].penalty_sq;
  }
  if (diag) *diag = local;
  return q * y;
}

double KernelEstimate::eval(double t) const {
  double s = 0.0;
  for (int i = 0; i < basis.size(); ++i)
    s += coeffs(i) * basis.elements[static_cast<std::size_t>(i)].eval(t);
  return s;
}

double KernelEstimate::deriv(double t) const {
  double s = 0.0;
  for (int i = 0; i < basis.size(); ++i)
    s += coeffs(i) * basis.elements[static_cast<std::size_t>(i)].deriv(t);
  return s;
}

KernelEstimate estimate_kernel(const RegressionProblem& problem, const WeightedSpace& space,
                               LossKind loss, const EstimateOptions& options,
                               RkhsDiagnostics* diag) {
  WeightedSpace effective = space;
  if (loss == LossKind::E1) {
    effective.alpha1 = 1.0;
    effective.alpha2 = 0.0;
  } else if (loss == LossKind::E2) {
    effective.alpha1 = 0.0;
    effective.alpha2 = 1.0;
  }
  auto [a, b] = problem.normal_system(effective);
  RkhsDiagnostics local;
  const VectorXd c = solve_rkhs(a, b, options.lcurve_grid, options.pinv_tol,
                                problem.loss_constant(effective), &local);
  if (diag) *diag = local;

  KernelEstimate est;
  est.basis = problem.basis;
  est.coeffs = c;
  est.loss = loss;
  est.omega = problem.omega;
  est.alpha1 = effective.alpha1;
  est.alpha2 = effective.alpha2;
  est.lambda_reg = local.lambda_reg;
  est.loss_value = local.loss_value;
  return est;
}

KernelEstimate estimate_kernel(const PronySeries& h, const PronySeries& g,
                               const SplineBasis& basis, const WeightedSpace& space,
                               LossKind loss, const EstimateOptions& options,
                               RkhsDiagnostics* diag) {
  const RegressionProblem prob =
      RegressionProblem::assemble(basis, h, g, space.omega, options.assembly);
  return estimate_kernel(prob, space, loss, options, diag);
}

double sobolev_loss_direct(const SplineBasis& basis, const VectorXd& coeffs,
                           const PronySeries& h, const PronySeries& g,
                           const WeightedSpace& space, const AssemblyOptions& options) {
  space.validate();
  const double sigma_min = std::min(h.min_decay(), g.min_decay());
  const double tail_rate = 2.0 * space.omega + 2.0 * std::max(sigma_min, 0.0);
  const double log_tol = std::log(1.0 / options.tail_tol);
  const double t_int =
      std::min(basis.t_end + log_tol / std::max(tail_rate, 1e-3),
               std::max(1.0, 1.05 * log_tol / (2.0 * space.omega)));
  const double max_width =
      options.panel_width_scale *
      std::min(basis.knot_spacing(),
               1.0 / std::max(std::max(sigma_min, space.omega), 1e-2));
  const PanelRule rule = composite_gauss16(t_int, max_width, basis.breakpoints());

  std::vector<BasisConvolution> conv;
  for (const PiecewisePoly& psi : basis.elements) conv.emplace_back(psi, h);

  double acc = 0.0;
  for (std::size_t qi = 0; qi < rule.nodes.size(); ++qi) {
    const double t = rule.nodes[qi];
    double cv = 0.0, cd = 0.0;
    for (int i = 0; i < basis.size(); ++i) {
      const auto vd = conv[static_cast<std::size_t>(i)].eval(t);
      cv += coeffs(i) * vd.value;
      cd += coeffs(i) * vd.deriv;
    }
    const double rv = g.eval(t) - cv;
    const double rd = g.deriv(t) - cd;
    acc += rule.weights[qi] * std::exp(-2.0 * space.omega * t) *
           (space.alpha1 * rv * rv + space.alpha2 * rd * rd);
  }
  return acc;
}

}  // namespace glekit
