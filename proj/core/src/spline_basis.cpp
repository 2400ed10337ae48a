#include "glekit/spline_basis.hpp"

#include <algorithm>
#include <cmath>

namespace glekit {

PiecewisePoly::PiecewisePoly(std::vector<double> breakpoints,
                             std::vector<std::array<double, 4>> coeffs)
    : breakpoints_(std::move(breakpoints)), coeffs_(std::move(coeffs)) {
  if (breakpoints_.size() != coeffs_.size() + 1 || coeffs_.empty())
    throw validation_error("piecewise polynomial needs one coefficient set per span");
}

int PiecewisePoly::find_span(double t) const {
  if (t < breakpoints_.front() || t > breakpoints_.back()) return -1;
  if (t == breakpoints_.back()) return static_cast<int>(coeffs_.size()) - 1;
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  return static_cast<int>(it - breakpoints_.begin()) - 1;
}

double PiecewisePoly::eval(double t) const {
  const int s = find_span(t);
  if (s < 0) return 0.0;
  const auto& c = coeffs_[static_cast<std::size_t>(s)];
  const double u = t - breakpoints_[static_cast<std::size_t>(s)];
  return c[0] + u * (c[1] + u * (c[2] + u * c[3]));
}

double PiecewisePoly::deriv(double t) const {
  const int s = find_span(t);
  if (s < 0) return 0.0;
  const auto& c = coeffs_[static_cast<std::size_t>(s)];
  const double u = t - breakpoints_[static_cast<std::size_t>(s)];
  return c[1] + u * (2.0 * c[2] + u * 3.0 * c[3]);
}

std::vector<double> SplineBasis::breakpoints() const {
  std::vector<double> bp(static_cast<std::size_t>(knot_count));
  for (int i = 0; i < knot_count; ++i)
    bp[static_cast<std::size_t>(i)] = t_end * i / (knot_count - 1);
  return bp;
}

SplineBasis SplineBasis::clamped_cubic(double t_end, int knot_count) {
  if (!(t_end > 0.0)) throw validation_error("spline interval must have positive length");
  if (knot_count < 2) throw validation_error("spline basis needs at least 2 knots");

  SplineBasis basis;
  basis.t_end = t_end;
  basis.knot_count = knot_count;
  const std::vector<double> bp = basis.breakpoints();
  const int n_spans = knot_count - 1;

  // Knot vector with 4-fold end knots: tau_j = bp[clamp(j - 3)].
  const int n_knots = knot_count + 6;
  std::vector<double> tau(static_cast<std::size_t>(n_knots));
  for (int j = 0; j < n_knots; ++j)
    tau[static_cast<std::size_t>(j)] =
        bp[static_cast<std::size_t>(std::clamp(j - 3, 0, knot_count - 1))];

  // Per-span local cubic coefficients for every B-spline at each degree.
  using SpanPolys = std::vector<std::array<double, 4>>;
  auto zero_polys = [&] { return SpanPolys(static_cast<std::size_t>(n_spans), {0, 0, 0, 0}); };

  // Multiply by (a0 + u) / denom in local span coordinates.
  auto mul_linear = [](const std::array<double, 4>& p, double a0, double inv_denom) {
    std::array<double, 4> out{0, 0, 0, 0};
    for (int m = 0; m < 4; ++m) {
      out[static_cast<std::size_t>(m)] += a0 * p[static_cast<std::size_t>(m)] * inv_denom;
      if (m + 1 < 4)
        out[static_cast<std::size_t>(m + 1)] += p[static_cast<std::size_t>(m)] * inv_denom;
    }
    return out;
  };

  std::vector<SpanPolys> current;  // degree 0
  for (int i = 0; i + 1 < n_knots; ++i) {
    SpanPolys b = zero_polys();
    const int span = i - 3;
    if (span >= 0 && span < n_spans && tau[static_cast<std::size_t>(i + 1)] > tau[static_cast<std::size_t>(i)])
      b[static_cast<std::size_t>(span)][0] = 1.0;
    current.push_back(std::move(b));
  }

  for (int d = 1; d <= 3; ++d) {
    std::vector<SpanPolys> next;
    const int count = n_knots - d - 1;
    for (int i = 0; i < count; ++i) {
      SpanPolys b = zero_polys();
      const double den1 = tau[static_cast<std::size_t>(i + d)] - tau[static_cast<std::size_t>(i)];
      const double den2 =
          tau[static_cast<std::size_t>(i + d + 1)] - tau[static_cast<std::size_t>(i + 1)];
      for (int s = 0; s < n_spans; ++s) {
        std::array<double, 4> acc{0, 0, 0, 0};
        if (den1 > 0.0) {
          // (t - tau_i) = (bp_s - tau_i) + u
          const auto& p = current[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)];
          const auto term =
              mul_linear(p, bp[static_cast<std::size_t>(s)] - tau[static_cast<std::size_t>(i)],
                         1.0 / den1);
          for (int m = 0; m < 4; ++m) acc[static_cast<std::size_t>(m)] += term[static_cast<std::size_t>(m)];
        }
        if (den2 > 0.0) {
          // (tau_{i+d+1} - t) = (tau_{i+d+1} - bp_s) - u
          const auto& p = current[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(s)];
          auto term = mul_linear(
              p, -(tau[static_cast<std::size_t>(i + d + 1)] - bp[static_cast<std::size_t>(s)]),
              -1.0 / den2);
          for (int m = 0; m < 4; ++m) acc[static_cast<std::size_t>(m)] += term[static_cast<std::size_t>(m)];
        }
        b[static_cast<std::size_t>(s)] = acc;
      }
      next.push_back(std::move(b));
    }
    current = std::move(next);
  }

  // Trim each basis function to its nonzero span range.
  for (const SpanPolys& polys : current) {
    int first = -1, last = -1;
    for (int s = 0; s < n_spans; ++s) {
      const auto& c = polys[static_cast<std::size_t>(s)];
      const bool nonzero =
          std::abs(c[0]) + std::abs(c[1]) + std::abs(c[2]) + std::abs(c[3]) > 0.0;
      if (nonzero) {
        if (first < 0) first = s;
        last = s;
      }
    }
    if (first < 0) throw numeric_error("degenerate B-spline basis element");
    std::vector<double> local_bp(bp.begin() + first, bp.begin() + last + 2);
    std::vector<std::array<double, 4>> local_coeffs(polys.begin() + first,
                                                    polys.begin() + last + 1);
    basis.elements.emplace_back(std::move(local_bp), std::move(local_coeffs));
  }
  return basis;
}

}  // namespace glekit
