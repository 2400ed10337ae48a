// Clamped cubic B-spline basis on a uniform breakpoint grid over [0, T].
#pragma once

#include <array>
#include <vector>

#include "glekit/common.hpp"

namespace glekit {

// Piecewise polynomial of degree <= 3 with local coefficients per span
// (u = t - breakpoint[i]); identically zero outside [first, last] breakpoint.
class PiecewisePoly {
 public:
  PiecewisePoly(std::vector<double> breakpoints, std::vector<std::array<double, 4>> coeffs);

  double eval(double t) const;
  double deriv(double t) const;

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  std::size_t span_count() const { return coeffs_.size(); }
  const std::array<double, 4>& span_coeffs(std::size_t i) const { return coeffs_[i]; }
  double support_begin() const { return breakpoints_.front(); }
  double support_end() const { return breakpoints_.back(); }

 private:
  int find_span(double t) const;
  std::vector<double> breakpoints_;
  std::vector<std::array<double, 4>> coeffs_;
};

struct SplineBasis {
  double t_end = 0.0;
  int knot_count = 0;  // number of breakpoints including both ends
  std::vector<PiecewisePoly> elements;  // size K = knot_count + 2

  int size() const { return static_cast<int>(elements.size()); }
  double knot_spacing() const { return t_end / (knot_count - 1); }
  std::vector<double> breakpoints() const;

  // Cubic B-splines with 4-fold end knots on `knot_count` uniform
  // breakpoints covering [0, t_end]; basis size knot_count + 2.
  static SplineBasis clamped_cubic(double t_end, int knot_count);
};

}  // namespace glekit
