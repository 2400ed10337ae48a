// L-curve selection of the regularization strength.
#pragma once

#include <span>
#include <vector>

#include "glekit/common.hpp"

namespace glekit {

struct LCurvePoint {
  double lambda_reg;
  double residual_sq;
  double penalty_sq;
};

// Index of the maximum-curvature point of the (log residual^2, log penalty^2)
// curve, computed with three-point finite differences over the grid.
//
// Points whose residual is at the numerical noise floor relative to
// data_scale_sq are excluded (their logs are meaningless); if fewer than
// three points survive, the smallest lambda wins. The rule is deterministic
// over the full grid, so parallel sweep evaluation cannot change the choice.
std::size_t lcurve_corner(std::span<const LCurvePoint> points, double data_scale_sq);

// 30 logarithmically spaced values spanning [1e-12, 1] * scale.
std::vector<double> default_lcurve_grid(double scale);

}  // namespace glekit
