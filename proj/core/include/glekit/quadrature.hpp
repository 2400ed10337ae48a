// Quadrature building blocks shared by the regression assembly and the
// norm/diagnostic computations.
#pragma once

#include <functional>
#include <vector>

#include "glekit/common.hpp"

namespace glekit {

// Nodes and weights of a composite 16-point Gauss-Legendre rule.
struct PanelRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Panels cover [0, t_end]; every breakpoint becomes a panel boundary and no
// panel is wider than max_width.
PanelRule composite_gauss16(double t_end, double max_width,
                            std::span<const double> breakpoints = {});

// Adaptive Gauss-Kronrod on a finite interval.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-12, int max_depth = 18);

// Golden-section minimization of a unimodal-ish scalar function on [a, b]
// to relative tolerance rel_tol on the argument.
double golden_section_min(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-6);

}  // namespace glekit
