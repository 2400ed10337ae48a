#include "glekit/regularization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace glekit {

std::size_t lcurve_corner(std::span<const LCurvePoint> points, double data_scale_sq) {
  if (points.empty()) throw validation_error("empty L-curve grid");
  const double floor = 1e-28 * std::max(data_scale_sq, 1e-300);

  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i].residual_sq > floor && points[i].penalty_sq > 0.0) valid.push_back(i);
  if (valid.size() < 3) return 0;

  // Both coordinates saturate for very small lambda; collapse near-duplicate
  // points first or their spurious curvature drowns the actual knee.
  std::vector<std::size_t> nodes;
  double last_x = 0.0, last_y = 0.0;
  for (std::size_t idx : valid) {
    const double x = std::log(points[idx].residual_sq);
    const double y = std::log(points[idx].penalty_sq);
    if (!nodes.empty() && std::hypot(x - last_x, y - last_y) < 0.05) continue;
    nodes.push_back(idx);
    last_x = x;
    last_y = y;
  }
  if (nodes.size() < 3) return valid.front();

  // Menger curvature of consecutive triples on log-log axes, signed so the
  // convex corner (residual flat -> rising, penalty falling) is positive.
  double best = 0.0;
  std::size_t best_idx = nodes.front();
  for (std::size_t j = 1; j + 1 < nodes.size(); ++j) {
    const auto& a = points[nodes[j - 1]];
    const auto& b = points[nodes[j]];
    const auto& c = points[nodes[j + 1]];
    const double ax = std::log(a.residual_sq), ay = std::log(a.penalty_sq);
    const double bx = std::log(b.residual_sq), by = std::log(b.penalty_sq);
    const double cx = std::log(c.residual_sq), cy = std::log(c.penalty_sq);
    const double cross = (bx - ax) * (cy - by) - (by - ay) * (cx - bx);
    const double la = std::hypot(bx - ax, by - ay);
    const double lb = std::hypot(cx - bx, cy - by);
    const double lc = std::hypot(cx - ax, cy - ay);
    if (la == 0.0 || lb == 0.0 || lc == 0.0) continue;
    const double kappa = 2.0 * cross / (la * lb * lc);
    if (kappa > best) {
      best = kappa;
      best_idx = nodes[j];
    }
  }
  return best_idx;
}

std::vector<double> default_lcurve_grid(double scale) {
  if (!(scale > 0.0)) scale = 1.0;
  std::vector<double> grid(30);
  for (int i = 0; i < 30; ++i)
    grid[static_cast<std::size_t>(i)] = scale * std::pow(10.0, -12.0 + 12.0 * i / 29.0);
  return grid;
}

}  // namespace glekit
