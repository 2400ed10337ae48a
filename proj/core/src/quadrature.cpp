#include "glekit/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

namespace glekit {

namespace {

// 16-point Gauss-Legendre rule on [-1, 1].
constexpr double kGL16Nodes[16] = {
    -0.9894009349916499326, -0.94457502307323257608, -0.86563120238783174388,
    -0.7554044083550030339, -0.61787624440264374845, -0.45801677765722738634,
    -0.28160355077925891323, -0.095012509837637440185, 0.095012509837637440185,
    0.28160355077925891323, 0.45801677765722738634, 0.61787624440264374845,
    0.7554044083550030339, 0.86563120238783174388, 0.94457502307323257608,
    0.9894009349916499326};
constexpr double kGL16Weights[16] = {
    0.027152459411754094852, 0.062253523938647892863, 0.09515851168249278481,
    0.12462897125553387205, 0.14959598881657673208, 0.16915651939500253819,
    0.18260341504492358887, 0.18945061045506849629, 0.18945061045506849629,
    0.18260341504492358887, 0.16915651939500253819, 0.14959598881657673208,
    0.12462897125553387205, 0.09515851168249278481, 0.062253523938647892863,
    0.027152459411754094852};

}  // namespace

PanelRule composite_gauss16(double t_end, double max_width, std::span<const double> breakpoints) {
  if (!(t_end > 0.0)) throw validation_error("quadrature interval must have positive length");
  if (!(max_width > 0.0)) throw validation_error("quadrature panel width must be positive");
  std::vector<double> edges{0.0, t_end};
  for (double b : breakpoints)
    if (b > 0.0 && b < t_end) edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              edges.end());

  PanelRule rule;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i], b = edges[i + 1];
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / max_width)));
    const double h = (b - a) / pieces;
    for (int p = 0; p < pieces; ++p) {
      const double lo = a + p * h;
      const double mid = lo + 0.5 * h, half = 0.5 * h;
      for (int q = 0; q < 16; ++q) {
        rule.nodes.push_back(mid + half * kGL16Nodes[q]);
        rule.weights.push_back(half * kGL16Weights[q]);
      }
    }
  }
  return rule;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, int max_depth) {
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, max_depth, rel_tol);
}

double golden_section_min(const std::function<double(double)>& f, double a, double b,
                          double rel_tol) {
  constexpr double invphi = 0.6180339887498949;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && (b - a) > rel_tol * (std::abs(a) + std::abs(b) + 1e-12); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

}  // namespace glekit
