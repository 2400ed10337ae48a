#include "glekit/polynomials.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace glekit {

cdouble poly_eval(std::span<const cdouble> coeffs, cdouble z) {
  cdouble acc = 0.0;
  for (const cdouble& c : coeffs) acc = acc * z + c;
  return acc;
}

Poly poly_derivative(std::span<const cdouble> coeffs) {
  const int n = static_cast<int>(coeffs.size()) - 1;  // degree
  if (n <= 0) return {cdouble(0.0)};
  Poly out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = coeffs[i] * static_cast<double>(n - i);
  return out;
}

Poly poly_mul(std::span<const cdouble> a, std::span<const cdouble> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t deg = a.size() + b.size() - 2;
  if (deg > kMaxPolyDegree)
    throw numeric_error("polynomial product degree " + std::to_string(deg) +
                        " exceeds the supported maximum of " + std::to_string(kMaxPolyDegree));
  Poly out(a.size() + b.size() - 1, cdouble(0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Poly poly_add(std::span<const cdouble> a, std::span<const cdouble> b) {
  const std::size_t n = std::max(a.size(), b.size());
  Poly out(n, cdouble(0.0));
  for (std::size_t i = 0; i < a.size(); ++i) out[n - a.size() + i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[n - b.size() + i] += b[i];
  return out;
}

Poly poly_scale(std::span<const cdouble> a, cdouble s) {
  Poly out(a.begin(), a.end());
  for (cdouble& c : out) c *= s;
  return out;
}

Poly poly_from_roots(std::span<const cdouble> roots) {
  if (roots.size() > kMaxPolyDegree)
    throw numeric_error("polynomial degree " + std::to_string(roots.size()) +
                        " exceeds the supported maximum of " + std::to_string(kMaxPolyDegree));
  double scale = 1.0;
  for (const cdouble& r : roots) scale = std::max(scale, std::abs(r));
  // Expand prod (u - r/s) in u = z/s, then restore z powers.
  Poly scaled{cdouble(1.0)};
  for (const cdouble& r : roots) {
    Poly next(scaled.size() + 1, cdouble(0.0));
    const cdouble rs = r / scale;
    for (std::size_t i = 0; i < scaled.size(); ++i) {
      next[i] += scaled[i];
      next[i + 1] -= scaled[i] * rs;
    }
    scaled = std::move(next);
  }
  // prod (z - r) = s^deg prod (z/s - r/s): the z^(deg-i) coefficient picks up s^i.
  double p = 1.0;
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    scaled[i] *= p;
    p *= scale;
  }
  return scaled;
}

Poly poly_trim_leading(std::span<const cdouble> coeffs, double tol) {
  double maxc = 0.0;
  for (const cdouble& c : coeffs) maxc = std::max(maxc, std::abs(c));
  std::size_t first = 0;
  while (first + 1 < coeffs.size() && std::abs(coeffs[first]) <= tol * maxc) ++first;
  return Poly(coeffs.begin() + static_cast<std::ptrdiff_t>(first), coeffs.end());
}

std::vector<cdouble> poly_roots(std::span<const cdouble> coeffs) {
  Poly p = poly_trim_leading(coeffs, 0.0);
  const int n = static_cast<int>(p.size()) - 1;
  if (n <= 0) return {};
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) companion(0, i) = -p[static_cast<std::size_t>(i) + 1] / p[0];
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw numeric_error("companion-matrix eigenvalue iteration failed to converge");
  std::vector<cdouble> roots(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) roots[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
  return roots;
}

std::vector<cdouble> companion_roots(std::span<const double> a) {
  const int n = static_cast<int>(a.size());
  if (n == 0) return {};
  for (double c : a)
    if (!std::isfinite(c)) throw numeric_error("non-finite polynomial coefficient");
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) companion(0, i) = -a[static_cast<std::size_t>(i)];
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw numeric_error("companion-matrix eigenvalue iteration failed to converge");
  std::vector<cdouble> roots(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) roots[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
  return roots;
}

}  // namespace glekit
