// Dense complex polynomials in descending-degree coefficient order.
#pragma once

#include <span>
#include <vector>

#include "glekit/common.hpp"

namespace glekit {

// coeffs[0] z^n + coeffs[1] z^(n-1) + ... + coeffs[n]
using Poly = std::vector<cdouble>;

// Conditioning becomes hopeless well before this; constructions that would
// exceed it throw numeric_error.
inline constexpr int kMaxPolyDegree = 25;

cdouble poly_eval(std::span<const cdouble> coeffs, cdouble z);
Poly poly_derivative(std::span<const cdouble> coeffs);
Poly poly_mul(std::span<const cdouble> a, std::span<const cdouble> b);
Poly poly_add(std::span<const cdouble> a, std::span<const cdouble> b);
Poly poly_scale(std::span<const cdouble> a, cdouble s);

// Expands prod_k (z - roots[k]). Coefficient growth is controlled by
// expanding in z/s with s = max(1, max |root|) and rescaling.
Poly poly_from_roots(std::span<const cdouble> roots);

// Drops leading coefficients with |c| <= tol * max|c|.
Poly poly_trim_leading(std::span<const cdouble> coeffs, double tol);

// Roots via the companion-matrix eigenvalue problem.
std::vector<cdouble> poly_roots(std::span<const cdouble> coeffs);

// Monic real polynomial z^p + a[0] z^(p-1) + ... + a[p-1].
std::vector<cdouble> companion_roots(std::span<const double> a);

}  // namespace glekit
