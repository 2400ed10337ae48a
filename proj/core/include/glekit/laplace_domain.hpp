// Closed-form Laplace-domain algebra on Prony series: rational quotients,
// partial fractions, the explicit inverse-transform kernel estimator, and
// the map from a Prony memory kernel to the autocorrelation it induces.
#pragma once

#include <optional>

#include "glekit/polynomials.hpp"
#include "glekit/prony_series.hpp"

namespace glekit {

struct RationalLaplace {
  Poly num;  // descending-degree complex coefficients
  Poly den;
  // Invariants: den non-empty with nonzero leading coefficient,
  // deg(num) <= deg(den).
  void validate() const;
  cdouble eval(cdouble z) const;
};

// Kernel estimate of the form  sum_k u_k e^{eta_k t} + C delta_0(t), the
// delta approximated by a centered Gaussian density of the given bandwidth
// when evaluated in the time domain.
struct DeltaKernel {
  PronySeries series;
  double delta_weight = 0.0;        // C
  double mollifier_bandwidth = 0.0; // > 0 required when C != 0

  double eval(double t) const;
  // Fourier transform at frequency omega; `mollified` folds in the Gaussian
  // factor, otherwise the delta contributes the constant C exactly.
  cdouble fourier(double omega, bool mollified = false) const;
};

// Forms L[g] / L[h] as a ratio of expanded polynomials over the common
// denominators; rates shared between g and h are cancelled before expansion.
// A numerator degree excess beyond `degree_tol` (relative to the largest
// numerator coefficient) signals a violated h'(0) = 0 constraint upstream
// and throws numeric_error.
RationalLaplace rational_quotient(const PronySeries& g, const PronySeries& h,
                                  double degree_tol = 1e-9);

struct PartialFractions {
  cdouble constant;               // nonzero only when deg(num) == deg(den)
  std::vector<cdouble> residues;
  std::vector<cdouble> poles;
};

// Residues by the derivative rule u_k = N~(eta_k) / D'(eta_k); requires
// simple poles (pairwise distance > 1e-8 after scaling).
PartialFractions partial_fractions(const RationalLaplace& r);

struct ThetaLOptions {
  double mollifier_bandwidth = 0.0;  // 0: caller supplies later / pure-series case
  // Residues below this fraction of the largest are reported but kept;
  // exposed for diagnostics only.
  double degree_tol = 1e-9;
};

// Explicit inverse-Laplace kernel estimator.
//   no phi: theta_L = L^{-1}[ L[-h'] / L[h] ]      (force-free case)
//   phi:    theta_L = L^{-1}[ (L[-h'] + L[phi]) / L[h] ], the constant term
//           C = sum w'_k / sum w_k becomes a mollified delta at 0.
DeltaKernel theta_L(const PronySeries& h, const std::optional<PronySeries>& phi = std::nullopt,
                    const ThetaLOptions& options = {});

// Remark-style kernel -> autocorrelation map: given a Prony memory kernel
// and h(0), returns the Prony series of h with one more mode than the
// kernel. Throws numeric_error if the induced h would not decay.
PronySeries kernel_to_acf(const PronySeries& gamma, double h0);

}  // namespace glekit
