#include "glekit/laplace_domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace glekit {

namespace {

// Numerator of L[f] over the factored denominator prod_k (z - rate_k):
//   sum_k w_k prod_{j != k} (z - rate_j)
Poly transform_numerator(const PronySeries& f) {
  Poly acc{cdouble(0.0)};
  for (std::size_t k = 0; k < f.size(); ++k) {
    std::vector<cdouble> others;
    others.reserve(f.size() - 1);
    for (std::size_t j = 0; j < f.size(); ++j)
      if (j != k) others.push_back(f.rates()[j]);
    acc = poly_add(acc, poly_scale(poly_from_roots(others), f.weights()[k]));
  }
  return acc;
}

}  // namespace

void RationalLaplace::validate() const {
  if (den.empty() || std::abs(den.front()) == 0.0)
    throw validation_error("rational transform needs a nonzero denominator leading coefficient");
  if (num.size() > den.size())
    throw validation_error("rational transform must be proper (deg num <= deg den)");
}

cdouble RationalLaplace::eval(cdouble z) const {
  return poly_eval(num, z) / poly_eval(den, z);
}

double DeltaKernel::eval(double t) const {
  double v = series.eval(t);
  if (delta_weight != 0.0) {
    if (!(mollifier_bandwidth > 0.0))
      throw validation_error("delta term requires a positive mollifier bandwidth");
    const double s = mollifier_bandwidth;
    v += delta_weight * std::exp(-0.5 * t * t / (s * s)) / (s * std::sqrt(2.0 * std::numbers::pi));
  }
  return v;
}

cdouble DeltaKernel::fourier(double omega, bool mollified) const {
  cdouble acc = 0.0;
  for (std::size_t k = 0; k < series.size(); ++k)
    acc += series.weights()[k] / (cdouble(0.0, omega) - series.rates()[k]);
  if (delta_weight != 0.0) {
    double factor = 1.0;
    if (mollified) {
      const double s = mollifier_bandwidth;
      factor = std::exp(-0.5 * omega * omega * s * s);
    }
    acc += delta_weight * factor;
  }
  return acc;
}

RationalLaplace rational_quotient(const PronySeries& g, const PronySeries& h,
                                  double degree_tol) {
  if (h.empty()) throw validation_error("quotient denominator series is empty");
  if (g.empty()) throw validation_error("quotient numerator series is empty");

  // L[g]/L[h] = (Ng / Dg) / (Nh / Dh) = (Ng * Dh) / (Dg * Nh); shared rates
  // cancel between Dg and Dh before expansion to keep the degree low.
  std::vector<cdouble> g_rates(g.rates().begin(), g.rates().end());
  std::vector<cdouble> h_rates(h.rates().begin(), h.rates().end());
  const double scale =
      std::max({g.max_abs_rate(), h.max_abs_rate(), 1.0});
  std::vector<cdouble> g_only;
  std::vector<bool> h_used(h_rates.size(), false);
  for (const cdouble& gr : g_rates) {
    bool matched = false;
    for (std::size_t j = 0; j < h_rates.size(); ++j) {
      if (!h_used[j] && std::abs(gr - h_rates[j]) <= 1e-9 * scale) {
        h_used[j] = true;
        matched = true;
        break;
      }
    }
    if (!matched) g_only.push_back(gr);
  }
  std::vector<cdouble> h_only;
  for (std::size_t j = 0; j < h_rates.size(); ++j)
    if (!h_used[j]) h_only.push_back(h_rates[j]);

  const Poly num = poly_mul(transform_numerator(g), poly_from_roots(h_only));
  const Poly den = poly_mul(transform_numerator(h), poly_from_roots(g_only));

  RationalLaplace r;
  r.num = poly_trim_leading(num, degree_tol);
  r.den = poly_trim_leading(den, degree_tol);
  if (r.num.size() > r.den.size())
    throw numeric_error(
        "improper Laplace quotient: numerator degree exceeds denominator; "
        "the h'(0) = 0 constraint was not satisfied by the Prony fit");
  r.validate();
  return r;
}

PartialFractions partial_fractions(const RationalLaplace& r) {
  r.validate();
  PartialFractions out;
  out.constant = (r.num.size() == r.den.size()) ? r.num.front() / r.den.front() : cdouble(0.0);

  out.poles = poly_roots(r.den);
  double scale = 1.0;
  for (const cdouble& p : out.poles) scale = std::max(scale, std::abs(p));
  for (std::size_t i = 0; i < out.poles.size(); ++i)
    for (std::size_t j = i + 1; j < out.poles.size(); ++j)
      if (std::abs(out.poles[i] - out.poles[j]) <= 1e-8 * scale)
        throw numeric_error(
            "clustered denominator roots: partial fractions are ill-conditioned "
            "(consider refitting with a different model order)");

  const Poly residue_num =
      out.constant == cdouble(0.0)
          ? r.num
          : poly_add(r.num, poly_scale(r.den, -out.constant));
  const Poly dden = poly_derivative(r.den);
  out.residues.reserve(out.poles.size());
  for (const cdouble& p : out.poles)
    out.residues.push_back(poly_eval(residue_num, p) / poly_eval(dden, p));
  return out;
}

DeltaKernel theta_L(const PronySeries& h, const std::optional<PronySeries>& phi,
                    const ThetaLOptions& options) {
  const PronySeries minus_dh = h.derivative().scaled(-1.0);
  const PronySeries g = phi ? minus_dh.concat(*phi) : minus_dh;
  const RationalLaplace quotient = rational_quotient(g, h, options.degree_tol);

  DeltaKernel out;
  out.mollifier_bandwidth = options.mollifier_bandwidth;
  if (quotient.den.size() == 1) {
    // Degenerate constant quotient: gamma is a pure delta of weight C.
    out.delta_weight = (quotient.num.front() / quotient.den.front()).real();
    return out;
  }
  if (!phi && quotient.num.size() == quotient.den.size())
    throw numeric_error(
        "force-free quotient kept its full numerator degree: the h'(0) = 0 "
        "constraint was violated by the Prony fit");
  const PartialFractions pf = partial_fractions(quotient);
  out.delta_weight = pf.constant.real();
  out.series = PronySeries(pf.residues, pf.poles);
  return out;
}

PronySeries kernel_to_acf(const PronySeries& gamma, double h0) {
  if (!(h0 > 0.0)) throw validation_error("kernel_to_acf requires h(0) > 0");
  gamma.require_decaying();

  // h^(z) = h0 prod(z - eta_k) / [ z prod(z - eta_k) + sum_k u_k prod_{j!=k}(z - eta_j) ]
  std::vector<cdouble> poles_gamma(gamma.rates().begin(), gamma.rates().end());
  const Poly prod_all = poly_from_roots(poles_gamma);
  Poly den = poly_mul(prod_all, Poly{cdouble(1.0), cdouble(0.0)});  // z * prod
  den = poly_add(den, transform_numerator(gamma));

  RationalLaplace r;
  r.num = poly_scale(prod_all, cdouble(h0));
  r.den = den;
  const PartialFractions pf = partial_fractions(r);
  for (const cdouble& p : pf.poles)
    if (!(p.real() < 0.0))
      throw numeric_error(
          "memory kernel does not admit a decaying stationary autocorrelation "
          "(pole with nonnegative real part)");
  return PronySeries(pf.residues, pf.poles);
}

}  // namespace glekit
