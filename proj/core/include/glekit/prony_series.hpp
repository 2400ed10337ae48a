// Finite sums of complex exponentials  f(t) = sum_k w_k exp(lambda_k t).
//
// This is the working representation for fitted correlation functions, their
// derivatives, synthetic memory kernels and the inverse-Laplace estimator.
// Real-valued series keep non-real modes in conjugate pairs.
#pragma once

#include <span>
#include <vector>

#include "glekit/common.hpp"

namespace glekit {

class PronySeries {
 public:
  PronySeries() = default;
  PronySeries(std::vector<cdouble> weights, std::vector<cdouble> rates);

  // Single real mode w * exp(rate * t).
  static PronySeries single(double weight, double rate);

  std::size_t size() const { return weights_.size(); }
  bool empty() const { return weights_.empty(); }
  std::span<const cdouble> weights() const { return weights_; }
  std::span<const cdouble> rates() const { return rates_; }

  cdouble eval_complex(double t) const;
  double eval(double t) const { return eval_complex(t).real(); }
  double deriv(double t) const;

  // Termwise derivative: weights w_k * lambda_k over the same rates.
  PronySeries derivative() const;
  PronySeries scaled(cdouble factor) const;
  // Mode concatenation (f + g as one series).
  PronySeries concat(const PronySeries& other) const;

  cdouble weight_sum() const;           // f(0)
  cdouble weighted_rate_sum() const;    // f'(0) = sum w_k lambda_k
  cdouble integral_to_infinity() const; // sum w_k / (-lambda_k) = Laplace at 0

  // min_k(-Re lambda_k); the slowest decay rate sigma_eff.
  double min_decay() const;
  double max_abs_rate() const;

  // max |Im f(t)| <= tol * max |f(t)| over a grid covering the decay range.
  bool is_real_valued(double tol = 1e-10) const;

  // Throws validation_error unless every Re(lambda_k) < 0.
  void require_decaying() const;

 private:
  std::vector<cdouble> weights_;
  std::vector<cdouble> rates_;
};

// Closed-form convolution (f*g)(t) = int_0^t f(t-s) g(s) ds, valid when no
// rate of f coincides with a rate of g (throws numeric_error otherwise).
PronySeries convolve(const PronySeries& f, const PronySeries& g,
                     double coincidence_tol = 1e-9);

// Laplace transform  sum_k w_k / (z - lambda_k).
// Throws numeric_error if z falls on a pole (distance <= 1e-14 * scale).
cdouble laplace_eval(const PronySeries& f, cdouble z);

}  // namespace glekit
