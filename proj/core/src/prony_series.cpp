#include "glekit/prony_series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace glekit {

PronySeries::PronySeries(std::vector<cdouble> weights, std::vector<cdouble> rates)
    : weights_(std::move(weights)), rates_(std::move(rates)) {
  if (weights_.size() != rates_.size())
    throw validation_error("Prony series needs one weight per rate");
  for (const cdouble& w : weights_)
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
      throw validation_error("non-finite Prony weight");
  for (const cdouble& r : rates_)
    if (!std::isfinite(r.real()) || !std::isfinite(r.imag()))
      throw validation_error("non-finite Prony rate");
}

PronySeries PronySeries::single(double weight, double rate) {
  return PronySeries({cdouble(weight)}, {cdouble(rate)});
}

cdouble PronySeries::eval_complex(double t) const {
  cdouble acc = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k)
    acc += weights_[k] * std::exp(rates_[k] * t);
  return acc;
}

double PronySeries::deriv(double t) const {
  cdouble acc = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k)
    acc += weights_[k] * rates_[k] * std::exp(rates_[k] * t);
  return acc.real();
}

PronySeries PronySeries::derivative() const {
  std::vector<cdouble> w(weights_.size());
  for (std::size_t k = 0; k < weights_.size(); ++k) w[k] = weights_[k] * rates_[k];
  return PronySeries(std::move(w), rates_);
}

PronySeries PronySeries::scaled(cdouble factor) const {
  std::vector<cdouble> w(weights_.size());
  for (std::size_t k = 0; k < weights_.size(); ++k) w[k] = weights_[k] * factor;
  return PronySeries(std::move(w), rates_);
}

PronySeries PronySeries::concat(const PronySeries& other) const {
  std::vector<cdouble> w(weights_);
  std::vector<cdouble> r(rates_);
  w.insert(w.end(), other.weights_.begin(), other.weights_.end());
  r.insert(r.end(), other.rates_.begin(), other.rates_.end());
  return PronySeries(std::move(w), std::move(r));
}

cdouble PronySeries::weight_sum() const {
  cdouble acc = 0.0;
  for (const cdouble& w : weights_) acc += w;
  return acc;
}

cdouble PronySeries::weighted_rate_sum() const {
  cdouble acc = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) acc += weights_[k] * rates_[k];
  return acc;
}

cdouble PronySeries::integral_to_infinity() const {
  cdouble acc = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) acc += weights_[k] / (-rates_[k]);
  return acc;
}

double PronySeries::min_decay() const {
  double sigma = std::numeric_limits<double>::infinity();
  for (const cdouble& r : rates_) sigma = std::min(sigma, -r.real());
  return sigma;
}

double PronySeries::max_abs_rate() const {
  double m = 0.0;
  for (const cdouble& r : rates_) m = std::max(m, std::abs(r));
  return m;
}

bool PronySeries::is_real_valued(double tol) const {
  if (empty()) return true;
  const double horizon = 5.0 / std::max(min_decay(), 1e-3);
  double max_abs = 0.0, max_imag = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const cdouble v = eval_complex(horizon * i / 200.0);
    max_abs = std::max(max_abs, std::abs(v));
    max_imag = std::max(max_imag, std::abs(v.imag()));
  }
  return max_imag <= tol * std::max(max_abs, 1e-300);
}

void PronySeries::require_decaying() const {
  for (const cdouble& r : rates_)
    if (!(r.real() < 0.0))
      throw validation_error("Prony rate with non-negative real part: " +
                             std::to_string(r.real()));
}

PronySeries convolve(const PronySeries& f, const PronySeries& g, double coincidence_tol) {
  // int_0^t e^{a(t-s)} e^{b s} ds = (e^{bt} - e^{at}) / (b - a)
  const double scale = std::max({f.max_abs_rate(), g.max_abs_rate(), 1.0});
  std::vector<cdouble> w;
  std::vector<cdouble> r;
  w.reserve(f.size() + g.size());
  r.reserve(f.size() + g.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    cdouble acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const cdouble d = g.rates()[j] - f.rates()[i];
      if (std::abs(d) <= coincidence_tol * scale)
        throw numeric_error("coincident rates in Prony convolution");
      acc += g.weights()[j] / d;
    }
    w.push_back(-f.weights()[i] * acc);
    r.push_back(f.rates()[i]);
  }
  for (std::size_t j = 0; j < g.size(); ++j) {
    cdouble acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
      acc += f.weights()[i] / (g.rates()[j] - f.rates()[i]);
    w.push_back(g.weights()[j] * acc);
    r.push_back(g.rates()[j]);
  }
  return PronySeries(std::move(w), std::move(r));
}

cdouble laplace_eval(const PronySeries& f, cdouble z) {
  const double scale = std::max(1.0, std::max(std::abs(z), f.max_abs_rate()));
  cdouble acc = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const cdouble d = z - f.rates()[k];
    if (std::abs(d) <= 1e-14 * scale)
      throw numeric_error("Laplace transform evaluated at a pole");
    acc += f.weights()[k] / d;
  }
  return acc;
}

}  // namespace glekit
