#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "glekit/laplace_domain.hpp"
#include "glekit/prony.hpp"
#include "glekit/rng.hpp"

using namespace glekit;

namespace {

CorrelationEstimate sample_series(const PronySeries& f, double dt, int n_lags) {
  CorrelationEstimate est;
  est.dt_obs = dt;
  for (int n = 1; n <= n_lags; ++n) {
    est.values_h.push_back(f.eval(n * dt));
    est.n_terms.push_back(1000);
  }
  return est;
}

}  // namespace

TEST_CASE("hankel coefficients: single and double geometric modes") {
  // h_n = r^n: recurrence h_{n+1} = r h_n, a = (-r)
  CorrelationEstimate est;
  est.dt_obs = 1.0;
  const double r = 0.6;
  for (int n = 1; n <= 4; ++n) {
    est.values_h.push_back(std::pow(r, n));
    est.n_terms.push_back(10);
  }
  const auto a1 = hankel_coefficients(est.values_h, 1, 1e-12);
  REQUIRE(a1.size() == 1);
  CHECK(a1(0) == doctest::Approx(-r).epsilon(1e-12));

  // h_n = r1^n + r2^n: a = (-(r1+r2), r1 r2)
  CorrelationEstimate est2;
  est2.dt_obs = 1.0;
  const double r1 = 0.7, r2 = 0.8;
  for (int n = 1; n <= 8; ++n) {
    est2.values_h.push_back(std::pow(r1, n) + std::pow(r2, n));
    est2.n_terms.push_back(10);
  }
  const auto a2 = hankel_coefficients(est2.values_h, 2, 1e-12);
  REQUIRE(a2.size() == 2);
  CHECK(a2(0) == doctest::Approx(-(r1 + r2)).epsilon(1e-9));
  CHECK(a2(1) == doctest::Approx(r1 * r2).epsilon(1e-9));
}

TEST_CASE("hankel rejects degenerate input") {
  std::vector<double> zeros(10, 0.0);
  CHECK_THROWS_AS(hankel_coefficients(zeros, 2, 1e-12), validation_error);
}

TEST_CASE("characteristic roots of factored quadratics") {
  Eigen::VectorXd a(2);
  a << -1.5, 0.56;
  auto roots = characteristic_roots(a);
  std::sort(roots.begin(), roots.end(),
            [](const cdouble& x, const cdouble& y) { return x.real() < y.real(); });
  CHECK(std::abs(roots[0] - cdouble(0.7)) < 1e-10);
  CHECK(std::abs(roots[1] - cdouble(0.8)) < 1e-10);

  Eigen::VectorXd b(2);
  b << 0.0, 0.25;
  auto ib = characteristic_roots(b);
  std::sort(ib.begin(), ib.end(),
            [](const cdouble& x, const cdouble& y) { return x.imag() < y.imag(); });
  CHECK(std::abs(ib[0] - cdouble(0.0, -0.5)) < 1e-10);
  CHECK(std::abs(ib[1] - cdouble(0.0, 0.5)) < 1e-10);
}

TEST_CASE("root regularization: clamp, principal log, branch split") {
  PronyConfig cfg;
  cfg.sigma = 0.01;

  SUBCASE("real positive root passes through") {
    const std::vector<cdouble> roots{cdouble(0.5)};
    const auto rates = regularize_roots(roots, 1.0, cfg);
    REQUIRE(rates.size() == 1);
    CHECK(rates[0].real() == doctest::Approx(std::log(0.5)));
    CHECK(rates[0].imag() == 0.0);
  }

  SUBCASE("negative real root splits into both branches") {
    const std::vector<cdouble> roots{cdouble(-0.5)};
    PronyDiagnostics diag;
    const auto rates = regularize_roots(roots, 1.0, cfg, &diag);
    REQUIRE(rates.size() == 2);
    CHECK(diag.augmented == 1);
    CHECK(rates[0].real() == doctest::Approx(std::log(0.5)));
    CHECK(std::abs(rates[0].imag()) == doctest::Approx(std::numbers::pi));
    CHECK(rates[1] == std::conj(rates[0]));
  }

  SUBCASE("clamp pulls the magnitude to the decay threshold") {
    PronyConfig c2;
    c2.sigma = 0.3;
    const std::vector<cdouble> roots{cdouble(1.2)};
    PronyDiagnostics diag;
    const auto rates = regularize_roots(roots, 0.7, c2, &diag);
    REQUIRE(rates.size() == 1);
    CHECK(diag.clamped == 1);
    CHECK(rates[0].real() == doctest::Approx(-0.3).epsilon(1e-12));
  }

  SUBCASE("literal threshold toggle uses e^{-sigma}") {
    PronyConfig c3;
    c3.sigma = 0.3;
    c3.clamp_literal_threshold = true;
    const std::vector<cdouble> roots{cdouble(0.8)};
    const auto rates = regularize_roots(roots, 0.7, c3);
    // |r| = 0.8 >= e^{-0.3} = 0.7408: clamped to e^{-0.3}, rate = -0.3/0.7
    CHECK(rates[0].real() == doctest::Approx(-0.3 / 0.7).epsilon(1e-12));
  }

  SUBCASE("vanishing roots are discarded, duplicates merged") {
    const std::vector<cdouble> roots{cdouble(0.0), cdouble(0.5), cdouble(0.5 + 1e-12)};
    PronyDiagnostics diag;
    const auto rates = regularize_roots(roots, 1.0, cfg, &diag);
    CHECK(rates.size() == 1);
    CHECK(diag.discarded == 1);
    CHECK(diag.merged == 1);
  }
}

TEST_CASE("weight fit: exact recovery with an already-consistent constraint") {
  // h(t) = 2 e^{-t} - e^{-2t}: sum w_k lambda_k = 0 holds at the target
  const PronySeries target({cdouble(2.0), cdouble(-1.0)}, {cdouble(-1.0), cdouble(-2.0)});
  const auto est = sample_series(target, 0.4, 12);
  const std::vector<cdouble> rates{cdouble(-1.0), cdouble(-2.0)};
  std::vector<int> lags;
  for (int n = 1; n <= 12; ++n) lags.push_back(n);
  PronyConfig cfg;
  PronyDiagnostics diag;
  const auto w = fit_weights(rates, est.values_h, lags, est.dt_obs, cfg, &diag);
  CHECK(diag.noise_floor_fit);
  CHECK(std::abs(w[0] - cdouble(2.0)) < 1e-8);
  CHECK(std::abs(w[1] - cdouble(-1.0)) < 1e-8);
}

TEST_CASE("weight fit: single mode with the constraint forces zero") {
  const PronySeries target = PronySeries::single(1.0, -1.0);
  const auto est = sample_series(target, 0.5, 8);
  const std::vector<cdouble> rates{cdouble(-1.0)};
  std::vector<int> lags;
  for (int n = 1; n <= 8; ++n) lags.push_back(n);
  PronyConfig cfg;
  const auto w = fit_weights(rates, est.values_h, lags, est.dt_obs, cfg);
  CHECK(std::abs(w[0]) == 0.0);
}

TEST_CASE("weight fit residual is monotone in the regularization strength") {
  Rng rng(31);
  const PronySeries target({cdouble(1.0), cdouble(0.8)}, {cdouble(-0.4), cdouble(-1.1)});
  CorrelationEstimate est = sample_series(target, 0.5, 20);
  for (auto& v : est.values_h) v += 0.02 * rng.gaussian();
  const std::vector<cdouble> rates{cdouble(-0.4), cdouble(-1.1), cdouble(-2.0)};
  std::vector<int> lags;
  for (int n = 1; n <= 20; ++n) lags.push_back(n);

  PronyConfig cfg;
  cfg.constrain_derivative_zero = false;
  double prev = -1.0;
  for (double lr : {1e-8, 1e-5, 1e-2, 1e1}) {
    cfg.lcurve_grid = {lr};
    PronyDiagnostics diag;
    fit_weights(rates, est.values_h, lags, est.dt_obs, cfg, &diag);
    CHECK(diag.residual >= prev);
    prev = diag.residual;
  }
}

TEST_CASE("prony_fit recovers noise-free exponential sums exactly") {
  // distinct real roots in (0.2, 0.95), constraint off
  Rng rng(101);
  int trials = 0;
  while (trials < 25) {
    const int p = 2 + static_cast<int>(rng.uniform01() * 3);  // 2..4
    std::vector<double> roots;
    bool ok = true;
    for (int k = 0; k < p; ++k) {
      double r;
      int guard = 0;
      do {
        r = rng.uniform(0.2, 0.95);
        ok = true;
        for (double other : roots)
          if (std::abs(other - r) < 0.04) ok = false;
      } while (!ok && ++guard < 100);
      if (!ok) break;
      roots.push_back(r);
    }
    if (!ok) continue;
    ++trials;
    std::vector<cdouble> w, lam;
    for (double r : roots) {
      w.emplace_back(rng.uniform(0.5, 2.0), 0.0);
      lam.emplace_back(std::log(r), 0.0);  // dt = 1
    }
    const PronySeries target(w, lam);
    const auto est = sample_series(target, 1.0, std::max(2 * p + 2, 10));

    PronyConfig cfg;
    cfg.p_prime = p;
    cfg.sigma = 0.01;
    cfg.constrain_derivative_zero = false;
    const PronySeries fit = prony_fit(est, cfg);
    REQUIRE(fit.size() == static_cast<std::size_t>(p));
    auto got_r = std::vector<cdouble>(fit.rates().begin(), fit.rates().end());
    auto got_w = std::vector<cdouble>(fit.weights().begin(), fit.weights().end());
    std::vector<std::size_t> order(got_r.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return got_r[a].real() < got_r[b].real(); });
    std::vector<std::size_t> want(order.size());
    for (std::size_t i = 0; i < want.size(); ++i) want[i] = i;
    std::sort(want.begin(), want.end(),
              [&](std::size_t a, std::size_t b) { return lam[a].real() < lam[b].real(); });
    for (std::size_t i = 0; i < order.size(); ++i) {
      CHECK(std::abs(got_r[order[i]] - lam[want[i]]) < 1e-6);
      CHECK(std::abs(got_w[order[i]] - w[want[i]]) < 1e-6);
    }
  }
}

TEST_CASE("prony_fit: realness, decay and constraint invariants on noisy data") {
  Rng rng(7);
  const PronySeries gamma({cdouble(0.3488), cdouble(0.3488), cdouble(0.3615), cdouble(0.5300),
                           cdouble(0.3045)},
                          {cdouble(-0.1631, -0.3211), cdouble(-0.1631, 0.3211), cdouble(-0.8262),
                           cdouble(-0.9178), cdouble(-0.3352)});
  const PronySeries h = kernel_to_acf(gamma, 1.0);
  CorrelationEstimate est = sample_series(h, 0.7, 24);
  for (auto& v : est.values_h) v += 0.005 * rng.gaussian();

  PronyConfig cfg;
  cfg.p_prime = 10;
  cfg.sigma = 0.05;
  PronyDiagnostics diag;
  const PronySeries fit = prony_fit(est, cfg, &diag);

  CHECK(fit.is_real_valued(1e-10));
  CHECK(fit.min_decay() >= 0.05 * 0.99);
  // constrained fit: |sum w lambda| <= 1e-9 sum |w lambda|
  double abs_sum = 0.0;
  for (std::size_t k = 0; k < fit.size(); ++k)
    abs_sum += std::abs(fit.weights()[k] * fit.rates()[k]);
  CHECK(std::abs(fit.weighted_rate_sum()) <= 1e-9 * abs_sum);

  // decay bound |h(t)| <= C e^{-sigma_eff t} checked by direct evaluation
  const double sigma_eff = fit.min_decay();
  double c_bound = 0.0;
  for (std::size_t k = 0; k < fit.size(); ++k) c_bound += std::abs(fit.weights()[k]);
  for (double t : {10.0, 20.0, 40.0})
    CHECK(std::abs(fit.eval(t)) <= c_bound * std::exp(-sigma_eff * t) * (1.0 + 1e-9));
}

TEST_CASE("prony_fit on the noise-free six-mode correlation is accurate at the samples") {
  const PronySeries gamma({cdouble(0.3488), cdouble(0.3488), cdouble(0.3615), cdouble(0.5300),
                           cdouble(0.3045)},
                          {cdouble(-0.1631, -0.3211), cdouble(-0.1631, 0.3211), cdouble(-0.8262),
                           cdouble(-0.9178), cdouble(-0.3352)});
  const PronySeries h = kernel_to_acf(gamma, 1.0);
  const auto est = sample_series(h, 0.7, 24);
  PronyConfig cfg;
  cfg.p_prime = 10;
  cfg.sigma = 0.05;
  const PronySeries fit = prony_fit(est, cfg);
  for (double t = 0.0; t <= 16.0; t += 0.35)
    CHECK(std::abs(fit.eval(t) - h.eval(t)) < 2e-4);
}

TEST_CASE("prony_fit_force_corr keeps the lag-0 sample and drops the constraint") {
  const PronySeries phi({cdouble(0.9), cdouble(0.4)}, {cdouble(-0.8), cdouble(-1.7)});
  CorrelationEstimate est;
  est.dt_obs = 0.5;
  std::vector<double> phi_vals;
  for (int n = 0; n <= 16; ++n) phi_vals.push_back(phi.eval(n * 0.5));
  for (int n = 1; n <= 16; ++n) {
    est.values_h.push_back(phi.eval(n * 0.5));  // placeholder h for validation
    est.n_terms.push_back(100);
  }
  est.values_phi = phi_vals;
  PronyConfig cfg;
  cfg.p_prime = 2;
  cfg.sigma = 0.01;
  const PronySeries fit = prony_fit_force_corr(est, cfg);
  CHECK(std::abs(fit.eval(0.0) - phi.eval(0.0)) < 1e-7);
  CHECK(std::abs(fit.weighted_rate_sum()) > 1e-3);  // no derivative constraint applied
}
