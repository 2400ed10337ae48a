#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "glekit/laplace_domain.hpp"
#include "glekit/rng.hpp"
#include "support/mode_matching.hpp"

using namespace glekit;

namespace {

std::vector<cdouble> sorted_by_real(std::vector<cdouble> v) {
  std::sort(v.begin(), v.end(), [](const cdouble& a, const cdouble& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return v;
}

PronySeries random_stable_series(Rng& rng, int pairs, int reals) {
  std::vector<cdouble> w, r;
  for (int k = 0; k < pairs; ++k) {
    const cdouble wk(rng.uniform(0.2, 1.0), rng.uniform(-0.5, 0.5));
    const cdouble rk(rng.uniform(-2.0, -0.2), rng.uniform(0.2, 2.0));
    w.push_back(wk);
    w.push_back(std::conj(wk));
    r.push_back(rk);
    r.push_back(std::conj(rk));
  }
  for (int k = 0; k < reals; ++k) {
    w.emplace_back(rng.uniform(0.2, 1.0), 0.0);
    r.emplace_back(rng.uniform(-2.5, -0.15), 0.0);
  }
  return PronySeries(w, r);
}

}  // namespace

TEST_CASE("textbook partial fractions") {
  // (z + 3) / ((z + 1)(z + 2)) = 2/(z+1) - 1/(z+2)
  RationalLaplace r;
  r.num = {cdouble(1.0), cdouble(3.0)};
  r.den = {cdouble(1.0), cdouble(3.0), cdouble(2.0)};
  const PartialFractions pf = partial_fractions(r);
  CHECK(std::abs(pf.constant) < 1e-14);
  REQUIRE(pf.poles.size() == 2);
  const auto poles = sorted_by_real(pf.poles);
  CHECK(std::abs(poles[0] - cdouble(-2.0)) < 1e-12);
  CHECK(std::abs(poles[1] - cdouble(-1.0)) < 1e-12);
  for (std::size_t i = 0; i < pf.poles.size(); ++i) {
    if (std::abs(pf.poles[i] + 1.0) < 1e-6) CHECK(pf.residues[i].real() == doctest::Approx(2.0));
    if (std::abs(pf.poles[i] + 2.0) < 1e-6) CHECK(pf.residues[i].real() == doctest::Approx(-1.0));
  }
}

TEST_CASE("partial fractions with a constant term") {
  // z^2 / ((z+1)(z+2)): C = 1, remainder -3z - 2 over the product,
  // residues 1 at -1 and -4 at -2.
  RationalLaplace r;
  r.num = {cdouble(1.0), cdouble(0.0), cdouble(0.0)};
  r.den = {cdouble(1.0), cdouble(3.0), cdouble(2.0)};
  const PartialFractions pf = partial_fractions(r);
  CHECK(pf.constant.real() == doctest::Approx(1.0));
  for (std::size_t i = 0; i < pf.poles.size(); ++i) {
    if (std::abs(pf.poles[i] + 1.0) < 1e-6) CHECK(pf.residues[i].real() == doctest::Approx(1.0));
    if (std::abs(pf.poles[i] + 2.0) < 1e-6) CHECK(pf.residues[i].real() == doctest::Approx(-4.0));
  }

  // a numerator sharing a root with the denominator cancels cleanly:
  // (z^2 + z) / ((z+1)(z+2)) = z/(z+2), residue 0 at -1 and -2 at -2.
  RationalLaplace shared;
  shared.num = {cdouble(1.0), cdouble(1.0), cdouble(0.0)};
  shared.den = r.den;
  const PartialFractions pf2 = partial_fractions(shared);
  CHECK(pf2.constant.real() == doctest::Approx(1.0));
  for (std::size_t i = 0; i < pf2.poles.size(); ++i) {
    if (std::abs(pf2.poles[i] + 1.0) < 1e-6) CHECK(std::abs(pf2.residues[i]) < 1e-12);
    if (std::abs(pf2.poles[i] + 2.0) < 1e-6) CHECK(pf2.residues[i].real() == doctest::Approx(-2.0));
  }
}

TEST_CASE("partial fractions reconstruct random stable rationals") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<cdouble> poles;
    for (int k = 0; k < 4; ++k)
      poles.emplace_back(rng.uniform(-3.0, -0.2), rng.uniform(-1.5, 1.5));
    RationalLaplace r;
    r.den = poly_from_roots(poles);
    r.num = {cdouble(rng.uniform(0.5, 2.0)), cdouble(rng.uniform(-1.0, 1.0)),
             cdouble(rng.uniform(-1.0, 1.0))};
    const PartialFractions pf = partial_fractions(r);
    for (int probe = 0; probe < 50; ++probe) {
      const cdouble z(rng.uniform(0.0, 2.0), rng.uniform(-2.0, 2.0));
      cdouble recon = pf.constant;
      for (std::size_t i = 0; i < pf.poles.size(); ++i) recon += pf.residues[i] / (z - pf.poles[i]);
      CHECK(std::abs(recon - r.eval(z)) < 1e-10 * (1.0 + std::abs(r.eval(z))));
    }
  }
}

TEST_CASE("clustered poles are rejected") {
  RationalLaplace r;
  r.den = poly_from_roots(std::vector<cdouble>{cdouble(-1.0), cdouble(-1.0 + 1e-10)});
  r.num = {cdouble(1.0)};
  CHECK_THROWS_AS(partial_fractions(r), numeric_error);
}

TEST_CASE("quotient of transforms for a single-mode h is the constant-kernel case") {
  const PronySeries h({cdouble(1.0)}, {cdouble(-1.0)});
  const DeltaKernel tl = theta_L(h);
  CHECK(tl.series.empty());
  CHECK(tl.delta_weight == doctest::Approx(1.0));
}

TEST_CASE("kernel_to_acf on the single-exponential kernel") {
  const PronySeries gamma = PronySeries::single(1.0, -1.0);
  const PronySeries h = kernel_to_acf(gamma, 1.0);
  REQUIRE(h.size() == 2);
  // poles -1/2 +- i sqrt(3)/2, h(t) = e^{-t/2}(cos(s t) + sin(s t)/sqrt(3))
  const double s = std::sqrt(3.0) / 2.0;
  for (double t : {0.0, 0.4, 1.3, 3.7}) {
    const double expected = std::exp(-0.5 * t) * (std::cos(s * t) + std::sin(s * t) / std::sqrt(3.0));
    CHECK(h.eval(t) == doctest::Approx(expected).epsilon(1e-10));
  }
  CHECK(std::abs(h.weighted_rate_sum()) < 1e-10);  // h'(0) = 0 by construction
  CHECK(h.eval(0.0) == doctest::Approx(1.0));
}

TEST_CASE("kernel_to_acf rejects kernels without a decaying correlation") {
  // Strong negative tail: gamma(t) = e^{-t} - 3 e^{-2t} has gamma_hat(0) < 0,
  // so the induced correlation cannot decay.
  const PronySeries gamma({cdouble(1.0), cdouble(-3.0)}, {cdouble(-1.0), cdouble(-2.0)});
  CHECK_THROWS_AS(kernel_to_acf(gamma, 1.0), numeric_error);
}

TEST_CASE("theta_L inverts kernel_to_acf for the exponential kernel") {
  const PronySeries gamma = PronySeries::single(1.0, -1.0);
  const PronySeries h = kernel_to_acf(gamma, 1.0);
  const DeltaKernel tl = theta_L(h);
  CHECK(tl.delta_weight == doctest::Approx(0.0));
  REQUIRE(tl.series.size() == 1);
  CHECK(std::abs(tl.series.rates()[0] - cdouble(-1.0)) < 1e-9);
  CHECK(std::abs(tl.series.weights()[0] - cdouble(1.0)) < 1e-9);
}

TEST_CASE("round trip: random stable kernels recover through the correlation map") {
  Rng rng(17);
  int done = 0;
  for (int trial = 0; trial < 40 && done < 10; ++trial) {
    PronySeries gamma = random_stable_series(rng, 1, 1);
    PronySeries h;
    try {
      h = kernel_to_acf(gamma, 1.0);
    } catch (const numeric_error&) {
      continue;  // kernel does not admit a decaying correlation
    }
    ++done;
    const DeltaKernel tl = theta_L(h);
    REQUIRE(tl.series.size() == gamma.size());
    const double dev = testing::max_mode_deviation(gamma.rates(), gamma.weights(),
                                                   tl.series.rates(), tl.series.weights());
    CHECK(dev < 1e-6);
  }
  CHECK(done >= 10);
}

TEST_CASE("five-mode reference kernel maps to a six-mode correlation") {
  const PronySeries gamma({cdouble(0.3488), cdouble(0.3488), cdouble(0.3615), cdouble(0.5300),
                           cdouble(0.3045)},
                          {cdouble(-0.1631, -0.3211), cdouble(-0.1631, 0.3211), cdouble(-0.8262),
                           cdouble(-0.9178), cdouble(-0.3352)});
  const PronySeries h = kernel_to_acf(gamma, 1.0);
  CHECK(h.size() == 6);
  CHECK(h.eval(0.0) == doctest::Approx(1.0));
  CHECK(std::abs(h.weighted_rate_sum()) < 1e-10);
  CHECK(h.is_real_valued());
}

TEST_CASE("theta_L with a force correlation produces the delta constant") {
  const PronySeries gamma = PronySeries::single(1.0, -1.0);
  const PronySeries h = kernel_to_acf(gamma, 1.0);
  // phi with weight sum zero: no delta term
  const PronySeries phi_zero({cdouble(0.3), cdouble(-0.3)}, {cdouble(-1.3), cdouble(-2.1)});
  ThetaLOptions opts;
  opts.mollifier_bandwidth = 0.1;
  const DeltaKernel no_delta = theta_L(h, phi_zero, opts);
  CHECK(std::abs(no_delta.delta_weight) < 1e-9);

  // nonzero phi(0): C = sum w' / sum w
  const PronySeries phi({cdouble(0.4)}, {cdouble(-1.7)});
  const DeltaKernel with_delta = theta_L(h, phi, opts);
  const double expected_c = 0.4 / h.weight_sum().real();
  CHECK(with_delta.delta_weight == doctest::Approx(expected_c).epsilon(1e-8));
  CHECK(with_delta.mollifier_bandwidth == doctest::Approx(0.1));
}

TEST_CASE("force-free theta_L rejects fits violating the derivative constraint") {
  // h'(0) = -3 != 0: the quotient numerator keeps its full degree, which the
  // force-free path treats as a broken upstream constraint.
  const PronySeries h({cdouble(1.0), cdouble(1.0)}, {cdouble(-1.0), cdouble(-2.0)});
  CHECK_THROWS_AS(theta_L(h), numeric_error);
}

TEST_CASE("quotient with vanishing h(0) is improper and rejected") {
  const PronySeries h({cdouble(1.0), cdouble(-1.0)}, {cdouble(-1.0), cdouble(-2.0)});
  const PronySeries g = h.derivative().scaled(-1.0);
  CHECK_THROWS_AS(rational_quotient(g, h), numeric_error);
}
