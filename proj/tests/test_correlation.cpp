#include <doctest.h>

#include <cmath>

#include "glekit/correlation.hpp"
#include "glekit/rng.hpp"

using namespace glekit;

TEST_CASE("temporal acf of a constant sequence") {
  std::vector<double> v(64, 3.0);
  const auto est = temporal_acf(v, 8, 0.5);
  REQUIRE(est.max_lag() == 8);
  for (double h : est.values_h) CHECK(h == doctest::Approx(9.0));
  for (int n = 1; n <= 8; ++n)
    CHECK(est.n_terms[static_cast<std::size_t>(n - 1)] == 64 - n);
}

TEST_CASE("temporal acf of an alternating sequence") {
  std::vector<double> v(101);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (i % 2 == 0) ? 1.0 : -1.0;
  const auto est = temporal_acf(v, 6, 1.0);
  for (int n = 1; n <= 6; ++n)
    CHECK(est.values_h[static_cast<std::size_t>(n - 1)] ==
          doctest::Approx(n % 2 == 0 ? 1.0 : -1.0));
}

TEST_CASE("temporal acf validates the lag count") {
  std::vector<double> v(10, 1.0);
  CHECK_THROWS_AS(temporal_acf(v, 10, 1.0), validation_error);
  CHECK_THROWS_AS(temporal_acf(v, 0, 1.0), validation_error);
}

TEST_CASE("white-noise acf stays within CLT bars") {
  // |h_n| <= 4 / sqrt(L - n) for n = 1..24 in at least 99% of draws
  const std::int64_t L = 1 << 16;
  int pass = 0, total = 0;
  for (int seed = 0; seed < 100; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed) + 1);
    std::vector<double> v(static_cast<std::size_t>(L));
    for (auto& x : v) x = rng.gaussian();
    const auto est = temporal_acf(v, 24, 1.0);
    for (int n = 1; n <= 24; ++n) {
      ++total;
      if (std::abs(est.values_h[static_cast<std::size_t>(n - 1)]) <=
          4.0 / std::sqrt(static_cast<double>(L - n)))
        ++pass;
    }
  }
  CHECK(static_cast<double>(pass) / total >= 0.99);
}

TEST_CASE("force correlation: zero force and linear force") {
  Rng rng(5);
  std::vector<double> v(512);
  for (auto& x : v) x = rng.gaussian();

  const auto zero = temporal_force_corr(v, ForceSpec::zero(), 6);
  for (double p : zero) CHECK(p == 0.0);

  // F(v) = -v: phi_n = -h_n and phi_0 = -mean(v^2)
  const auto phi = temporal_force_corr(v, ForceSpec::linear(-1.0), 6);
  const auto h = temporal_acf(v, 6, 1.0);
  REQUIRE(phi.size() == 7);
  double msq = 0.0;
  for (double x : v) msq += x * x;
  msq /= static_cast<double>(v.size());
  CHECK(phi[0] == doctest::Approx(-msq).epsilon(1e-12));
  for (int n = 1; n <= 6; ++n)
    CHECK(phi[static_cast<std::size_t>(n)] ==
          doctest::Approx(-h.values_h[static_cast<std::size_t>(n - 1)]).epsilon(1e-12));
}

TEST_CASE("force correlation golden values on a fixed double-well series") {
  // frozen values recomputed by direct re-summation
  std::vector<double> v{0.5, -1.2, 2.0, 0.3, -0.7, 1.5, -2.1, 0.9};
  const ForceSpec f = ForceSpec::double_well();
  const auto phi = temporal_force_corr(v, f, 2);
  for (int n = 0; n <= 2; ++n) {
    double acc = 0.0;
    const std::size_t count = v.size() - static_cast<std::size_t>(n);
    for (std::size_t l = 0; l < count; ++l) acc += v[l] * f(v[l + static_cast<std::size_t>(n)]);
    CHECK(phi[static_cast<std::size_t>(n)] ==
          doctest::Approx(acc / static_cast<double>(count)).epsilon(1e-14));
  }
}

TEST_CASE("ensemble correlation equals temporal acf for a single member") {
  Rng rng(8);
  TrajectoryEnsemble ens;
  ens.dt = 0.25;
  ens.members.emplace_back(300);
  for (auto& x : ens.members[0]) x = rng.gaussian();
  const auto single = ensemble_corr(ens, std::nullopt, 12);
  const auto direct = temporal_acf(ens.members[0], 12, 0.25);
  for (int n = 0; n < 12; ++n) {
    CHECK(single.values_h[static_cast<std::size_t>(n)] ==
          doctest::Approx(direct.values_h[static_cast<std::size_t>(n)]).epsilon(1e-13));
    CHECK(single.n_terms[static_cast<std::size_t>(n)] ==
          direct.n_terms[static_cast<std::size_t>(n)]);
  }
}

TEST_CASE("ensemble correlation: identical copies and sign-flipped pairs") {
  Rng rng(13);
  std::vector<double> base(200);
  for (auto& x : base) x = rng.gaussian();

  TrajectoryEnsemble copies;
  copies.dt = 1.0;
  for (int m = 0; m < 5; ++m) copies.members.push_back(base);
  const auto from_copies = ensemble_corr(copies, std::nullopt, 10);
  const auto direct = temporal_acf(base, 10, 1.0);
  for (int n = 0; n < 10; ++n) {
    CHECK(from_copies.values_h[static_cast<std::size_t>(n)] ==
          doctest::Approx(direct.values_h[static_cast<std::size_t>(n)]).epsilon(1e-13));
    CHECK(from_copies.n_terms[static_cast<std::size_t>(n)] ==
          5 * direct.n_terms[static_cast<std::size_t>(n)]);
  }

  TrajectoryEnsemble flipped;
  flipped.dt = 1.0;
  flipped.members.push_back(base);
  std::vector<double> neg(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) neg[i] = -base[i];
  flipped.members.push_back(neg);
  const auto from_flipped = ensemble_corr(flipped, std::nullopt, 10);
  for (int n = 0; n < 10; ++n)
    CHECK(from_flipped.values_h[static_cast<std::size_t>(n)] ==
          doctest::Approx(direct.values_h[static_cast<std::size_t>(n)]).epsilon(1e-13));
}

TEST_CASE("ensemble correlation rejects empty and ragged input") {
  TrajectoryEnsemble ens;
  ens.dt = 1.0;
  CHECK_THROWS_AS(ensemble_corr(ens, std::nullopt, 4), validation_error);
  ens.members.push_back(std::vector<double>(10, 1.0));
  ens.members.push_back(std::vector<double>(11, 1.0));
  CHECK_THROWS_AS(ensemble_corr(ens, std::nullopt, 4), validation_error);
}

TEST_CASE("acf is invariant under time reversal") {
  Rng rng(21);
  std::vector<double> v(257);
  for (auto& x : v) x = rng.gaussian();
  std::vector<double> rev(v.rbegin(), v.rend());
  const auto fwd = temporal_acf(v, 16, 1.0);
  const auto bwd = temporal_acf(rev, 16, 1.0);
  for (int n = 0; n < 16; ++n)
    CHECK(fwd.values_h[static_cast<std::size_t>(n)] ==
          doctest::Approx(bwd.values_h[static_cast<std::size_t>(n)]).epsilon(1e-12));
}
