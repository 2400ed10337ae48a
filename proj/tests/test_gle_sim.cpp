#include <doctest.h>

#include <cmath>
#include <numbers>

#include "glekit/gle_sim.hpp"
#include "glekit/quadrature.hpp"
#include "glekit/rng.hpp"

using namespace glekit;

namespace {

PronySeries fivemode() {
  return PronySeries({cdouble(0.3488), cdouble(0.3488), cdouble(0.3615), cdouble(0.5300),
                      cdouble(0.3045)},
                     {cdouble(-0.1631, -0.3211), cdouble(-0.1631, 0.3211), cdouble(-0.8262),
                      cdouble(-0.9178), cdouble(-0.3352)});
}

}  // namespace

TEST_CASE("spectral density closed form for the unit exponential kernel") {
  const KernelSpec k = KernelSpec::make_exponential();
  CHECK(spectral_density(k, 1.0, 0.0) == doctest::Approx(1.0 / std::numbers::pi));
  CHECK(spectral_density(k, 1.0, 1.0) == doctest::Approx(0.5 / std::numbers::pi));
  // same kernel through the Prony path
  const KernelSpec kp = KernelSpec::make_prony(PronySeries::single(1.0, -1.0));
  CHECK(spectral_density(kp, 1.0, 0.7) ==
        doctest::Approx(spectral_density(k, 1.0, 0.7)).epsilon(1e-14));
}

TEST_CASE("spectral density of the five-mode kernel matches a quadrature oracle") {
  const KernelSpec k = KernelSpec::make_prony(fivemode());
  const double w = 0.5;
  // cosine-transform quadrature on [0, 200]; the tail is below 1e-12
  const double integral = integrate_adaptive(
      [&](double t) { return k.eval(t) * std::cos(w * t); }, 0.0, 200.0, 1e-13);
  const double oracle = integral / std::numbers::pi;
  CHECK(spectral_density(k, 1.0, w) == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("power-law spectral density agrees with the closed form w^2 e^{-w}/4") {
  // int_0^inf (1-3t^2)/(1+t^2)^3 cos(wt) dt = pi w^2 e^{-w} / 4
  const KernelSpec k = KernelSpec::make_power_law();
  const SpectralDensity density(k, 1.0);
  for (double w : {0.3, 1.0, 2.5, 6.0}) {
    const double expected = w * w * std::exp(-w) / 4.0;
    CHECK(density(w) == doctest::Approx(expected).epsilon(1e-7));
  }
  CHECK(density(0.0) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("tabulated kernel density matches its generating function") {
  std::vector<double> grid, values;
  for (int i = 0; i <= 4000; ++i) {
    grid.push_back(i * 0.01);
    values.push_back(std::exp(-grid.back()));
  }
  const KernelSpec k = KernelSpec::make_tabulated(grid, values);
  const SpectralDensity density(k, 1.0);
  CHECK(density(1.0) == doctest::Approx(0.5 / std::numbers::pi).epsilon(1e-4));
}

TEST_CASE("invalid kernels are rejected") {
  CHECK_THROWS_AS(KernelSpec::make_prony(PronySeries::single(1.0, 0.2)), validation_error);
  CHECK_THROWS_AS(KernelSpec::make_tabulated({0.5, 1.0}, {1.0, 0.5}), validation_error);
  CHECK_THROWS_AS(KernelSpec::make_tabulated({0.0, 0.0}, {1.0, 0.5}), validation_error);
}

TEST_CASE("noise: zero kernel gives identically zero noise") {
  const KernelSpec k = KernelSpec::make_prony(PronySeries({}, {}));
  NoiseConfig cfg;
  cfg.n_freq = 100;
  cfg.delta_freq = std::numbers::pi / 100.0;
  cfg.seed = 9;
  const auto noise = simulate_noise(k, cfg, 50, std::numbers::pi / (100.0 * cfg.delta_freq));
  for (double v : noise) CHECK(v == 0.0);
}

TEST_CASE("noise: same seed gives bit-identical sequences, fast path matches direct") {
  const KernelSpec k = KernelSpec::make_prony(fivemode());
  NoiseConfig cfg;
  cfg.n_freq = 128;
  cfg.delta_freq = std::numbers::pi / 100.0;
  cfg.seed = 1234;
  const double dt = std::numbers::pi / (cfg.n_freq * cfg.delta_freq);
  NoiseInfo info_a, info_b;
  const auto a = simulate_noise(k, cfg, 200, dt, &info_a);
  const auto b = simulate_noise(k, cfg, 200, dt, &info_b);
  CHECK(info_a.used_fast_transform);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

  // direct summation path at a slightly perturbed dt
  NoiseInfo info_c;
  const auto c = simulate_noise(k, cfg, 200, dt * (1.0 + 1e-5), &info_c);
  CHECK_FALSE(info_c.used_fast_transform);
  // first sample (t = 0) is identical; later samples drift with the grid
  CHECK(a[0] == doctest::Approx(c[0]).epsilon(1e-12));

  // and the fast path agrees with direct summation on the same grid
  NoiseGenerator gen(k, cfg);
  const auto d = gen.generate(200, dt, cfg.seed);
  double max_diff = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) max_diff = std::max(max_diff, std::abs(d[i] - a[i]));
  CHECK(max_diff < 1e-9);
}

TEST_CASE("noise antiperiodic wrap beyond the artificial period") {
  const KernelSpec k = KernelSpec::make_prony(fivemode());
  NoiseConfig cfg;
  cfg.n_freq = 64;
  cfg.delta_freq = std::numbers::pi / 10.0;
  cfg.seed = 5;
  const double dt = std::numbers::pi / (cfg.n_freq * cfg.delta_freq);
  NoiseInfo info;
  const auto r = simulate_noise(k, cfg, 4 * 128 + 10, dt, &info);
  CHECK(info.wrapped);
  for (int l = 0; l < 10; ++l) CHECK(r[static_cast<std::size_t>(l)] ==
                                     doctest::Approx(-r[static_cast<std::size_t>(l + 128)]).epsilon(1e-10));
}

TEST_CASE("noise autocovariance at lag zero approximates gamma(0)/beta") {
  // paper-style grid, one full period of samples
  const KernelSpec k = KernelSpec::make_prony(fivemode());
  NoiseConfig cfg;
  cfg.n_freq = 10000;
  cfg.delta_freq = std::numbers::pi / 100.0;
  cfg.seed = 77;
  const double dt = 0.01;
  const std::int64_t period_samples = 2 * cfg.n_freq;
  const auto r = simulate_noise(k, cfg, period_samples, dt);
  double acc = 0.0;
  for (double v : r) acc += v * v;
  acc /= static_cast<double>(r.size());
  const double expected = fivemode().eval(0.0);  // beta = 1
  CHECK(std::abs(acc - expected) / expected < 0.02);
}

TEST_CASE("trajectory: free particle stays constant") {
  const KernelSpec k = KernelSpec::make_prony(PronySeries({}, {}));
  SimConfig sim;
  sim.dt = 0.1;
  sim.n_steps = 100;
  sim.v0_std = 1.0;
  const std::vector<double> noise(100, 0.0);
  const auto v = simulate_trajectory(k, sim, noise, 3);
  for (double x : v) CHECK(x == v[0]);
  CHECK(v[0] != 0.0);
}

TEST_CASE("trajectory: linear force is explicit Euler on v' = -v") {
  const KernelSpec k = KernelSpec::make_prony(PronySeries({}, {}));
  SimConfig sim;
  sim.dt = 0.05;
  sim.n_steps = 50;
  sim.v0_std = 0.0;  // v0 = 0... override below via custom force check
  sim.force = ForceSpec::linear(-1.0);
  const std::vector<double> noise(50, 0.0);
  // v0_std = 0 makes v identically zero; use a drift kick at t=0 instead:
  // simpler: check the recurrence on a nonzero start by direct reconstruction.
  SimConfig sim2 = sim;
  sim2.v0_std = 1.0;
  const auto v = simulate_trajectory(k, sim2, noise, 11);
  for (std::size_t l = 0; l + 1 < v.size(); ++l)
    CHECK(v[l + 1] == doctest::Approx(v[l] * (1.0 - sim.dt)).epsilon(1e-13));
}

TEST_CASE("trajectory divergence reports the step") {
  const KernelSpec k = KernelSpec::make_prony(PronySeries({}, {}));
  SimConfig sim;
  sim.dt = 1.0;
  sim.n_steps = 2000;
  sim.v0_std = 1.0;
  sim.force = ForceSpec::custom([](double v) { return v * v * v; });  // blows up
  const std::vector<double> noise(2000, 0.0);
  CHECK_THROWS_AS(simulate_trajectory(k, sim, noise, 1), numeric_error);
}

TEST_CASE("double well and duffing forms") {
  const ForceSpec f = ForceSpec::double_well();
  CHECK(f(1.0) == doctest::Approx(3.0));   // -1 (1 - 4)
  CHECK(f(2.0) == doctest::Approx(0.0));
  const DriftSpec d = DriftSpec::duffing();
  CHECK(d(0.0) == doctest::Approx(0.1));
}

TEST_CASE("observation: identity when noiseless with unit stride") {
  std::vector<double> traj{1.0, 2.0, 3.0, 4.0};
  ObservationConfig obs;
  obs.ratio = 1;
  obs.sigma_obs = 0.0;
  obs.length_cap = 4;
  obs.seed = 1;
  const auto o = observe(traj, obs);
  REQUIRE(o.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(o[i] == traj[i]);
}

TEST_CASE("observation: stride, noise determinism and bounds") {
  std::vector<double> traj(1000, 0.0);
  for (std::size_t i = 0; i < traj.size(); ++i) traj[i] = static_cast<double>(i);
  ObservationConfig obs;
  obs.ratio = 70;
  obs.sigma_obs = 0.1;
  obs.length_cap = 14;
  obs.seed = 21;
  const auto a = observe(traj, obs);
  const auto b = observe(traj, obs);
  REQUIRE(a.size() == 14);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == b[i]);
    CHECK(std::abs(a[i] - traj[i * 70]) < 1.0);  // noise is O(0.1)
  }
  obs.length_cap = 15;
  CHECK_THROWS_AS(observe(traj, obs), validation_error);
}

TEST_CASE("stationarity smoke: force-free run has stable halves") {
  const KernelSpec k = KernelSpec::make_prony(fivemode());
  NoiseConfig ncfg;
  ncfg.n_freq = 2000;
  ncfg.delta_freq = std::numbers::pi / 100.0;
  ncfg.seed = 2024;
  const double dt = std::numbers::pi / (ncfg.n_freq * ncfg.delta_freq);
  SimConfig sim;
  sim.dt = dt;
  sim.n_steps = 1 << 14;
  sim.v0_std = 1.0;
  const auto noise = simulate_noise(k, ncfg, sim.n_steps, dt);
  const auto v = simulate_trajectory(k, sim, noise, 99);
  auto var = [&](std::size_t lo, std::size_t hi) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      s += v[i];
      s2 += v[i] * v[i];
    }
    const double n = static_cast<double>(hi - lo);
    return s2 / n - (s / n) * (s / n);
  };
  const double v1 = var(0, v.size() / 2);
  const double v2 = var(v.size() / 2, v.size());
  CHECK(std::abs(v2 - v1) / v1 < 0.2);
}
