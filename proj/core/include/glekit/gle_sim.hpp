// Ground-truth GLE trajectory generation: fluctuation-dissipation-consistent
// colored noise from the spectral representation, explicit Euler integration
// of the memory integro-differential equation, and noisy subsampled
// observation.
#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "glekit/prony_series.hpp"

namespace glekit {

//  (1 - 3t^2) / (1 + t^2)^3
double power_law_kernel(double t);

struct KernelSpec {
  enum class Kind { prony, power_law, exponential, tabulated };
  Kind kind = Kind::prony;
  PronySeries prony;             // kind == prony
  std::vector<double> grid;      // kind == tabulated: strictly increasing, grid[0] == 0
  std::vector<double> values;

  static KernelSpec make_prony(PronySeries series);
  static KernelSpec make_power_law();
  static KernelSpec make_exponential();  // gamma(t) = e^{-t}
  static KernelSpec make_tabulated(std::vector<double> grid, std::vector<double> values);

  double eval(double t) const;
  bool is_zero() const;
  void validate() const;
};

struct NoiseConfig {
  double beta = 1.0;        // inverse temperature
  int n_freq = 10000;
  double delta_freq = 0.0;  // rad/time
  std::uint64_t seed = 0;
  void validate() const;
};

struct ForceSpec {
  enum class Kind { zero, linear, double_well, custom };
  Kind kind = Kind::zero;
  double mu = 0.0;                    // linear: F(v) = mu * v
  std::function<double(double)> fn;   // custom

  static ForceSpec zero();
  static ForceSpec linear(double mu);
  static ForceSpec double_well();     // F(v) = -v (v^2 - 4)
  static ForceSpec custom(std::function<double(double)> fn);
  double operator()(double v) const;
  bool is_zero() const { return kind == Kind::zero; }
};

struct DriftSpec {
  enum class Kind { zero, duffing, custom };
  Kind kind = Kind::zero;
  std::function<double(double)> fn;

  static DriftSpec zero();
  static DriftSpec duffing();         // G(t) = cos(t) / 10
  static DriftSpec custom(std::function<double(double)> fn);
  double operator()(double t) const;
  bool is_zero() const { return kind == Kind::zero; }
};

struct SimConfig {
  double dt = 0.01;
  std::int64_t n_steps = 0;
  double v0_std = 1.0;
  ForceSpec force;
  DriftSpec drift;
  // Optional truncation horizon for the memory sum; infinity = exact O(L^2)
  // evaluation (the default). Truncation is an approximation.
  double t_mem = std::numeric_limits<double>::infinity();
  void validate() const;
};

struct ObservationConfig {
  std::int64_t ratio = 1;       // subsampling stride r
  double sigma_obs = 0.0;
  std::int64_t length_cap = 0;  // observed sample count
  std::uint64_t seed = 0;
  void validate() const;
};

// S(w) = (1/(pi beta)) int_0^inf gamma(t) cos(w t) dt, closed form for Prony
// kernels and by a Filon-type piecewise-cubic cosine transform for the
// power-law / tabulated kinds. Values driven negative by round-off are
// clamped to zero and counted.
class SpectralDensity {
 public:
  SpectralDensity(const KernelSpec& kernel, double beta);
  double operator()(double freq) const;
  std::int64_t clamp_count() const { return clamp_count_; }

 private:
  struct FilonPanel {
    double start, width;
    double c0, c1, c2, c3;  // local cubic in u = t - start
  };
  double cosine_transform(double freq) const;

  KernelSpec kernel_;
  double beta_;
  std::vector<FilonPanel> panels_;  // empty for closed-form kinds
  mutable std::int64_t clamp_count_ = 0;
};

double spectral_density(const KernelSpec& kernel, double beta, double freq);

struct NoiseInfo {
  bool used_fast_transform = false;
  bool wrapped = false;          // n_samples * dt exceeded the artificial period
  std::int64_t spectral_clamps = 0;
};

// Spectral-representation noise on t_l = l dt, l = 0 .. n_samples-1:
//   R(t_l) = sqrt(2) sum_k sqrt(2 S(w_k) dw) cos(w_k t_l + Phi_k),
//   w_k = (k + 1/2) dw,  Phi_k i.i.d. uniform on [0, 2pi).
// When dt = pi / (n_freq dw) holds, the sum collapses to an FFT.
//
// The amplitude table sqrt(2 S(w_k) dw) depends only on (kernel, beta, grid);
// constructing a NoiseGenerator once and generating per-seed sequences from
// it amortizes the spectral-density evaluation across ensemble members.
class NoiseGenerator {
 public:
  NoiseGenerator(const KernelSpec& kernel, const NoiseConfig& cfg);
  std::vector<double> generate(std::int64_t n_samples, double dt, std::uint64_t seed,
                               NoiseInfo* info = nullptr) const;
  std::int64_t spectral_clamps() const { return spectral_clamps_; }

 private:
  int n_freq_;
  double delta_freq_;
  std::vector<double> amplitude_;
  std::int64_t spectral_clamps_ = 0;
};

std::vector<double> simulate_noise(const KernelSpec& kernel, const NoiseConfig& cfg,
                                   std::int64_t n_samples, double dt,
                                   NoiseInfo* info = nullptr);

// Explicit Euler with a left-endpoint Riemann memory sum:
//   v_{l+1} = v_l + dt [ F(v_l) - dt sum_{j<=l} gamma(t_{l-j}) v_j + R_l + G(t_l) ]
// Throws numeric_error with the step index if the state stops being finite.
std::vector<double> simulate_trajectory(const KernelSpec& kernel, const SimConfig& cfg,
                                        std::span<const double> noise, std::uint64_t seed);

// o_j = v[j r] + xi_j, xi_j i.i.d. N(0, sigma_obs^2), j = 0 .. length_cap-1.
std::vector<double> observe(std::span<const double> trajectory, const ObservationConfig& cfg);

struct TrajectoryEnsemble {
  double dt = 0.0;  // observation timestep of the stored members
  std::vector<std::vector<double>> members;
};

}  // namespace glekit
