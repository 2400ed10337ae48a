#include "glekit/gle_sim.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "glekit/rng.hpp"

namespace glekit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Tabulated kernels are evaluated by linear interpolation, zero beyond the grid.
double tabulated_eval(const std::vector<double>& grid, const std::vector<double>& values,
                      double t) {
  if (t < 0.0 || grid.empty()) return 0.0;
  if (t >= grid.back()) return t == grid.back() ? values.back() : 0.0;
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
  const double u = (t - grid[i]) / (grid[i + 1] - grid[i]);
  return values[i] + u * (values[i + 1] - values[i]);
}

// int_0^w u^m e^{i q u} du for m = 0..3.
void oscillatory_moments(double q, double w, cdouble out[4]) {
  const cdouble iq(0.0, q);
  if (std::abs(q * w) < 2.0) {
    // series: w^{m+1} sum_j (i q w)^j / (j! (m + j + 1))
    for (int m = 0; m < 4; ++m) {
      cdouble sum = 0.0, term = 1.0;
      for (int j = 0;; ++j) {
        const cdouble inc = term / static_cast<double>(m + j + 1);
        sum += inc;
        if (std::abs(inc) < 1e-18 * std::abs(sum) && j > 2) break;
        term *= iq * w / static_cast<double>(j + 1);
        if (j > 40) break;
      }
      out[m] = std::pow(w, m + 1) * sum;
    }
    return;
  }
  const cdouble e = std::exp(iq * w);
  out[0] = (e - 1.0) / iq;
  double wm = 1.0;
  for (int m = 1; m < 4; ++m) {
    wm *= w;
    out[m] = (wm * e - static_cast<double>(m) * out[m - 1]) / iq;
  }
}

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

double power_law_kernel(double t) {
  const double s = 1.0 + t * t;
  return (1.0 - 3.0 * t * t) / (s * s * s);
}

KernelSpec KernelSpec::make_prony(PronySeries series) {
  KernelSpec k;
  k.kind = Kind::prony;
  k.prony = std::move(series);
  k.validate();
  return k;
}

KernelSpec KernelSpec::make_power_law() {
  KernelSpec k;
  k.kind = Kind::power_law;
  return k;
}

KernelSpec KernelSpec::make_exponential() {
  KernelSpec k;
  k.kind = Kind::exponential;
  return k;
}

KernelSpec KernelSpec::make_tabulated(std::vector<double> grid, std::vector<double> values) {
  KernelSpec k;
  k.kind = Kind::tabulated;
  k.grid = std::move(grid);
  k.values = std::move(values);
  k.validate();
  return k;
}

double KernelSpec::eval(double t) const {
  switch (kind) {
    case Kind::prony:
      return prony.eval(t);
    case Kind::power_law:
      return power_law_kernel(t);
    case Kind::exponential:
      return std::exp(-t);
    case Kind::tabulated:
      return tabulated_eval(grid, values, t);
  }
  return 0.0;
}

bool KernelSpec::is_zero() const {
  if (kind == Kind::prony) return prony.empty();
  if (kind == Kind::tabulated)
    return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
  return false;
}

void KernelSpec::validate() const {
  if (kind == Kind::prony) {
    prony.require_decaying();
    if (!prony.is_real_valued())
      throw validation_error("Prony kernel is not real-valued: conjugate pairs are incomplete");
  } else if (kind == Kind::tabulated) {
    if (grid.size() != values.size() || grid.size() < 2)
      throw validation_error("tabulated kernel needs matching grid/value arrays of length >= 2");
    if (grid.front() != 0.0) throw validation_error("tabulated kernel grid must start at 0");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
      if (!(grid[i] < grid[i + 1]))
        throw validation_error("tabulated kernel grid must be strictly increasing");
  }
}

void NoiseConfig::validate() const {
  if (!(beta > 0.0)) throw validation_error("beta must be positive");
  if (n_freq < 1) throw validation_error("n_freq must be at least 1");
  if (!(delta_freq > 0.0)) throw validation_error("delta_freq must be positive");
}

ForceSpec ForceSpec::zero() { return {}; }

ForceSpec ForceSpec::linear(double mu) {
  ForceSpec f;
  f.kind = Kind::linear;
  f.mu = mu;
  return f;
}

ForceSpec ForceSpec::double_well() {
  ForceSpec f;
  f.kind = Kind::double_well;
  return f;
}

ForceSpec ForceSpec::custom(std::function<double(double)> fn) {
  ForceSpec f;
  f.kind = Kind::custom;
  f.fn = std::move(fn);
  return f;
}

double ForceSpec::operator()(double v) const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::linear:
      return mu * v;
    case Kind::double_well:
      return -v * (v * v - 4.0);
    case Kind::custom:
      return fn(v);
  }
  return 0.0;
}

DriftSpec DriftSpec::zero() { return {}; }

DriftSpec DriftSpec::duffing() {
  DriftSpec d;
  d.kind = Kind::duffing;
  return d;
}

DriftSpec DriftSpec::custom(std::function<double(double)> fn) {
  DriftSpec d;
  d.kind = Kind::custom;
  d.fn = std::move(fn);
  return d;
}

double DriftSpec::operator()(double t) const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::duffing:
      return 0.1 * std::cos(t);
    case Kind::custom:
      return fn(t);
  }
  return 0.0;
}

void SimConfig::validate() const {
  if (!(dt > 0.0)) throw validation_error("dt must be positive");
  if (n_steps < 2) throw validation_error("n_steps must be at least 2");
  if (!(v0_std >= 0.0)) throw validation_error("v0_std must be nonnegative");
}

void ObservationConfig::validate() const {
  if (ratio < 1) throw validation_error("observation ratio must be at least 1");
  if (!(sigma_obs >= 0.0)) throw validation_error("sigma_obs must be nonnegative");
  if (length_cap < 1) throw validation_error("length_cap must be at least 1");
}

SpectralDensity::SpectralDensity(const KernelSpec& kernel, double beta)
    : kernel_(kernel), beta_(beta) {
  kernel_.validate();
  if (!(beta > 0.0)) throw validation_error("beta must be positive");
  if (kernel_.kind == KernelSpec::Kind::prony || kernel_.kind == KernelSpec::Kind::exponential)
    return;  // closed form

  // Piecewise-cubic Filon table for the numerical cosine transform. The
  // integration range ends where |gamma| stays below 1e-12.
  double t_end;
  if (kernel_.kind == KernelSpec::Kind::tabulated) {
    t_end = kernel_.grid.back();
  } else {
    t_end = 10.0;
    while (std::abs(kernel_.eval(t_end)) >= 1e-12 && t_end < 1e7) t_end *= 1.25;
  }

  double scale = 0.0;
  for (int i = 0; i <= 256; ++i)
    scale = std::max(scale, std::abs(kernel_.eval(t_end * i / 256.0)));
  if (scale == 0.0) scale = 1.0;

  // Recursive refinement until a cubic through 4 equispaced samples matches
  // the kernel at interior probes.
  struct Builder {
    const KernelSpec& kernel;
    double tol;
    std::vector<FilonPanel>& panels;
    void build(double a, double b, int depth) {
      const double w = b - a;
      Eigen::Matrix4d vand;
      Eigen::Vector4d rhs;
      for (int i = 0; i < 4; ++i) {
        const double u = w * i / 3.0;
        vand(i, 0) = 1.0;
        vand(i, 1) = u;
        vand(i, 2) = u * u;
        vand(i, 3) = u * u * u;
        rhs(i) = kernel.eval(a + u);
      }
      const Eigen::Vector4d c = vand.colPivHouseholderQr().solve(rhs);
      double err = 0.0;
      for (double frac : {0.17, 0.5, 0.83}) {
        const double u = w * frac;
        const double fit = c(0) + u * (c(1) + u * (c(2) + u * c(3)));
        err = std::max(err, std::abs(fit - kernel.eval(a + u)));
      }
      if (err > tol && depth < 24) {
        build(a, 0.5 * (a + b), depth + 1);
        build(0.5 * (a + b), b, depth + 1);
        return;
      }
      panels.push_back({a, w, c(0), c(1), c(2), c(3)});
    }
  };
  Builder builder{kernel_, 1e-9 * scale, panels_};
  // Geometric base grid keeps panels narrow near 0 where the kernel varies.
  std::vector<double> edges{0.0};
  double step = std::min(0.25, t_end / 8.0);
  while (edges.back() < t_end) {
    edges.push_back(std::min(edges.back() + step, t_end));
    step = std::min(step * 1.5, t_end / 8.0);
  }
  if (kernel_.kind == KernelSpec::Kind::tabulated) {
    edges.insert(edges.end(), kernel_.grid.begin(), kernel_.grid.end());
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) builder.build(edges[i], edges[i + 1], 0);
  std::sort(panels_.begin(), panels_.end(),
            [](const FilonPanel& a, const FilonPanel& b) { return a.start < b.start; });
}

double SpectralDensity::cosine_transform(double freq) const {
  // sum over panels of Re[ e^{i w a} int_0^w q(u) e^{i w u} du ]
  double total = 0.0;
  cdouble moments[4];
  for (const FilonPanel& p : panels_) {
    oscillatory_moments(freq, p.width, moments);
    const cdouble inner =
        p.c0 * moments[0] + p.c1 * moments[1] + p.c2 * moments[2] + p.c3 * moments[3];
    const cdouble phase = std::exp(cdouble(0.0, freq * p.start));
    total += (phase * inner).real();
  }
  return total;
}

double SpectralDensity::operator()(double freq) const {
  if (!(freq >= 0.0)) throw validation_error("spectral density frequency must be >= 0");
  double integral;
  if (kernel_.kind == KernelSpec::Kind::prony) {
    // int_0^inf e^{lambda t} cos(w t) dt = -lambda / (lambda^2 + w^2)
    cdouble acc = 0.0;
    for (std::size_t k = 0; k < kernel_.prony.size(); ++k) {
      const cdouble lam = kernel_.prony.rates()[k];
      acc += kernel_.prony.weights()[k] * (-lam) / (lam * lam + freq * freq);
    }
    integral = acc.real();
  } else if (kernel_.kind == KernelSpec::Kind::exponential) {
    integral = 1.0 / (1.0 + freq * freq);
  } else {
    integral = cosine_transform(freq);
  }
  double s = integral / (std::numbers::pi * beta_);
  if (s < 0.0) {
    ++clamp_count_;
    s = 0.0;
  }
  return s;
}

double spectral_density(const KernelSpec& kernel, double beta, double freq) {
  return SpectralDensity(kernel, beta)(freq);
}

NoiseGenerator::NoiseGenerator(const KernelSpec& kernel, const NoiseConfig& cfg)
    : n_freq_(cfg.n_freq), delta_freq_(cfg.delta_freq) {
  cfg.validate();
  const std::size_t n = static_cast<std::size_t>(cfg.n_freq);
  SpectralDensity density(kernel, cfg.beta);
  amplitude_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double wk = (static_cast<double>(k) + 0.5) * cfg.delta_freq;
    amplitude_[k] = std::sqrt(2.0 * density(wk) * cfg.delta_freq);
  }
  spectral_clamps_ = density.clamp_count();
}

std::vector<double> NoiseGenerator::generate(std::int64_t n_samples, double dt,
                                             std::uint64_t seed, NoiseInfo* info) const {
  if (n_samples < 0) throw validation_error("n_samples must be nonnegative");
  if (!(dt > 0.0)) throw validation_error("dt must be positive");

  NoiseInfo local;
  local.spectral_clamps = spectral_clamps_;
  const double period = kTwoPi / delta_freq_;
  local.wrapped = static_cast<double>(n_samples) * dt > period * (1.0 + 1e-12);

  const std::size_t n = amplitude_.size();
  const std::vector<double>& amplitude = amplitude_;

  Rng rng(seed);
  std::vector<double> phase(n);
  for (std::size_t k = 0; k < n; ++k) phase[k] = rng.uniform(0.0, kTwoPi);

  std::vector<double> out(static_cast<std::size_t>(n_samples));
  const double grid_identity = dt * n_freq_ * delta_freq_ / std::numbers::pi;
  if (std::abs(grid_identity - 1.0) < 1e-9) {
    // w_k t_l = (k + 1/2) pi l / n: one inverse DFT of length 2n gives an
    // antiperiodic block of 2n samples.
    local.used_fast_transform = true;
    const std::size_t m = 2 * n;
    std::vector<cdouble> in(m, cdouble(0.0)), spectrum(m);
    for (std::size_t k = 0; k < n; ++k) in[k] = amplitude[k] * std::exp(cdouble(0.0, phase[k]));
    {
      fftw_plan plan;
      {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(m), reinterpret_cast<fftw_complex*>(in.data()),
                                reinterpret_cast<fftw_complex*>(spectrum.data()), FFTW_BACKWARD,
                                FFTW_ESTIMATE);
      }
      fftw_execute(plan);
      {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_destroy_plan(plan);
      }
    }
    const double root2 = std::sqrt(2.0);
    for (std::int64_t l = 0; l < n_samples; ++l) {
      const std::size_t block = static_cast<std::size_t>(l) / m;
      const std::size_t idx = static_cast<std::size_t>(l) % m;
      const double sign = (block % 2 == 0) ? 1.0 : -1.0;  // antiperiodic extension
      const cdouble half_shift =
          std::exp(cdouble(0.0, std::numbers::pi * static_cast<double>(idx) / (2.0 * n)));
      out[static_cast<std::size_t>(l)] = sign * root2 * (half_shift * spectrum[idx]).real();
    }
  } else {
    for (std::int64_t l = 0; l < n_samples; ++l) {
      const double t = static_cast<double>(l) * dt;
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double wk = (static_cast<double>(k) + 0.5) * delta_freq_;
        acc += amplitude[k] * std::cos(wk * t + phase[k]);
      }
      out[static_cast<std::size_t>(l)] = std::sqrt(2.0) * acc;
    }
  }
  if (info) *info = local;
  return out;
}

std::vector<double> simulate_noise(const KernelSpec& kernel, const NoiseConfig& cfg,
                                   std::int64_t n_samples, double dt, NoiseInfo* info) {
  return NoiseGenerator(kernel, cfg).generate(n_samples, dt, cfg.seed, info);
}

std::vector<double> simulate_trajectory(const KernelSpec& kernel, const SimConfig& cfg,
                                        std::span<const double> noise, std::uint64_t seed) {
  cfg.validate();
  kernel.validate();
  const std::size_t L = static_cast<std::size_t>(cfg.n_steps);
  if (noise.size() < L) throw validation_error("noise sequence shorter than n_steps");

  std::vector<double> kernel_samples(L);
  for (std::size_t i = 0; i < L; ++i)
    kernel_samples[i] = kernel.eval(static_cast<double>(i) * cfg.dt);

  std::size_t memory_span = L;
  if (std::isfinite(cfg.t_mem))
    memory_span = std::min<std::size_t>(
        L, static_cast<std::size_t>(std::max(0.0, cfg.t_mem / cfg.dt)) + 1);

  Rng rng(seed);
  std::vector<double> v(L);
  v[0] = cfg.v0_std * rng.gaussian();
  const double dt = cfg.dt;
  for (std::size_t l = 0; l + 1 < L; ++l) {
    const std::size_t j0 = (l + 1 > memory_span) ? l + 1 - memory_span : 0;
    double memory = 0.0;
    const double* g = kernel_samples.data();
    const double* vv = v.data();
    for (std::size_t j = j0; j <= l; ++j) memory += g[l - j] * vv[j];
    const double t = static_cast<double>(l) * dt;
    v[l + 1] = v[l] + dt * (cfg.force(v[l]) - dt * memory + noise[l] + cfg.drift(t));
    if (!std::isfinite(v[l + 1]))
      throw numeric_error("trajectory diverged at step " + std::to_string(l + 1));
  }
  return v;
}

std::vector<double> observe(std::span<const double> trajectory, const ObservationConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(cfg.ratio) * static_cast<std::size_t>(cfg.length_cap) >
      trajectory.size())
    throw validation_error("observation window exceeds trajectory length");
  Rng rng(cfg.seed);
  std::vector<double> out(static_cast<std::size_t>(cfg.length_cap));
  for (std::size_t j = 0; j < out.size(); ++j) {
    double xi = cfg.sigma_obs > 0.0 ? cfg.sigma_obs * rng.gaussian() : 0.0;
    out[j] = trajectory[j * static_cast<std::size_t>(cfg.ratio)] + xi;
  }
  return out;
}

}  // namespace glekit
