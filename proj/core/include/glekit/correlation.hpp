// Discrete correlation-function estimation from observed trajectories.
//
// The lag-0 autocorrelation value is biased by the observation noise
// variance and is never exposed: values_h starts at lag 1. The force
// correlation keeps lag 0 (phi(0) is generally nonzero and the
// inverse-Laplace path needs it).
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "glekit/gle_sim.hpp"

namespace glekit {

struct CorrelationEstimate {
  double dt_obs = 0.0;
  std::vector<double> values_h;              // h_n, n = 1..N
  std::optional<std::vector<double>> values_phi;  // phi_n, n = 0..N
  std::vector<std::int64_t> n_terms;         // summand counts per h lag, (L-n) M

  int max_lag() const { return static_cast<int>(values_h.size()); }
  void validate() const;
};

// h_n = 1/(L-n) sum_{l} v_l v_{l+n}, n = 1..n_lags (lag 0 dropped).
CorrelationEstimate temporal_acf(std::span<const double> obs, int n_lags, double dt_obs);

// phi_n = 1/(L-n) sum_{l} v_l F(v_{l+n}), n = 0..n_lags.
std::vector<double> temporal_force_corr(std::span<const double> obs, const ForceSpec& force,
                                        int n_lags);

// Double average over members and lags: h_n = 1/((L-n) M) sum_m sum_l ...
// All members must share length and timestep. With force present the phi
// sequence is filled as well.
CorrelationEstimate ensemble_corr(const TrajectoryEnsemble& ensemble,
                                  const std::optional<ForceSpec>& force, int n_lags);

}  // namespace glekit
