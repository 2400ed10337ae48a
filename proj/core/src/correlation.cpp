#include "glekit/correlation.hpp"

#include <cmath>

namespace glekit {

void CorrelationEstimate::validate() const {
  if (values_h.empty()) throw validation_error("correlation estimate has no lags");
  if (!(dt_obs > 0.0)) throw validation_error("correlation estimate needs dt_obs > 0");
  if (n_terms.size() != values_h.size())
    throw validation_error("correlation estimate has mismatched n_terms");
  if (values_phi && values_phi->size() != values_h.size() + 1)
    throw validation_error("force correlation must cover lags 0..N");
}

CorrelationEstimate temporal_acf(std::span<const double> obs, int n_lags, double dt_obs) {
  const std::int64_t L = static_cast<std::int64_t>(obs.size());
  if (n_lags < 1) throw validation_error("need at least one lag");
  if (n_lags >= L) throw validation_error("lag count must be smaller than the sample count");

  CorrelationEstimate est;
  est.dt_obs = dt_obs;
  est.values_h.resize(static_cast<std::size_t>(n_lags));
  est.n_terms.resize(static_cast<std::size_t>(n_lags));
  for (int n = 1; n <= n_lags; ++n) {
    const std::int64_t count = L - n;
    const double sum = pairwise_sum_indexed(
        0, count, [&](std::int64_t l) { return obs[static_cast<std::size_t>(l)] *
                                               obs[static_cast<std::size_t>(l + n)]; });
    est.values_h[static_cast<std::size_t>(n - 1)] = sum / static_cast<double>(count);
    est.n_terms[static_cast<std::size_t>(n - 1)] = count;
  }
  return est;
}

std::vector<double> temporal_force_corr(std::span<const double> obs, const ForceSpec& force,
                                        int n_lags) {
  const std::int64_t L = static_cast<std::int64_t>(obs.size());
  if (n_lags < 0) throw validation_error("lag count must be nonnegative");
  if (n_lags >= L) throw validation_error("lag count must be smaller than the sample count");

  std::vector<double> fv(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) fv[i] = force(obs[i]);

  std::vector<double> phi(static_cast<std::size_t>(n_lags) + 1);
  for (int n = 0; n <= n_lags; ++n) {
    const std::int64_t count = L - n;
    const double sum = pairwise_sum_indexed(
        0, count, [&](std::int64_t l) { return obs[static_cast<std::size_t>(l)] *
                                               fv[static_cast<std::size_t>(l + n)]; });
    phi[static_cast<std::size_t>(n)] = sum / static_cast<double>(count);
  }
  return phi;
}

CorrelationEstimate ensemble_corr(const TrajectoryEnsemble& ensemble,
                                  const std::optional<ForceSpec>& force, int n_lags) {
  if (ensemble.members.empty()) throw validation_error("empty trajectory ensemble");
  const std::size_t L = ensemble.members.front().size();
  for (const auto& m : ensemble.members)
    if (m.size() != L) throw validation_error("ensemble members must share their length");
  if (n_lags < 1 || static_cast<std::size_t>(n_lags) >= L)
    throw validation_error("lag count must be in [1, member length)");

  const std::int64_t M = static_cast<std::int64_t>(ensemble.members.size());
  CorrelationEstimate est;
  est.dt_obs = ensemble.dt;
  est.values_h.assign(static_cast<std::size_t>(n_lags), 0.0);
  est.n_terms.assign(static_cast<std::size_t>(n_lags), 0);
  if (force) est.values_phi.emplace(static_cast<std::size_t>(n_lags) + 1, 0.0);

  // Per-member pairwise sums accumulated in member order, so the result is
  // schedule-independent.
  for (int n = 0; n <= n_lags; ++n) {
    if (n == 0 && !force) continue;
    const std::int64_t count = static_cast<std::int64_t>(L) - n;
    double h_total = 0.0, phi_total = 0.0;
    for (const auto& v : ensemble.members) {
      if (n >= 1)
        h_total += pairwise_sum_indexed(0, count, [&](std::int64_t l) {
          return v[static_cast<std::size_t>(l)] * v[static_cast<std::size_t>(l + n)];
        });
      if (force)
        phi_total += pairwise_sum_indexed(0, count, [&](std::int64_t l) {
          return v[static_cast<std::size_t>(l)] * (*force)(v[static_cast<std::size_t>(l + n)]);
        });
    }
    const double denom = static_cast<double>(count) * static_cast<double>(M);
    if (n >= 1) {
      est.values_h[static_cast<std::size_t>(n - 1)] = h_total / denom;
      est.n_terms[static_cast<std::size_t>(n - 1)] = count * M;
    }
    if (force) (*est.values_phi)[static_cast<std::size_t>(n)] = phi_total / denom;
  }
  return est;
}

}  // namespace glekit
