// Test helper: order-insensitive comparison of Prony mode sets.
#pragma once

#include <limits>
#include <span>
#include <vector>

#include "glekit/common.hpp"

namespace glekit::testing {

// Greedy nearest-rate matching between two mode sets; returns the largest
// deviation over matched rates and their weights, or infinity on a size
// mismatch. Robust against conjugate-pair ordering ties.
inline double max_mode_deviation(std::span<const cdouble> rates_a,
                                 std::span<const cdouble> weights_a,
                                 std::span<const cdouble> rates_b,
                                 std::span<const cdouble> weights_b) {
  if (rates_a.size() != rates_b.size()) return std::numeric_limits<double>::infinity();
  std::vector<bool> used(rates_b.size(), false);
  double worst = 0.0;
  for (std::size_t i = 0; i < rates_a.size(); ++i) {
    std::size_t best = rates_b.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < rates_b.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(rates_a[i] - rates_b[j]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    used[best] = true;
    worst = std::max(worst, best_d);
    worst = std::max(worst, std::abs(weights_a[i] - weights_b[best]));
  }
  return worst;
}

}  // namespace glekit::testing
