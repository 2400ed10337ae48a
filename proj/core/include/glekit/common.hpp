// Shared error types and small numeric helpers.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace glekit {

using cdouble = std::complex<double>;

// Bad configuration or arguments; the CLI maps this to exit code 2.
struct validation_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numeric failure (divergence, ill-conditioning, non-convergence);
// the CLI maps this to exit code 3.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Pairwise (tree) summation with a fixed block decomposition, so the
// result does not depend on accumulation chunking. Terms are produced
// by index; no intermediate buffer is needed.
template <typename Fn>
double pairwise_sum_indexed(std::int64_t begin, std::int64_t end, Fn&& term) {
  const std::int64_t n = end - begin;
  if (n <= 0) return 0.0;
  if (n <= 64) {
    double s = 0.0;
    for (std::int64_t i = begin; i < end; ++i) s += term(i);
    return s;
  }
  const std::int64_t mid = begin + n / 2;
  return pairwise_sum_indexed(begin, mid, term) + pairwise_sum_indexed(mid, end, term);
}

inline double pairwise_sum(std::span<const double> x) {
  return pairwise_sum_indexed(0, static_cast<std::int64_t>(x.size()),
                              [&](std::int64_t i) { return x[i]; });
}

// Runs fn(i) for i in [0, n) on up to `threads` worker threads.
// Work items must be independent; exceptions are rethrown on the caller.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn,
                  unsigned threads = 0);

inline bool nearly_equal(double a, double b, double rel_tol) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= rel_tol * std::max(scale, 1e-300);
}

// exp(z) - 1 with small-|z| series; std::expm1 has no complex overload.
inline cdouble expm1c(cdouble z) {
  if (std::abs(z) > 1e-3) return std::exp(z) - 1.0;
  cdouble sum = z, term = z;
  for (int k = 2; k <= 8; ++k) {
    term *= z / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace glekit
