#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>

namespace lmcf {

/// Caps the number of worker threads used by grid sweeps. 0 selects the
/// hardware concurrency. Results never depend on this value.
void set_worker_count(unsigned workers);
unsigned worker_count();

/// Runs body(begin, end) over disjoint chunks of [0, count). Chunks are
/// executed concurrently when more than one worker is configured and the
/// range is large enough to amortize thread start-up.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& body);

/// Pairwise summation with a fixed split order (bit-reproducible).
double pairwise_sum(std::span<const double> values);

inline double mean(std::span<const double> values) {
  return values.empty() ? 0.0
                        : pairwise_sum(values) / static_cast<double>(values.size());
}

/// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace lmcf
