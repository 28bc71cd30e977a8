#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace vslda {

/// log(sum(exp(x))) with a max shift; -inf for an empty or all -inf input.
inline double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double mx = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

/// n * log(p) with 0 * log(0) = 0.
inline double xlogy(double n, double p) { return n == 0.0 ? 0.0 : n * std::log(p); }

}  // namespace vslda
