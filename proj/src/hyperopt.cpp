#include "vslda/hyperopt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/math/special_functions/digamma.hpp>

namespace vslda {

namespace {

using boost::math::digamma;

// Histogram of positive counts: value -> number of cells holding it.
using Histogram = std::map<std::int64_t, std::int64_t>;

double digamma_sum(const Histogram& hist, double x) {
  const double base = digamma(x);
  double acc = 0.0;
  for (const auto& [value, cells] : hist) {
    acc += static_cast<double>(cells) * (digamma(static_cast<double>(value) + x) - base);
  }
  return acc;
}

bool relative_change_below(const std::vector<double>& prev, const std::vector<double>& next, double tol) {
  for (std::size_t i = 0; i < prev.size(); ++i) {
    if (std::abs(next[i] - prev[i]) > tol * std::abs(prev[i])) return false;
  }
  return true;
}

// Shared scalar iteration: rows are observations over `categories` columns.
double optimize_symmetric(const CountTable& counts, double value, const FixedPointConfig& config) {
  config.validate();
  Histogram cells;
  Histogram totals;
  const std::size_t categories = counts.cols();
  for (std::size_t r = 0; r < counts.rows(); ++r) {
    std::int64_t total = 0;
    for (std::size_t c = 0; c < categories; ++c) {
      const std::int64_t n = counts(r, c);
      if (n > 0) ++cells[n];
      total += n;
    }
    if (total > 0) ++totals[total];
  }
  if (cells.empty() || categories == 0) return value;

  const auto dim = static_cast<double>(categories);
  for (int it = 0; it < config.max_iters; ++it) {
    const double num = digamma_sum(cells, value);
    const double den = dim * digamma_sum(totals, dim * value);
    double next = value * num / den;
    if (!std::isfinite(next) || den <= 0.0) {
      log::warning("symmetric fixed-point update is not finite; keeping previous value");
      return value;
    }
    next = std::max(next, config.floor);
    const bool done = std::abs(next - value) <= config.tolerance * value;
    value = next;
    if (done) break;
  }
  return value;
}

}  // namespace

void FixedPointConfig::validate() const {
  if (max_iters < 1) throw ArgumentError("fixed-point max_iters must be >= 1");
  if (!(tolerance > 0.0)) throw ArgumentError("fixed-point tolerance must be positive");
  if (!(floor > 0.0)) throw ArgumentError("fixed-point floor must be positive");
}

std::vector<double> optimize_alpha(const CountTable& counts, std::vector<double> alpha,
                                   const FixedPointConfig& config) {
  config.validate();
  const std::size_t K = counts.cols();
  if (alpha.size() != K) throw ArgumentError("alpha length does not match the topic count");

  std::vector<Histogram> per_topic(K);
  Histogram totals;
  for (std::size_t d = 0; d < counts.rows(); ++d) {
    std::int64_t total = 0;
    for (std::size_t k = 0; k < K; ++k) {
      const std::int64_t n = counts(d, k);
      if (n > 0) ++per_topic[k][n];
      total += n;
    }
    if (total > 0) ++totals[total];
  }
  if (totals.empty()) return alpha;

  std::vector<double> next(K);
  for (int it = 0; it < config.max_iters; ++it) {
    const double alpha0 = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    const double den = digamma_sum(totals, alpha0);
    bool finite = den > 0.0 && std::isfinite(den);
    for (std::size_t k = 0; k < K && finite; ++k) {
      next[k] = alpha[k] * digamma_sum(per_topic[k], alpha[k]) / den;
      finite = std::isfinite(next[k]);
      next[k] = std::max(next[k], config.floor);
    }
    if (!finite) {
      log::warning("alpha fixed-point update is not finite; keeping previous alpha");
      return alpha;
    }
    const bool done = relative_change_below(alpha, next, config.tolerance);
    alpha.swap(next);
    if (done) break;
  }
  return alpha;
}

double optimize_alpha_symmetric(const CountTable& counts, double alpha, const FixedPointConfig& config) {
  return optimize_symmetric(counts, alpha, config);
}

double optimize_beta_symmetric(const CountTable& topic_word, double beta, const FixedPointConfig& config) {
  return optimize_symmetric(topic_word, beta, config);
}

}  // namespace vslda
