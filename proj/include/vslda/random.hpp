#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace vslda {

/// Seeded generator for one chain. Distributions are constructed per draw so
/// the engine state alone determines every future draw, which is what makes a
/// checkpoint resume bit-identical.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  std::uint64_t uniform_int(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }
  double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }
  double beta(double a, double b);
  bool bernoulli(double p) { return uniform() < p; }

  /// Index drawn proportionally to non-negative weights summing to `total`.
  std::size_t discrete(std::span<const double> weights, double total);

  std::vector<double> dirichlet(std::span<const double> concentration);
  std::vector<double> dirichlet_symmetric(std::size_t dim, double concentration);

  std::string serialize() const;
  void deserialize(const std::string& state);

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

}  // namespace vslda
