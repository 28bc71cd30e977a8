#include "vslda/random.hpp"

#include <numeric>
#include <sstream>

#include "vslda/common.hpp"

namespace vslda {

double Rng::beta(double a, double b) {
  const double x = gamma(a);
  const double y = gamma(b);
  if (x + y <= 0.0) return a / (a + b);
  return x / (x + y);
}

std::size_t Rng::discrete(std::span<const double> weights, double total) {
  const double u = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  // Rounding left u at the very top of the range.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return weights.size() - 1;
}

std::vector<double> Rng::dirichlet(std::span<const double> concentration) {
  std::vector<double> out(concentration.size());
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = gamma(concentration[i]);
    total += out[i];
  }
  if (total <= 0.0) {
    // Every component underflowed; fall back to a one-hot draw weighted by the prior.
    const double csum = std::accumulate(concentration.begin(), concentration.end(), 0.0);
    std::fill(out.begin(), out.end(), 0.0);
    out[discrete(concentration, csum)] = 1.0;
    return out;
  }
  for (double& v : out) v /= total;
  return out;
}

std::vector<double> Rng::dirichlet_symmetric(std::size_t dim, double concentration) {
  const std::vector<double> c(dim, concentration);
  return dirichlet(c);
}

std::string Rng::serialize() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void Rng::deserialize(const std::string& state) {
  std::istringstream is(state);
  is >> engine_;
  if (!is) throw ParseError("invalid RNG state string");
}

}  // namespace vslda
