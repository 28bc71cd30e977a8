#pragma once

#include <cstddef>
#include <vector>

#include "vslda/model.hpp"

namespace vslda {

struct FixedPointConfig {
  int max_iters = 100;
  double tolerance = 1e-5;  // relative change
  double floor = 1e-6;

  void validate() const;
};

/// Minka's fixed-point update for an asymmetric Dirichlet concentration.
/// `counts` is D x K; each row is one Dirichlet-multinomial observation.
std::vector<double> optimize_alpha(const CountTable& counts, std::vector<double> alpha,
                                   const FixedPointConfig& config = {});

/// Same update with every component tied to one shared value.
double optimize_alpha_symmetric(const CountTable& counts, double alpha,
                                const FixedPointConfig& config = {});

/// Symmetric concentration over the columns of a K x V' table.
double optimize_beta_symmetric(const CountTable& topic_word, double beta,
                               const FixedPointConfig& config = {});

}  // namespace vslda
