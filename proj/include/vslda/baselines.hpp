#pragma once

#include "vslda/sampler.hpp"

namespace vslda {

enum class PriorMode { kSymmetric, kAsymmetric };

/// Collapsed-Gibbs LDA run through the vsLDA chain machinery with every word
/// informative, no selection moves and lambda = tau = 1. The symmetric mode
/// ties alpha to one shared value during optimization.
ChainResult run_lda_chain(const Corpus& corpus, ChainConfig config, HyperParams hyper, PriorMode mode,
                          const RunControl& control = {});

/// Config and hyperparameters as run_lda_chain adjusts them; exposed so a
/// baseline chain can be started, checkpointed and resumed like any other.
void configure_lda(ChainConfig& config, HyperParams& hyper, PriorMode mode);

const char* model_name(PriorMode mode);

}  // namespace vslda
