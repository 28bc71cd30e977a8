#include "vslda/baselines.hpp"

#include <numeric>

namespace vslda {

const char* model_name(PriorMode mode) { return mode == PriorMode::kSymmetric ? "symlda" : "asymlda"; }

void configure_lda(ChainConfig& config, HyperParams& hyper, PriorMode mode) {
  config.s_init = SelectionInit::kAllInformative;
  config.sample_selection = false;
  config.sample_lambda_tau = false;
  config.alpha_mode = mode == PriorMode::kSymmetric ? AlphaMode::kSymmetric : AlphaMode::kAsymmetric;
  hyper.lambda = 1.0;
  hyper.tau = 1.0;
  if (mode == PriorMode::kSymmetric && !hyper.alpha.empty()) {
    const double mean = hyper.alpha_sum() / static_cast<double>(hyper.alpha.size());
    std::fill(hyper.alpha.begin(), hyper.alpha.end(), mean);
  }
}

ChainResult run_lda_chain(const Corpus& corpus, ChainConfig config, HyperParams hyper, PriorMode mode,
                          const RunControl& control) {
  configure_lda(config, hyper, mode);
  ChainResult result = continue_chain(corpus, start_chain(corpus, config, hyper, model_name(mode)), control);
  // Pinned values, not posterior means: held-out scoring then reduces to plain LDA.
  result.summary.tau_hat = 1.0;
  result.summary.lambda_hat = 1.0;
  return result;
}

}  // namespace vslda
