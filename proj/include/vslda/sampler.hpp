#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "vslda/corpus.hpp"
#include "vslda/hyperopt.hpp"
#include "vslda/model.hpp"

namespace vslda {

enum class SelectionInit { kAllInformative, kBernoulli };

/// How the s_j = 1 branch is integrated over the topic assignments of word j.
enum class MarginalEstimator {
  /// mean of p(W, z^u, ...) / q(z^u): unbiased for the marginal likelihood.
  kImportanceWeighted,
  /// mean of p(W, z^u, ...) with z^u ~ q, no correction for the draw density.
  kUnweighted,
};

enum class AlphaMode { kAsymmetric, kSymmetric };

struct ChainConfig {
  std::size_t num_topics = 10;
  std::int64_t iterations = 1000;
  std::int64_t burn_in = 500;
  std::int64_t thinning = 10;
  int mc_samples = 20;
  std::uint64_t seed = 0;
  /// 0 disables hyperparameter optimization.
  std::int64_t hyperopt_interval = 50;
  std::int64_t hyperopt_start = 100;
  SelectionInit s_init = SelectionInit::kAllInformative;
  MarginalEstimator estimator = MarginalEstimator::kImportanceWeighted;
  AlphaMode alpha_mode = AlphaMode::kAsymmetric;
  bool optimize_beta = true;
  bool sample_selection = true;
  bool sample_lambda_tau = true;
  FixedPointConfig fixed_point;
  /// Full recount after every sweep; slow, meant for tests.
  bool check_invariants = false;

  void validate() const;
};

struct SweepDiagnostics {
  std::int64_t iteration = 0;
  double log_likelihood = 0.0;
  std::int64_t num_informative = 0;
  double lambda = 0.0;
  double tau = 0.0;
  std::int64_t accepted_flips = 0;

  bool operator==(const SweepDiagnostics&) const = default;
};

ChainState init_chain(const Corpus& corpus, const ChainConfig& config, const HyperParams& hyper);

/// Unnormalized full conditional of one informative token's topic, with the
/// token already removed from the counts. Writes K weights, returns their sum.
double topic_weights(const ChainState& state, const HyperParams& hyper, std::size_t doc, WordId word,
                     std::span<double> out);

void gibbs_sweep_z(const Corpus& corpus, ChainState& state, const HyperParams& hyper);

/// log p(W, z, b, s | alpha, beta, gamma, lambda, tau) with Theta, Phi, psi
/// integrated out. lambda and tau are read from the state.
double joint_log_likelihood(const ChainState& state, const HyperParams& hyper);

struct MarginalEstimate {
  double log_marginal = 0.0;
  /// Topics of word j's tokens (occurrence order) from the last completion.
  std::vector<Topic> last_sample;
};

/// Monte Carlo estimate of the joint likelihood with s_j = 1, integrating over
/// the topics of word j's tokens. Each of the U completions draws the tokens in
/// occurrence order from their Gibbs conditionals given z^{-j} and the tokens
/// drawn before them. The state is restored exactly; only the RNG advances.
MarginalEstimate mc_log_marginal_s1(const Corpus& corpus, ChainState& state, WordId word,
                                    const HyperParams& hyper, int mc_samples,
                                    MarginalEstimator estimator = MarginalEstimator::kImportanceWeighted);

struct FlipOutcome {
  bool proposed = false;  // false when the flip would empty the informative set
  bool accepted = false;
  double log_ratio = 0.0;
  double acceptance_probability = 0.0;
};

/// Metropolis step on s_j with the deterministic flip proposal.
FlipOutcome metropolis_update_s(const Corpus& corpus, ChainState& state, WordId word,
                                const HyperParams& hyper, int mc_samples,
                                MarginalEstimator estimator = MarginalEstimator::kImportanceWeighted);

/// Conjugate Beta draws of lambda and tau given |s| and the token split.
void update_lambda_tau(ChainState& state, const HyperParams& hyper);

/// Majority vote over retained selection vectors; exact ties resolve to 1.
std::vector<std::uint8_t> estimate_s(const std::vector<std::vector<std::uint8_t>>& samples);

/// Re-labels the state onto a different selection vector. Words leaving the
/// informative set give their tokens to the non-informative counts; words
/// entering it receive topics by sequential conditional draws.
void project_selection(const Corpus& corpus, ChainState& state, const HyperParams& hyper,
                       const std::vector<std::uint8_t>& target);

/// Everything needed to continue a chain: written to and read from checkpoints.
struct ChainProgress {
  ChainConfig config;
  HyperParams hyper;
  ChainState state;
  std::vector<RetainedSample> samples;
  std::optional<ChainState> last_retained;
  std::vector<SweepDiagnostics> trace;
  std::string model = "vslda";
};

struct ChainResult {
  PosteriorSummary summary;
  std::vector<SweepDiagnostics> trace;
  HyperParams hyper;
  ChainState final_state;
};

struct RunControl {
  /// Polled once per sweep; when set, a checkpoint is written and
  /// ChainInterrupted is thrown.
  const std::atomic<bool>* stop = nullptr;
  std::optional<std::filesystem::path> checkpoint_path;
  /// Periodic checkpoints every N sweeps when > 0.
  std::int64_t checkpoint_interval = 0;
  /// Stop (with a checkpoint) after this sweep; for tests and staged runs.
  std::optional<std::int64_t> stop_after;
};

class ChainInterrupted : public std::runtime_error {
public:
  explicit ChainInterrupted(std::int64_t at)
      : std::runtime_error("chain interrupted after sweep " + std::to_string(at)), iteration(at) {}
  std::int64_t iteration;
};

ChainProgress start_chain(const Corpus& corpus, const ChainConfig& config, const HyperParams& hyper,
                          std::string model = "vslda");

/// Runs sweeps from progress.state.iteration + 1 through config.iterations.
ChainResult continue_chain(const Corpus& corpus, ChainProgress progress, const RunControl& control = {});

ChainResult run_chain(const Corpus& corpus, const ChainConfig& config, const HyperParams& hyper,
                      const RunControl& control = {});

}  // namespace vslda
