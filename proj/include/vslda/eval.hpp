#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vslda/corpus.hpp"
#include "vslda/model.hpp"

namespace vslda {

struct HeldoutConfig {
  int particles = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

struct HeldoutResult {
  double per_token_loglik = 0.0;
  double total_loglik = 0.0;
  std::size_t num_tokens = 0;
  std::vector<double> doc_loglik;
};

/// Left-to-right particle estimate of log p(W_test | trained model), using
/// the MAP estimates in `summary` and the document-topic prior in `hyper`.
/// Each document is scored independently with its own derived RNG stream.
HeldoutResult left_to_right_loglik(const PosteriorSummary& summary, const HyperParams& hyper,
                                   const Corpus& test, const HeldoutConfig& config);

/// KL(p||q) + KL(q||p) after adding eps to every entry and renormalizing.
double symmetric_kl(const std::vector<double>& p, const std::vector<double>& q, double eps = 1e-10);

/// Minimum-cost perfect matching on a square cost matrix; result[a] = b.
std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost);

struct TopicMatch {
  std::size_t topic_a;
  std::size_t topic_b;
  double skl;
};

struct BestMatch {
  double mean_skl = 0.0;
  double total_skl = 0.0;
  std::vector<std::size_t> matching;  // matching[a] = b
  std::vector<TopicMatch> pairs;
};

BestMatch best_match_divergence(const std::vector<std::vector<double>>& topics_a,
                                const std::vector<std::vector<double>>& topics_b, double eps = 1e-10);

double jaccard(const std::vector<WordId>& set_a, const std::vector<WordId>& set_b);

/// Pairwise consistency across runs: mean best-match SKL of phi_hat and mean
/// Jaccard coefficient of the non-informative word sets.
struct ConsistencyReport {
  double mean_skl = 0.0;
  double mean_jaccard_ni = 0.0;
  struct Pair {
    std::size_t run_a;
    std::size_t run_b;
    BestMatch match;
    double jaccard_ni;
  };
  std::vector<Pair> pairs;
};

ConsistencyReport compare_runs(const std::vector<PosteriorSummary>& runs, double eps = 1e-10);

void write_match_csv(const BestMatch& match, const std::filesystem::path& path);

/// One row per document: "label idx:value ..." with 1-based feature indices
/// running over the concatenated theta_hat columns of every summary.
void export_features(const std::vector<PosteriorSummary>& summaries,
                     const std::optional<std::vector<std::string>>& labels, const std::filesystem::path& path);

struct FeatureRow {
  std::string label;
  std::vector<std::pair<std::size_t, double>> features;
};

std::vector<FeatureRow> read_features(const std::filesystem::path& path);

}  // namespace vslda
