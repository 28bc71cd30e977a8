#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vslda/common.hpp"
#include "vslda/corpus.hpp"
#include "vslda/random.hpp"

namespace vslda {

struct BetaPrior {
  double a = 1.0;
  double b = 1.0;
};

struct HyperParams {
  std::vector<double> alpha;  // per-topic Dirichlet prior on theta_d
  double beta = 0.1;          // symmetric prior over informative topic-word rows
  double gamma = 1.0;         // symmetric prior over the non-informative distribution
  double lambda = 0.5;        // P(s_j = 1)
  double tau = 0.5;           // P(b_di = 1)
  BetaPrior lambda_prior;
  BetaPrior tau_prior;

  std::size_t num_topics() const { return alpha.size(); }
  double alpha_sum() const;

  static HyperParams symmetric(std::size_t K, double alpha, double beta);
  /// Throws ArgumentError unless every value is in its domain.
  void validate() const;
};

/// Row-major dense count table.
class CountTable {
public:
  CountTable() = default;
  CountTable(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

  std::int32_t& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  std::int32_t operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::int32_t* row(std::size_t r) { return data_.data() + r * cols_; }
  const std::int32_t* row(std::size_t r) const { return data_.data() + r * cols_; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<std::int32_t>& data() const { return data_; }
  std::vector<std::int32_t>& data() { return data_; }

  bool operator==(const CountTable&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::int32_t> data_;
};

/// Sampler state for one chain: selection vector, topic assignments and every
/// sufficient statistic of the collapsed likelihood. b is implied by s.
struct ChainState {
  std::vector<std::uint8_t> s;          // V
  std::vector<std::vector<Topic>> z;    // per token; kNoTopic when s[w] == 0
  CountTable doc_topic;                 // D x K
  CountTable word_topic;                // V x K (n_kj stored word-major)
  std::vector<std::int64_t> topic_totals;     // n_k
  std::vector<std::int64_t> doc_informative;  // sum_k n_dk
  std::vector<std::int64_t> noninf_counts;    // m_j
  std::int64_t noninf_total = 0;              // m
  std::int64_t informative_total = 0;         // n
  std::int64_t num_informative_words = 0;     // |s|
  double lambda = 0.5;
  double tau = 0.5;
  std::int64_t iteration = 0;
  Rng rng;

  std::size_t num_topics() const { return topic_totals.size(); }
  std::size_t num_words() const { return s.size(); }
  std::size_t num_docs() const { return z.size(); }

  std::int32_t n_kj(std::size_t k, WordId j) const { return word_topic(j, k); }

  /// Rebuilds every count table from (s, z).
  void recount(const Corpus& corpus);

  /// Throws std::logic_error naming the first violated count invariant.
  /// Compares the incremental tables against a full recount.
  void check_invariants(const Corpus& corpus) const;

  bool operator==(const ChainState& other) const;
};

/// Empty-table state with the given assignments; counts rebuilt from them.
ChainState make_state(const Corpus& corpus, std::size_t K, std::vector<std::uint8_t> s,
                      std::vector<std::vector<Topic>> z, double lambda, double tau, std::uint64_t seed);

struct RetainedSample {
  std::int64_t iteration = 0;
  std::vector<std::uint8_t> s;
  CountTable word_topic;  // V x K snapshot
  std::vector<std::int64_t> noninf_counts;
};

struct PosteriorSummary {
  std::vector<std::vector<double>> phi_hat;    // K x V
  std::vector<double> psi_hat;                 // V
  std::vector<std::vector<double>> theta_hat;  // D x K
  std::vector<std::uint8_t> s_hat;
  double tau_hat = 0.0;
  double lambda_hat = 0.0;
  std::int64_t noninf_total = 0;  // m at the summarized state
  HyperParams hyper;
  std::vector<RetainedSample> thinned_samples;
  std::vector<std::string> vocab;
  std::string model = "vslda";
  std::uint64_t seed = 0;

  std::size_t num_topics() const { return phi_hat.size(); }
  std::size_t num_words() const { return psi_hat.size(); }
  std::size_t num_informative() const;
  /// Word ids with s_hat == 0.
  std::vector<WordId> noninformative_set() const;
};

/// Smoothed-count MAP estimates of Phi, psi, Theta, tau and lambda.
///
/// phi_k is supported on {j : s_j = 1}, psi on the complement. With every word
/// informative psi_hat is all zero and a warning is logged; an empty
/// informative set throws DegeneratePartitionError.
PosteriorSummary map_estimates(const ChainState& state, const HyperParams& hyper);

}  // namespace vslda
