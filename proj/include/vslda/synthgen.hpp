#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "vslda/corpus.hpp"

namespace vslda {

/// How the topics share the informative words.
enum class TopicLayout {
  /// words_per_topic x words_per_topic grid of informative words; topics are
  /// its rows, then its columns (needs num_topics == 2 * words_per_topic).
  kGrid,
  /// topic k owns the disjoint block [k * words_per_topic, (k + 1) * words_per_topic).
  kBlocks,
};

/// Synthetic corpus with known topics. Informative words come first in the
/// vocabulary, followed by the non-informative words. Defaults give 10 topics
/// of 5 words over a 5 x 5 grid (25 informative words) plus 10 NI words.
struct SyntheticSpec {
  TopicLayout layout = TopicLayout::kGrid;
  std::size_t num_topics = 10;
  std::size_t words_per_topic = 5;
  double topic_word_prob = 0.2;
  std::size_t num_noninformative = 10;
  double noninf_word_prob = 0.1;
  std::size_t num_docs = 200;
  std::size_t min_doc_length = 40;
  std::size_t max_doc_length = 50;
  double theta_prior = 0.1;
  double tau = 0.6;
  std::uint64_t seed = 0;

  std::size_t num_informative_words() const {
    return layout == TopicLayout::kGrid ? words_per_topic * words_per_topic : num_topics * words_per_topic;
  }
  std::size_t vocab_size() const { return num_informative_words() + num_noninformative; }
  /// Word ids of topic k.
  std::vector<WordId> topic_words(std::size_t k) const;
  void validate() const;
};

TopicLayout parse_topic_layout(const std::string& name);
const char* layout_name(TopicLayout layout);

struct GroundTruth {
  std::vector<std::vector<double>> phi;    // K x V
  std::vector<double> psi;                 // V
  std::vector<std::uint8_t> s;             // V
  std::vector<std::vector<double>> theta;  // D x K
  std::vector<std::vector<std::uint8_t>> b;
  std::vector<std::vector<Topic>> z;       // kNoTopic where b == 0
  double tau = 0.0;
  std::uint64_t seed = 0;
};

std::pair<Corpus, GroundTruth> generate(const SyntheticSpec& spec);

void write_ground_truth(const GroundTruth& truth, const SyntheticSpec& spec, const std::filesystem::path& path);

}  // namespace vslda
