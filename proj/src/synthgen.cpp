#include "vslda/synthgen.hpp"

#include <cmath>

#include "vslda/io.hpp"
#include "vslda/random.hpp"

namespace vslda {

std::vector<WordId> SyntheticSpec::topic_words(std::size_t k) const {
  std::vector<WordId> out;
  const std::size_t w = words_per_topic;
  for (std::size_t i = 0; i < w; ++i) {
    std::size_t id = k * w + i;                               // blocks, and grid rows
    if (layout == TopicLayout::kGrid && k >= w) id = i * w + (k - w);  // grid columns
    out.push_back(static_cast<WordId>(id));
  }
  return out;
}

TopicLayout parse_topic_layout(const std::string& name) {
  if (name == "grid") return TopicLayout::kGrid;
  if (name == "blocks") return TopicLayout::kBlocks;
  throw ArgumentError("unknown topic layout '" + name + "' (expected grid or blocks)");
}

const char* layout_name(TopicLayout layout) { return layout == TopicLayout::kGrid ? "grid" : "blocks"; }

void SyntheticSpec::validate() const {
  if (num_topics < 1 || words_per_topic < 1) throw ArgumentError("need at least one topic and one topic word");
  if (layout == TopicLayout::kGrid && num_topics != 2 * words_per_topic) {
    throw ArgumentError("grid layout needs num_topics == 2 * words_per_topic");
  }
  if (std::abs(static_cast<double>(words_per_topic) * topic_word_prob - 1.0) > 1e-9) {
    throw ArgumentError("words_per_topic * topic_word_prob must equal 1");
  }
  if (num_noninformative > 0 && std::abs(static_cast<double>(num_noninformative) * noninf_word_prob - 1.0) > 1e-9) {
    throw ArgumentError("num_noninformative * noninf_word_prob must equal 1");
  }
  if (!(tau > 0.0 && tau <= 1.0)) throw ArgumentError("tau must lie in (0, 1]");
  if (tau < 1.0 && num_noninformative == 0) throw ArgumentError("tau < 1 needs non-informative words");
  if (num_docs < 1) throw ArgumentError("need at least one document");
  if (min_doc_length < 1 || min_doc_length > max_doc_length) throw ArgumentError("invalid document length range");
  if (!(theta_prior > 0.0)) throw ArgumentError("theta prior must be positive");
}

std::pair<Corpus, GroundTruth> generate(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t K = spec.num_topics;
  const std::size_t n_topic_words = spec.num_informative_words();
  std::vector<std::vector<WordId>> topic_words(K);
  for (std::size_t k = 0; k < K; ++k) topic_words[k] = spec.topic_words(k);
  const std::size_t V = spec.vocab_size();

  GroundTruth truth;
  truth.tau = spec.tau;
  truth.seed = spec.seed;
  truth.phi.assign(K, std::vector<double>(V, 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    for (WordId j : topic_words[k]) truth.phi[k][j] = spec.topic_word_prob;
  }
  truth.psi.assign(V, 0.0);
  truth.s.assign(V, 0);
  for (std::size_t j = 0; j < n_topic_words; ++j) truth.s[j] = 1;
  for (std::size_t j = n_topic_words; j < V; ++j) truth.psi[j] = spec.noninf_word_prob;

  std::vector<std::string> vocab;
  vocab.reserve(V);
  for (std::size_t j = 0; j < n_topic_words; ++j) {
    if (spec.layout == TopicLayout::kGrid) {
      vocab.push_back("r" + std::to_string(j / spec.words_per_topic) + "c" + std::to_string(j % spec.words_per_topic));
    } else {
      vocab.push_back("t" + std::to_string(j / spec.words_per_topic) + "w" + std::to_string(j % spec.words_per_topic));
    }
  }
  for (std::size_t i = 0; i < spec.num_noninformative; ++i) vocab.push_back("ni" + std::to_string(i));

  Rng rng(spec.seed);
  std::vector<std::vector<WordId>> docs(spec.num_docs);
  truth.theta.resize(spec.num_docs);
  truth.b.resize(spec.num_docs);
  truth.z.resize(spec.num_docs);
  const std::size_t span = spec.max_doc_length - spec.min_doc_length + 1;
  for (std::size_t d = 0; d < spec.num_docs; ++d) {
    truth.theta[d] = rng.dirichlet_symmetric(K, spec.theta_prior);
    const std::size_t len = spec.min_doc_length + rng.uniform_int(span);
    docs[d].reserve(len);
    truth.b[d].reserve(len);
    truth.z[d].reserve(len);
    for (std::size_t i = 0; i < len; ++i) {
      const bool informative = rng.bernoulli(spec.tau);
      if (informative) {
        const auto k = static_cast<Topic>(rng.discrete(truth.theta[d], 1.0));
        const WordId w = topic_words[static_cast<std::size_t>(k)][rng.uniform_int(spec.words_per_topic)];
        docs[d].push_back(w);
        truth.z[d].push_back(k);
      } else {
        docs[d].push_back(static_cast<WordId>(n_topic_words + rng.uniform_int(spec.num_noninformative)));
        truth.z[d].push_back(kNoTopic);
      }
      truth.b[d].push_back(informative ? 1 : 0);
    }
  }
  return {Corpus(std::move(vocab), std::move(docs)), std::move(truth)};
}

void write_ground_truth(const GroundTruth& truth, const SyntheticSpec& spec, const std::filesystem::path& path) {
  Json s = Json::array();
  for (auto v : truth.s) s.push_back(static_cast<int>(v));
  Json j{{"format", "vslda-ground-truth/1"},
         {"seed", truth.seed},
         {"tau", truth.tau},
         {"true_phi", truth.phi},
         {"true_psi", truth.psi},
         {"true_s", std::move(s)},
         {"true_theta", truth.theta},
         {"true_z", truth.z},
         {"spec",
          {{"layout", layout_name(spec.layout)},
           {"num_topics", spec.num_topics},
           {"words_per_topic", spec.words_per_topic},
           {"topic_word_prob", spec.topic_word_prob},
           {"num_noninformative", spec.num_noninformative},
           {"noninf_word_prob", spec.noninf_word_prob},
           {"num_docs", spec.num_docs},
           {"min_doc_length", spec.min_doc_length},
           {"max_doc_length", spec.max_doc_length},
           {"theta_prior", spec.theta_prior},
           {"tau", spec.tau}}}};
  write_json(j, path);
}

}  // namespace vslda
