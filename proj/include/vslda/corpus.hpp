#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "vslda/common.hpp"

namespace vslda {

/// Position of one token: document index and offset within that document.
struct TokenRef {
  std::uint32_t doc;
  std::uint32_t pos;
};

/// Immutable bag of documents over a shared vocabulary.
///
/// Construction validates every invariant (ids in range, unique vocabulary,
/// no empty documents) and builds a per-word occurrence index used by the
/// samplers when they move all tokens of one word type at once.
class Corpus {
public:
  Corpus(std::vector<std::string> vocab, std::vector<std::vector<WordId>> documents);

  std::size_t num_words() const { return vocab_.size(); }
  std::size_t num_docs() const { return docs_.size(); }
  std::size_t num_tokens() const { return num_tokens_; }

  const std::vector<std::string>& vocab() const { return vocab_; }
  const std::string& word(WordId id) const { return vocab_.at(id); }
  std::optional<WordId> find(const std::string& word) const;

  const std::vector<std::vector<WordId>>& documents() const { return docs_; }
  const std::vector<WordId>& document(std::size_t d) const { return docs_[d]; }
  std::size_t doc_length(std::size_t d) const { return docs_[d].size(); }

  /// All positions of word `j`, in document-then-position order.
  const std::vector<TokenRef>& occurrences(WordId j) const { return occurrences_[j]; }

  /// New corpus with the given subset of documents over the same vocabulary.
  Corpus subset(const std::vector<std::size_t>& doc_indices) const;

private:
  std::vector<std::string> vocab_;
  std::vector<std::vector<WordId>> docs_;
  std::unordered_map<std::string, WordId> index_;
  std::vector<std::vector<TokenRef>> occurrences_;
  std::size_t num_tokens_ = 0;
};

enum class CorpusFormat { kText, kSparse };

CorpusFormat parse_corpus_format(const std::string& name);

struct LoadOptions {
  /// Words dropped before id assignment (text format only).
  std::unordered_set<std::string> stopwords;
  /// One word per line; names the ids of a sparse file. Optional.
  std::optional<std::filesystem::path> vocab_path;
  /// Map text tokens onto an existing vocabulary; unknown words are skipped.
  const std::vector<std::string>* fixed_vocab = nullptr;
};

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   const LoadOptions& options = {});

/// Reads a whitespace/newline separated word list.
std::unordered_set<std::string> load_word_list(const std::filesystem::path& path);

void save_text(const Corpus& corpus, const std::filesystem::path& path);
/// Writes "D V NNZ" then sorted "doc word count" triplets.
void save_sparse(const Corpus& corpus, const std::filesystem::path& path);
void save_vocab(const Corpus& corpus, const std::filesystem::path& path);

struct WordStats {
  std::vector<std::int64_t> freq;
  std::vector<std::int64_t> df;
  std::vector<double> ctf_idf;  // freq / df; 0 for absent words
  std::vector<double> rdf;      // df / D
};

WordStats compute_word_stats(const Corpus& corpus);

/// ctf-idf for a single (freq, df) pair.
double ctf_idf(std::int64_t freq, std::int64_t df);

void write_word_stats_csv(const Corpus& corpus, const WordStats& stats,
                          const std::filesystem::path& path);

struct CorpusSplit {
  Corpus train;
  Corpus test;
  std::vector<std::size_t> train_docs;
  std::vector<std::size_t> test_docs;
};

/// Shuffles documents under `seed` and cuts at round(train_fraction * D).
CorpusSplit split_corpus(const Corpus& corpus, double train_fraction, std::uint64_t seed);

}  // namespace vslda
