#include "vslda/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "vslda/random.hpp"

namespace vslda {

namespace fs = std::filesystem;

Corpus::Corpus(std::vector<std::string> vocab, std::vector<std::vector<WordId>> documents)
    : vocab_(std::move(vocab)), docs_(std::move(documents)) {
  if (vocab_.empty()) throw ArgumentError("corpus vocabulary is empty");
  if (docs_.empty()) throw ArgumentError("corpus has no documents");
  index_.reserve(vocab_.size());
  for (std::size_t j = 0; j < vocab_.size(); ++j) {
    if (!index_.emplace(vocab_[j], static_cast<WordId>(j)).second) {
      throw ArgumentError("duplicate vocabulary entry '" + vocab_[j] + "'");
    }
  }
  occurrences_.resize(vocab_.size());
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    if (docs_[d].empty()) throw ArgumentError("document " + std::to_string(d) + " is empty");
    for (std::size_t i = 0; i < docs_[d].size(); ++i) {
      const WordId w = docs_[d][i];
      if (w >= vocab_.size()) {
        throw ArgumentError("document " + std::to_string(d) + " has out-of-range word id " +
                            std::to_string(w));
      }
      occurrences_[w].push_back({static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(i)});
    }
    num_tokens_ += docs_[d].size();
  }
}

std::optional<WordId> Corpus::find(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Corpus Corpus::subset(const std::vector<std::size_t>& doc_indices) const {
  std::vector<std::vector<WordId>> docs;
  docs.reserve(doc_indices.size());
  for (std::size_t d : doc_indices) docs.push_back(docs_.at(d));
  return Corpus(vocab_, std::move(docs));
}

CorpusFormat parse_corpus_format(const std::string& name) {
  if (name == "text") return CorpusFormat::kText;
  if (name == "sparse") return CorpusFormat::kSparse;
  throw ArgumentError("unknown corpus format '" + name + "' (expected text or sparse)");
}

namespace {

std::string fold_case(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

std::vector<std::string> read_vocab_file(const fs::path& path) {
  auto in = open_input(path);
  std::vector<std::string> vocab;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string w;
    if (ls >> w) vocab.push_back(w);
  }
  return vocab;
}

Corpus load_text(const fs::path& path, const LoadOptions& options) {
  auto in = open_input(path);
  std::vector<std::string> vocab;
  std::unordered_map<std::string, WordId> ids;
  if (options.fixed_vocab != nullptr) {
    vocab = *options.fixed_vocab;
    for (std::size_t j = 0; j < vocab.size(); ++j) ids.emplace(vocab[j], static_cast<WordId>(j));
  }
  std::vector<std::vector<WordId>> docs;
  std::string line;
  std::size_t line_no = 0;
  std::size_t skipped = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<WordId> doc;
    std::string tok;
    while (ls >> tok) {
      tok = fold_case(std::move(tok));
      if (options.stopwords.contains(tok)) continue;
      auto it = ids.find(tok);
      if (it == ids.end()) {
        if (options.fixed_vocab != nullptr) {
          ++skipped;
          continue;
        }
        it = ids.emplace(tok, static_cast<WordId>(vocab.size())).first;
        vocab.push_back(tok);
      }
      doc.push_back(it->second);
    }
    if (doc.empty()) {
      throw ParseError("document " + std::to_string(docs.size()) + " (line " +
                       std::to_string(line_no) + ") is empty");
    }
    docs.push_back(std::move(doc));
  }
  if (skipped > 0) {
    log::warning("skipped " + std::to_string(skipped) + " tokens not in the fixed vocabulary");
  }
  if (docs.empty()) throw ParseError("'" + path.string() + "' contains no documents");
  return Corpus(std::move(vocab), std::move(docs));
}

Corpus load_sparse(const fs::path& path, const LoadOptions& options) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  auto next_content_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++line_no;
      if (out.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_content_line(line)) throw ParseError("line 1: missing 'D V NNZ' header");
  long long num_docs = 0, num_words = 0, nnz = 0;
  {
    std::istringstream hs(line);
    if (!(hs >> num_docs >> num_words >> nnz) || num_docs < 1 || num_words < 1 || nnz < 0) {
      throw ParseError("line " + std::to_string(line_no) + ": malformed header, expected 'D V NNZ'");
    }
  }
  std::vector<std::vector<WordId>> docs(static_cast<std::size_t>(num_docs));
  long long seen = 0;
  while (next_content_line(line)) {
    std::istringstream ls(line);
    long long d = 0, w = 0, c = 0;
    std::string extra;
    if (!(ls >> d >> w >> c) || (ls >> extra)) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 'doc word count'");
    }
    if (d < 0 || d >= num_docs || w < 0 || w >= num_words || c < 1) {
      throw ParseError("line " + std::to_string(line_no) + ": id or count out of range");
    }
    docs[static_cast<std::size_t>(d)].insert(docs[static_cast<std::size_t>(d)].end(),
                                             static_cast<std::size_t>(c), static_cast<WordId>(w));
    ++seen;
  }
  if (seen != nnz) {
    throw ParseError("header declares " + std::to_string(nnz) + " entries but file has " +
                     std::to_string(seen));
  }
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (docs[d].empty()) throw ParseError("document " + std::to_string(d) + " is empty");
  }
  std::vector<std::string> vocab;
  if (options.vocab_path) {
    vocab = read_vocab_file(*options.vocab_path);
    if (vocab.size() != static_cast<std::size_t>(num_words)) {
      throw ParseError("vocabulary file has " + std::to_string(vocab.size()) +
                       " words but header declares V=" + std::to_string(num_words));
    }
  } else if (options.fixed_vocab != nullptr && options.fixed_vocab->size() == static_cast<std::size_t>(num_words)) {
    vocab = *options.fixed_vocab;
  } else {
    vocab.reserve(static_cast<std::size_t>(num_words));
    for (long long j = 0; j < num_words; ++j) vocab.push_back("w" + std::to_string(j));
  }
  return Corpus(std::move(vocab), std::move(docs));
}

}  // namespace

Corpus load_corpus(const fs::path& path, CorpusFormat format, const LoadOptions& options) {
  switch (format) {
    case CorpusFormat::kText:
      return load_text(path, options);
    case CorpusFormat::kSparse:
      return load_sparse(path, options);
  }
  throw ArgumentError("unknown corpus format");
}

std::unordered_set<std::string> load_word_list(const fs::path& path) {
  auto in = open_input(path);
  std::unordered_set<std::string> words;
  std::string w;
  while (in >> w) words.insert(fold_case(w));
  return words;
}

void save_text(const Corpus& corpus, const fs::path& path) {
  auto out = open_output(path);
  for (const auto& doc : corpus.documents()) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (i > 0) out << ' ';
      out << corpus.word(doc[i]);
    }
    out << '\n';
  }
}

void save_sparse(const Corpus& corpus, const fs::path& path) {
  std::vector<std::map<WordId, std::int64_t>> counts(corpus.num_docs());
  std::size_t nnz = 0;
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    for (WordId w : corpus.document(d)) ++counts[d][w];
    nnz += counts[d].size();
  }
  auto out = open_output(path);
  out << corpus.num_docs() << ' ' << corpus.num_words() << ' ' << nnz << '\n';
  for (std::size_t d = 0; d < counts.size(); ++d) {
    for (const auto& [w, c] : counts[d]) out << d << ' ' << w << ' ' << c << '\n';
  }
}

void save_vocab(const Corpus& corpus, const fs::path& path) {
  auto out = open_output(path);
  for (const auto& w : corpus.vocab()) out << w << '\n';
}

double ctf_idf(std::int64_t freq, std::int64_t df) {
  return df > 0 ? static_cast<double>(freq) / static_cast<double>(df) : 0.0;
}

WordStats compute_word_stats(const Corpus& corpus) {
  const std::size_t V = corpus.num_words();
  WordStats stats;
  stats.freq.assign(V, 0);
  stats.df.assign(V, 0);
  stats.ctf_idf.assign(V, 0.0);
  stats.rdf.assign(V, 0.0);
  for (WordId j = 0; j < V; ++j) {
    const auto& occ = corpus.occurrences(j);
    stats.freq[j] = static_cast<std::int64_t>(occ.size());
    // Occurrences are in document order, so distinct docs are runs.
    std::int64_t df = 0;
    std::int64_t last = -1;
    for (const TokenRef& t : occ) {
      if (static_cast<std::int64_t>(t.doc) != last) {
        ++df;
        last = t.doc;
      }
    }
    stats.df[j] = df;
    stats.ctf_idf[j] = ctf_idf(stats.freq[j], df);
    stats.rdf[j] = static_cast<double>(df) / static_cast<double>(corpus.num_docs());
  }
  return stats;
}

void write_word_stats_csv(const Corpus& corpus, const WordStats& stats, const fs::path& path) {
  auto out = open_output(path);
  out << "word,freq,df,ctf_idf,rdf\n";
  char buf[64];
  for (std::size_t j = 0; j < corpus.num_words(); ++j) {
    out << corpus.word(static_cast<WordId>(j)) << ',' << stats.freq[j] << ',' << stats.df[j] << ',';
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f", stats.ctf_idf[j], stats.rdf[j]);
    out << buf << '\n';
  }
}

CorpusSplit split_corpus(const Corpus& corpus, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ArgumentError("train fraction must lie in (0, 1)");
  }
  const std::size_t D = corpus.num_docs();
  std::vector<std::size_t> order(D);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  // Fisher-Yates with our own draws; std::shuffle is not portable across libraries.
  for (std::size_t i = D; i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_int(i)]);
  }
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(D)));
  if (n_train == 0 || n_train >= D) {
    throw ArgumentError("split leaves one side empty (D=" + std::to_string(D) + ")");
  }
  // The larger side takes the front of the shuffled order, so splits at f and
  // 1 - f under one seed are complementary.
  const bool train_first = 2 * n_train >= D;
  const std::size_t cut = train_first ? n_train : D - n_train;
  std::vector<std::size_t> front(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  std::vector<std::size_t> back(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  std::vector<std::size_t> train = train_first ? std::move(front) : std::move(back);
  std::vector<std::size_t> test = train_first ? std::move(back) : std::move(front);
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  Corpus tr = corpus.subset(train);
  Corpus te = corpus.subset(test);
  return CorpusSplit{std::move(tr), std::move(te), std::move(train), std::move(test)};
}

}  // namespace vslda
