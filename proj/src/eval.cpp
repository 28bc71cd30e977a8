#include "vslda/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "vslda/random.hpp"

namespace vslda {

namespace fs = std::filesystem;

void HeldoutConfig::validate() const {
  if (particles < 1) throw ArgumentError("particle count R must be >= 1");
}

namespace {

std::uint64_t document_seed(std::uint64_t seed, std::size_t doc) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(doc), static_cast<std::uint32_t>(std::uint64_t{doc} >> 32)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (std::uint64_t{words[0]} << 32) | words[1];
}

struct Particle {
  std::vector<Topic> z;  // per informative position of the document prefix
  std::vector<std::size_t> positions;
  std::vector<std::int32_t> counts;
  std::int64_t total = 0;
};

double document_loglik(const PosteriorSummary& summary, const HyperParams& hyper, const std::vector<WordId>& doc,
                       int R, Rng& rng, double unseen_mass) {
  const std::size_t K = summary.num_topics();
  const double alpha_sum = hyper.alpha_sum();
  const double tau = summary.tau_hat;
  std::vector<Particle> particles(static_cast<std::size_t>(R));
  for (auto& p : particles) p.counts.assign(K, 0);
  std::vector<double> weights(K);

  auto fill_weights = [&](const Particle& p, WordId w) {
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      weights[k] = (p.counts[k] + hyper.alpha[k]) * summary.phi_hat[k][w];
      total += weights[k];
    }
    return total;
  };

  double ll = 0.0;
  for (std::size_t n = 0; n < doc.size(); ++n) {
    const WordId w = doc[n];
    if (!summary.s_hat[w]) {
      double mass = summary.psi_hat[w];
      if (mass <= 0.0) mass = unseen_mass;
      ll += std::log((1.0 - tau) * mass);
      continue;
    }
    double prob = 0.0;
    for (auto& p : particles) {
      for (std::size_t i = 0; i < p.z.size(); ++i) {
        const WordId wi = doc[p.positions[i]];
        --p.counts[p.z[i]];
        --p.total;
        const double total = fill_weights(p, wi);
        p.z[i] = static_cast<Topic>(rng.discrete(weights, total));
        ++p.counts[p.z[i]];
        ++p.total;
      }
      const double total = fill_weights(p, w);
      prob += tau * total / (static_cast<double>(p.total) + alpha_sum);
      const auto k = static_cast<Topic>(rng.discrete(weights, total));
      p.z.push_back(k);
      p.positions.push_back(n);
      ++p.counts[k];
      ++p.total;
    }
    ll += std::log(prob / static_cast<double>(R));
  }
  return ll;
}

}  // namespace

HeldoutResult left_to_right_loglik(const PosteriorSummary& summary, const HyperParams& hyper, const Corpus& test,
                                   const HeldoutConfig& config) {
  config.validate();
  if (test.num_words() != summary.num_words()) {
    throw ArgumentError("test corpus vocabulary size " + std::to_string(test.num_words()) +
                        " differs from the model's " + std::to_string(summary.num_words()));
  }
  if (hyper.num_topics() != summary.num_topics()) throw ArgumentError("alpha length does not match K");
  const std::size_t n_inf = summary.num_informative();
  const std::size_t n_ni = summary.num_words() - n_inf;
  const double unseen_mass =
      n_ni > 0 ? hyper.gamma / (static_cast<double>(summary.noninf_total) + hyper.gamma * static_cast<double>(n_ni))
               : 0.0;
  std::size_t fallback = 0;
  for (const auto& doc : test.documents()) {
    for (WordId w : doc) {
      if (!summary.s_hat[w] && summary.psi_hat[w] <= 0.0) ++fallback;
    }
  }
  if (fallback > 0) {
    log::warning(std::to_string(fallback) + " test tokens have zero psi_hat mass; scored with the smoothing mass");
  }

  HeldoutResult out;
  out.doc_loglik.resize(test.num_docs());
  for (std::size_t d = 0; d < test.num_docs(); ++d) {
    Rng rng(document_seed(config.seed, d));
    out.doc_loglik[d] = document_loglik(summary, hyper, test.document(d), config.particles, rng, unseen_mass);
  }
  // Fixed-order reduction keeps the total independent of evaluation order.
  for (double v : out.doc_loglik) out.total_loglik += v;
  out.num_tokens = test.num_tokens();
  out.per_token_loglik = out.total_loglik / static_cast<double>(out.num_tokens);
  return out;
}

double symmetric_kl(const std::vector<double>& p, const std::vector<double>& q, double eps) {
  if (p.size() != q.size()) throw ArgumentError("distributions differ in length");
  const double pz = std::accumulate(p.begin(), p.end(), 0.0) + eps * static_cast<double>(p.size());
  const double qz = std::accumulate(q.begin(), q.end(), 0.0) + eps * static_cast<double>(q.size());
  double out = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = (p[i] + eps) / pz;
    const double b = (q[i] + eps) / qz;
    out += (a - b) * (std::log(a) - std::log(b));
  }
  return out;
}

std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  for (const auto& row : cost) {
    if (row.size() != n) throw ArgumentError("Hungarian cost matrix must be square");
  }
  if (n == 0) return {};
  // Shortest augmenting paths with row/column potentials; 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match_col(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match_col[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match_col[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match_col[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match_col[j0] = match_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[match_col[j] - 1] = j - 1;
  return assignment;
}

BestMatch best_match_divergence(const std::vector<std::vector<double>>& topics_a,
                                const std::vector<std::vector<double>>& topics_b, double eps) {
  if (topics_a.size() != topics_b.size()) {
    throw ArgumentError("topic sets differ in size: " + std::to_string(topics_a.size()) + " vs " +
                        std::to_string(topics_b.size()));
  }
  const std::size_t K = topics_a.size();
  std::vector<std::vector<double>> cost(K, std::vector<double>(K));
  for (std::size_t a = 0; a < K; ++a) {
    for (std::size_t b = 0; b < K; ++b) cost[a][b] = symmetric_kl(topics_a[a], topics_b[b], eps);
  }
  BestMatch out;
  out.matching = hungarian(cost);
  for (std::size_t a = 0; a < K; ++a) {
    const double c = cost[a][out.matching[a]];
    out.pairs.push_back({a, out.matching[a], c});
    out.total_skl += c;
  }
  out.mean_skl = K > 0 ? out.total_skl / static_cast<double>(K) : 0.0;
  return out;
}

double jaccard(const std::vector<WordId>& set_a, const std::vector<WordId>& set_b) {
  std::vector<WordId> a(set_a), b(set_b);
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  if (a.empty() && b.empty()) return 1.0;
  std::vector<WordId> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  const std::size_t uni = a.size() + b.size() - common.size();
  return static_cast<double>(common.size()) / static_cast<double>(uni);
}

ConsistencyReport compare_runs(const std::vector<PosteriorSummary>& runs, double eps) {
  if (runs.size() < 2) throw ArgumentError("consistency needs at least two runs");
  ConsistencyReport out;
  for (std::size_t a = 0; a < runs.size(); ++a) {
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      ConsistencyReport::Pair pair{a, b, best_match_divergence(runs[a].phi_hat, runs[b].phi_hat, eps),
                                   jaccard(runs[a].noninformative_set(), runs[b].noninformative_set())};
      out.mean_skl += pair.match.mean_skl;
      out.mean_jaccard_ni += pair.jaccard_ni;
      out.pairs.push_back(std::move(pair));
    }
  }
  out.mean_skl /= static_cast<double>(out.pairs.size());
  out.mean_jaccard_ni /= static_cast<double>(out.pairs.size());
  return out;
}

void write_match_csv(const BestMatch& match, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "run_a_topic,run_b_topic,skl\n";
  char buf[96];
  for (const auto& p : match.pairs) {
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%.10g\n", p.topic_a, p.topic_b, p.skl);
    out << buf;
  }
}

void export_features(const std::vector<PosteriorSummary>& summaries,
                     const std::optional<std::vector<std::string>>& labels, const fs::path& path) {
  if (summaries.empty()) throw ArgumentError("no summaries to export");
  const std::size_t D = summaries.front().theta_hat.size();
  for (const auto& s : summaries) {
    if (s.theta_hat.size() != D) throw ArgumentError("summaries cover different document counts");
  }
  if (labels && labels->size() != D) {
    throw ArgumentError("got " + std::to_string(labels->size()) + " labels for " + std::to_string(D) + " documents");
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  char buf[64];
  for (std::size_t d = 0; d < D; ++d) {
    out << (labels ? (*labels)[d] : std::string("0"));
    std::size_t offset = 0;
    for (const auto& s : summaries) {
      const auto& row = s.theta_hat[d];
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (row[k] == 0.0) continue;
        std::snprintf(buf, sizeof(buf), " %zu:%.9g", offset + k + 1, row[k]);
        out << buf;
      }
      offset += row.size();
    }
    out << '\n';
  }
}

std::vector<FeatureRow> read_features(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::vector<FeatureRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    FeatureRow row;
    if (!(ls >> row.label)) continue;
    std::string item;
    while (ls >> item) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ParseError("line " + std::to_string(line_no) + ": expected idx:value");
      try {
        row.features.emplace_back(std::stoul(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": malformed feature '" + item + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace vslda
