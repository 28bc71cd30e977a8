#include "vslda/model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace vslda {

double HyperParams::alpha_sum() const { return std::accumulate(alpha.begin(), alpha.end(), 0.0); }

HyperParams HyperParams::symmetric(std::size_t K, double alpha, double beta) {
  HyperParams h;
  h.alpha.assign(K, alpha);
  h.beta = beta;
  return h;
}

void HyperParams::validate() const {
  if (alpha.empty()) throw ArgumentError("alpha must have at least one topic");
  for (double a : alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ArgumentError("alpha entries must be positive");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ArgumentError("beta must be positive");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ArgumentError("gamma must be positive");
  // 1 is allowed for lambda and tau so LDA is the pinned special case.
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ArgumentError("lambda must lie in (0, 1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw ArgumentError("tau must lie in (0, 1]");
  if (!(lambda_prior.a > 0 && lambda_prior.b > 0 && tau_prior.a > 0 && tau_prior.b > 0)) {
    throw ArgumentError("Beta hyper-priors must be positive");
  }
}

void ChainState::recount(const Corpus& corpus) {
  const std::size_t K = num_topics();
  const std::size_t V = corpus.num_words();
  const std::size_t D = corpus.num_docs();
  doc_topic = CountTable(D, K);
  word_topic = CountTable(V, K);
  topic_totals.assign(K, 0);
  doc_informative.assign(D, 0);
  noninf_counts.assign(V, 0);
  noninf_total = 0;
  informative_total = 0;
  num_informative_words = std::count(s.begin(), s.end(), std::uint8_t{1});
  for (std::size_t d = 0; d < D; ++d) {
    const auto& doc = corpus.document(d);
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const WordId w = doc[i];
      const Topic k = z[d][i];
      if (s[w]) {
        if (k < 0 || static_cast<std::size_t>(k) >= K) {
          throw std::logic_error("informative token without a valid topic");
        }
        ++doc_topic(d, k);
        ++word_topic(w, k);
        ++topic_totals[k];
        ++doc_informative[d];
        ++informative_total;
      } else {
        ++noninf_counts[w];
        ++noninf_total;
      }
    }
  }
}

void ChainState::check_invariants(const Corpus& corpus) const {
  const std::size_t V = corpus.num_words();
  if (s.size() != V || z.size() != corpus.num_docs()) throw std::logic_error("state shape mismatch");
  for (std::size_t d = 0; d < z.size(); ++d) {
    if (z[d].size() != corpus.doc_length(d)) throw std::logic_error("z shape mismatch");
    for (std::size_t i = 0; i < z[d].size(); ++i) {
      const bool informative = s[corpus.document(d)[i]] != 0;
      if (informative != (z[d][i] != kNoTopic)) {
        throw std::logic_error("z defined for a token iff its word is informative");
      }
    }
  }
  ChainState fresh;
  fresh.s = s;
  fresh.z = z;
  fresh.topic_totals.assign(num_topics(), 0);
  fresh.recount(corpus);
  if (!(fresh.doc_topic == doc_topic)) throw std::logic_error("n_dk differs from recount");
  if (!(fresh.word_topic == word_topic)) throw std::logic_error("n_kj differs from recount");
  if (fresh.topic_totals != topic_totals) throw std::logic_error("n_k differs from recount");
  if (fresh.doc_informative != doc_informative) throw std::logic_error("sum_k n_dk differs from recount");
  if (fresh.noninf_counts != noninf_counts) throw std::logic_error("m_j differs from recount");
  if (fresh.noninf_total != noninf_total) throw std::logic_error("m differs from recount");
  if (fresh.informative_total != informative_total) throw std::logic_error("n differs from recount");
  if (fresh.num_informative_words != num_informative_words) throw std::logic_error("|s| differs from recount");
  if (informative_total + noninf_total != static_cast<std::int64_t>(corpus.num_tokens())) {
    throw std::logic_error("token conservation violated");
  }
  for (WordId j = 0; j < V; ++j) {
    if (s[j]) {
      if (noninf_counts[j] != 0) throw std::logic_error("informative word with m_j > 0");
    } else {
      for (std::size_t k = 0; k < num_topics(); ++k) {
        if (word_topic(j, k) != 0) throw std::logic_error("non-informative word with n_kj > 0");
      }
    }
  }
}

bool ChainState::operator==(const ChainState& o) const {
  return s == o.s && z == o.z && doc_topic == o.doc_topic && word_topic == o.word_topic &&
         topic_totals == o.topic_totals && doc_informative == o.doc_informative &&
         noninf_counts == o.noninf_counts && noninf_total == o.noninf_total &&
         informative_total == o.informative_total &&
         num_informative_words == o.num_informative_words && lambda == o.lambda && tau == o.tau &&
         iteration == o.iteration && rng == o.rng;
}

ChainState make_state(const Corpus& corpus, std::size_t K, std::vector<std::uint8_t> s,
                      std::vector<std::vector<Topic>> z, double lambda, double tau, std::uint64_t seed) {
  ChainState st;
  st.s = std::move(s);
  st.z = std::move(z);
  st.topic_totals.assign(K, 0);
  st.lambda = lambda;
  st.tau = tau;
  st.rng = Rng(seed);
  st.recount(corpus);
  return st;
}

std::size_t PosteriorSummary::num_informative() const {
  return static_cast<std::size_t>(std::count(s_hat.begin(), s_hat.end(), std::uint8_t{1}));
}

std::vector<WordId> PosteriorSummary::noninformative_set() const {
  std::vector<WordId> out;
  for (std::size_t j = 0; j < s_hat.size(); ++j) {
    if (!s_hat[j]) out.push_back(static_cast<WordId>(j));
  }
  return out;
}

PosteriorSummary map_estimates(const ChainState& state, const HyperParams& hyper) {
  const std::size_t K = state.num_topics();
  const std::size_t V = state.num_words();
  const std::size_t D = state.num_docs();
  const auto n_inf = static_cast<std::size_t>(state.num_informative_words);
  if (n_inf == 0) throw DegeneratePartitionError("no informative words; topics are undefined");

  PosteriorSummary out;
  out.s_hat = state.s;
  out.hyper = hyper;

  const double beta_mass = hyper.beta * static_cast<double>(n_inf);
  out.phi_hat.assign(K, std::vector<double>(V, 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    const double denom = static_cast<double>(state.topic_totals[k]) + beta_mass;
    for (WordId j = 0; j < V; ++j) {
      if (state.s[j]) out.phi_hat[k][j] = (state.n_kj(k, j) + hyper.beta) / denom;
    }
  }

  out.psi_hat.assign(V, 0.0);
  if (n_inf == V) {
    log::warning("every word is informative; psi_hat is all zero");
  } else {
    const double denom =
        static_cast<double>(state.noninf_total) + hyper.gamma * static_cast<double>(V - n_inf);
    for (WordId j = 0; j < V; ++j) {
      if (!state.s[j]) out.psi_hat[j] = (state.noninf_counts[j] + hyper.gamma) / denom;
    }
  }

  const double alpha_sum = hyper.alpha_sum();
  out.theta_hat.assign(D, std::vector<double>(K, 0.0));
  for (std::size_t d = 0; d < D; ++d) {
    const double denom = static_cast<double>(state.doc_informative[d]) + alpha_sum;
    for (std::size_t k = 0; k < K; ++k) {
      out.theta_hat[d][k] = (state.doc_topic(d, k) + hyper.alpha[k]) / denom;
    }
  }

  const auto n = static_cast<double>(state.informative_total);
  const auto m = static_cast<double>(state.noninf_total);
  out.tau_hat = (n + 1.0) / (n + m + 2.0);
  out.noninf_total = state.noninf_total;
  out.lambda_hat = (static_cast<double>(n_inf) + 1.0) / (static_cast<double>(V) + 2.0);
  return out;
}

}  // namespace vslda
