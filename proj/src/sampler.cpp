#include "vslda/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vslda/io.hpp"
#include "vslda/numeric.hpp"

namespace vslda {

void ChainConfig::validate() const {
  if (num_topics < 1) throw ArgumentError("K must be >= 1");
  if (iterations < 1) throw ArgumentError("iterations must be >= 1");
  if (burn_in < 0 || burn_in >= iterations) throw ArgumentError("burn-in must satisfy 0 <= B < T");
  if (thinning < 1) throw ArgumentError("thinning interval must be >= 1");
  if (mc_samples < 1) throw ArgumentError("Monte Carlo sample count U must be >= 1");
  if (hyperopt_interval < 0 || hyperopt_start < 0) {
    throw ArgumentError("hyperparameter optimization schedule must be non-negative");
  }
  fixed_point.validate();
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double clamp_open_unit(double p) {
  constexpr double lo = 1e-12;
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(p, lo, hi);
}

// Conditional weights with an explicit informative-vocabulary size, so the
// s_j = 1 branch can be evaluated while s_j still reads 0.
double weights_with_size(const ChainState& st, const HyperParams& h, std::size_t doc, WordId word,
                         double informative_size, std::span<double> out) {
  const std::size_t K = st.num_topics();
  const std::int32_t* nd = st.doc_topic.row(doc);
  const std::int32_t* nw = st.word_topic.row(word);
  const double beta_mass = h.beta * informative_size;
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double w = (nd[k] + h.alpha[k]) * (nw[k] + h.beta) /
                     (static_cast<double>(st.topic_totals[k]) + beta_mass);
    out[k] = w;
    total += w;
  }
  return total;
}

void add_informative(ChainState& st, const TokenRef& t, WordId word, Topic k) {
  ++st.doc_topic(t.doc, k);
  ++st.word_topic(word, k);
  ++st.topic_totals[k];
  ++st.doc_informative[t.doc];
  ++st.informative_total;
  st.z[t.doc][t.pos] = k;
}

Topic remove_informative(ChainState& st, const TokenRef& t, WordId word) {
  const Topic k = st.z[t.doc][t.pos];
  --st.doc_topic(t.doc, k);
  --st.word_topic(word, k);
  --st.topic_totals[k];
  --st.doc_informative[t.doc];
  --st.informative_total;
  st.z[t.doc][t.pos] = kNoTopic;
  return k;
}

// Word-level bookkeeping for an s_j update. While a word is detached its
// tokens are counted nowhere; s_j keeps its old value.
class WordMove {
public:
  WordMove(const Corpus& corpus, ChainState& st, const HyperParams& h, WordId word)
      : st_(st), h_(h), word_(word), occ_(corpus.occurrences(word)),
        weights_(st.num_topics()), alpha_sum_(h.alpha_sum()),
        lgamma_beta_(std::lgamma(h.beta)), lgamma_gamma_(std::lgamma(h.gamma)) {
    informative_now_ = st.s[word] != 0;
    others_ = st.num_informative_words - (informative_now_ ? 1 : 0);
  }

  std::int64_t others() const { return others_; }
  std::int64_t count() const { return static_cast<std::int64_t>(occ_.size()); }
  bool informative_now() const { return informative_now_; }

  // Removes word j's tokens. For an informative word returns the sum of the
  // per-token increments of its current topics, which is how much those
  // tokens contributed above the s_j = 1 base.
  double detach(std::vector<Topic>& saved) {
    saved.assign(occ_.size(), kNoTopic);
    if (!informative_now_) {
      st_.noninf_counts[word_] -= count();
      st_.noninf_total -= count();
      return 0.0;
    }
    const double size1 = static_cast<double>(others_ + 1);
    double acc = 0.0;
    for (std::size_t i = occ_.size(); i-- > 0;) {
      const TokenRef& t = occ_[i];
      const Topic k = remove_informative(st_, t, word_);
      saved[i] = k;
      acc += increment(t.doc, k, size1);
    }
    return acc;
  }

  void attach_informative(const std::vector<Topic>& topics) {
    for (std::size_t i = 0; i < occ_.size(); ++i) add_informative(st_, occ_[i], word_, topics[i]);
  }

  void attach_noninformative() {
    st_.noninf_counts[word_] += count();
    st_.noninf_total += count();
  }

  // Local log-likelihood of the s_j = 0 branch, up to terms shared with the
  // s_j = 1 branch. Requires at least one other informative word.
  double branch0() const {
    const auto S = static_cast<double>(others_);
    const auto NI = static_cast<double>(static_cast<std::int64_t>(st_.num_words()) - others_);
    const auto c = static_cast<double>(count());
    const auto m = static_cast<double>(st_.noninf_total) + c;
    const auto n = static_cast<double>(st_.informative_total);
    double topic = 0.0;
    for (std::size_t k = 0; k < st_.num_topics(); ++k) {
      topic += std::lgamma(h_.beta * S) - S * lgamma_beta_ -
               std::lgamma(static_cast<double>(st_.topic_totals[k]) + h_.beta * S);
    }
    const double psi = std::lgamma(h_.gamma * NI) - NI * lgamma_gamma_ + std::lgamma(c + h_.gamma) -
                       std::lgamma(m + h_.gamma * NI);
    return topic + psi + prior(S, NI, n, m);
  }

  // Local log-likelihood of the s_j = 1 branch before any of word j's tokens
  // are added back.
  double branch1_base() const {
    const auto S = static_cast<double>(others_ + 1);
    const auto NI = static_cast<double>(static_cast<std::int64_t>(st_.num_words()) - others_ - 1);
    const auto c = static_cast<double>(count());
    const auto m = static_cast<double>(st_.noninf_total);
    const auto n = static_cast<double>(st_.informative_total) + c;
    double topic = 0.0;
    for (std::size_t k = 0; k < st_.num_topics(); ++k) {
      topic += std::lgamma(h_.beta * S) - S * lgamma_beta_ + lgamma_beta_ -
               std::lgamma(static_cast<double>(st_.topic_totals[k]) + h_.beta * S);
    }
    double psi = 0.0;
    if (NI > 0.0) psi = std::lgamma(h_.gamma * NI) - NI * lgamma_gamma_ - std::lgamma(m + h_.gamma * NI);
    return topic + psi + prior(S, NI, n, m);
  }

  // U sequential completions on the detached state. Returns
  // log((1/U) sum_u exp(ell_u)) where ell_u is the completion's increment sum
  // (minus log q under importance weighting). Counts are restored after each.
  double completions(int U, MarginalEstimator estimator, std::vector<Topic>* last) {
    const double size1 = static_cast<double>(others_ + 1);
    std::vector<double> ell(static_cast<std::size_t>(U));
    std::vector<Topic> drawn(occ_.size());
    for (int u = 0; u < U; ++u) {
      double acc = 0.0;
      for (std::size_t i = 0; i < occ_.size(); ++i) {
        const TokenRef& t = occ_[i];
        const double total = weights_with_size(st_, h_, t.doc, word_, size1, weights_);
        const auto k = static_cast<Topic>(st_.rng.discrete(weights_, total));
        const double doc_norm = std::log(static_cast<double>(st_.doc_informative[t.doc]) + alpha_sum_);
        acc += (estimator == MarginalEstimator::kImportanceWeighted ? std::log(total)
                                                                     : std::log(weights_[k])) -
               doc_norm;
        add_informative(st_, t, word_, k);
        drawn[i] = k;
      }
      ell[static_cast<std::size_t>(u)] = acc;
      for (std::size_t i = occ_.size(); i-- > 0;) remove_informative(st_, occ_[i], word_);
    }
    if (last != nullptr) *last = drawn;
    return log_sum_exp(ell) - std::log(static_cast<double>(U));
  }

private:
  double increment(std::size_t doc, Topic k, double size1) const {
    return std::log(st_.doc_topic(doc, k) + h_.alpha[k]) + std::log(st_.word_topic(word_, k) + h_.beta) -
           std::log(static_cast<double>(st_.topic_totals[k]) + h_.beta * size1) -
           std::log(static_cast<double>(st_.doc_informative[doc]) + alpha_sum_);
  }

  double prior(double S, double NI, double n, double m) const {
    return xlogy(S, st_.lambda) + xlogy(NI, 1.0 - st_.lambda) + xlogy(n, st_.tau) + xlogy(m, 1.0 - st_.tau);
  }

  ChainState& st_;
  const HyperParams& h_;
  WordId word_;
  const std::vector<TokenRef>& occ_;
  std::vector<double> weights_;
  double alpha_sum_;
  double lgamma_beta_;
  double lgamma_gamma_;
  bool informative_now_ = false;
  std::int64_t others_ = 0;
};

}  // namespace

ChainState init_chain(const Corpus& corpus, const ChainConfig& config, const HyperParams& hyper) {
  config.validate();
  hyper.validate();
  if (hyper.num_topics() != config.num_topics) {
    throw ArgumentError("alpha has " + std::to_string(hyper.num_topics()) + " entries but K=" +
                        std::to_string(config.num_topics));
  }
  const std::size_t V = corpus.num_words();
  ChainState st;
  st.rng = Rng(config.seed);
  st.s.assign(V, 1);
  if (config.s_init == SelectionInit::kBernoulli) {
    for (auto& sj : st.s) sj = st.rng.bernoulli(hyper.lambda) ? 1 : 0;
    if (std::find(st.s.begin(), st.s.end(), std::uint8_t{1}) == st.s.end()) {
      st.s[st.rng.uniform_int(V)] = 1;
    }
  }
  st.z.resize(corpus.num_docs());
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    const auto& doc = corpus.document(d);
    st.z[d].assign(doc.size(), kNoTopic);
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (st.s[doc[i]]) st.z[d][i] = static_cast<Topic>(st.rng.uniform_int(config.num_topics));
    }
  }
  st.topic_totals.assign(config.num_topics, 0);
  st.lambda = hyper.lambda;
  st.tau = hyper.tau;
  st.iteration = 0;
  st.recount(corpus);
  return st;
}

double topic_weights(const ChainState& state, const HyperParams& hyper, std::size_t doc, WordId word,
                     std::span<double> out) {
  return weights_with_size(state, hyper, doc, word, static_cast<double>(state.num_informative_words), out);
}

void gibbs_sweep_z(const Corpus& corpus, ChainState& state, const HyperParams& hyper) {
  const std::size_t K = state.num_topics();
  std::vector<double> weights(K);
  const double beta = hyper.beta;
  const double beta_mass = beta * static_cast<double>(state.num_informative_words);
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    const auto& doc = corpus.document(d);
    std::int32_t* nd = state.doc_topic.row(d);
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const WordId w = doc[i];
      if (!state.s[w]) continue;
      std::int32_t* nw = state.word_topic.row(w);
      Topic k = state.z[d][i];
      --nd[k];
      --nw[k];
      --state.topic_totals[k];
      double total = 0.0;
      for (std::size_t t = 0; t < K; ++t) {
        weights[t] = (nd[t] + hyper.alpha[t]) * (nw[t] + beta) /
                     (static_cast<double>(state.topic_totals[t]) + beta_mass);
        total += weights[t];
      }
      k = static_cast<Topic>(state.rng.discrete(weights, total));
      ++nd[k];
      ++nw[k];
      ++state.topic_totals[k];
      state.z[d][i] = k;
    }
  }
}

double joint_log_likelihood(const ChainState& state, const HyperParams& hyper) {
  const std::size_t K = state.num_topics();
  const std::size_t V = state.num_words();
  const double alpha_sum = hyper.alpha_sum();
  double lgamma_alpha = 0.0;
  for (double a : hyper.alpha) lgamma_alpha += std::lgamma(a);

  double ll = 0.0;
  for (std::size_t d = 0; d < state.num_docs(); ++d) {
    ll += std::lgamma(alpha_sum) - lgamma_alpha;
    for (std::size_t k = 0; k < K; ++k) ll += std::lgamma(state.doc_topic(d, k) + hyper.alpha[k]);
    ll -= std::lgamma(static_cast<double>(state.doc_informative[d]) + alpha_sum);
  }

  const auto S = static_cast<double>(state.num_informative_words);
  const auto NI = static_cast<double>(V) - S;
  if (S > 0) {
    const double lgb = std::lgamma(hyper.beta);
    for (std::size_t k = 0; k < K; ++k) {
      ll += std::lgamma(hyper.beta * S) - S * lgb;
      for (WordId j = 0; j < V; ++j) {
        if (state.s[j]) ll += std::lgamma(state.word_topic(j, k) + hyper.beta);
      }
      ll -= std::lgamma(static_cast<double>(state.topic_totals[k]) + hyper.beta * S);
    }
  }
  if (NI > 0) {
    ll += std::lgamma(hyper.gamma * NI) - NI * std::lgamma(hyper.gamma);
    for (WordId j = 0; j < V; ++j) {
      if (!state.s[j]) ll += std::lgamma(state.noninf_counts[j] + hyper.gamma);
    }
    ll -= std::lgamma(static_cast<double>(state.noninf_total) + hyper.gamma * NI);
  }
  ll += xlogy(S, state.lambda) + xlogy(NI, 1.0 - state.lambda);
  ll += xlogy(static_cast<double>(state.informative_total), state.tau) +
        xlogy(static_cast<double>(state.noninf_total), 1.0 - state.tau);
  if (!std::isfinite(ll)) throw NumericalError("joint log-likelihood is not finite");
  return ll;
}

MarginalEstimate mc_log_marginal_s1(const Corpus& corpus, ChainState& state, WordId word,
                                    const HyperParams& hyper, int mc_samples, MarginalEstimator estimator) {
  if (mc_samples < 1) throw ArgumentError("Monte Carlo sample count U must be >= 1");
  if (word >= state.num_words()) throw ArgumentError("word id out of range");
  const double current = joint_log_likelihood(state, hyper);
  WordMove move(corpus, state, hyper, word);
  std::vector<Topic> saved;
  const double current_increments = move.detach(saved);

  MarginalEstimate out;
  const double rel = move.completions(mc_samples, estimator, &out.last_sample);
  if (move.informative_now()) {
    out.log_marginal = current - current_increments + rel;
    move.attach_informative(saved);
  } else {
    out.log_marginal = current - move.branch0() + move.branch1_base() + rel;
    move.attach_noninformative();
  }
  return out;
}

FlipOutcome metropolis_update_s(const Corpus& corpus, ChainState& state, WordId word,
                                const HyperParams& hyper, int mc_samples, MarginalEstimator estimator) {
  if (mc_samples < 1) throw ArgumentError("Monte Carlo sample count U must be >= 1");
  FlipOutcome out;
  WordMove move(corpus, state, hyper, word);
  if (move.informative_now() && move.others() == 0) {
    log::debug("flip of word " + std::to_string(word) + " would empty the informative set; rejected");
    return out;
  }
  out.proposed = true;
  std::vector<Topic> saved;
  move.detach(saved);
  std::vector<Topic> drawn;
  const double log_one = move.branch1_base() + move.completions(mc_samples, estimator, &drawn);
  const double log_zero = move.branch0();
  out.log_ratio = move.informative_now() ? log_zero - log_one : log_one - log_zero;
  if (std::isnan(out.log_ratio)) out.log_ratio = kNegInf;
  out.acceptance_probability = out.log_ratio >= 0.0 ? 1.0 : std::exp(out.log_ratio);
  out.accepted = out.log_ratio >= 0.0 || std::log(state.rng.uniform()) < out.log_ratio;

  if (move.informative_now()) {
    if (out.accepted) {
      state.s[word] = 0;
      --state.num_informative_words;
      move.attach_noninformative();
    } else {
      move.attach_informative(saved);
    }
  } else {
    if (out.accepted) {
      state.s[word] = 1;
      ++state.num_informative_words;
      move.attach_informative(drawn);
    } else {
      move.attach_noninformative();
    }
  }
  return out;
}

void update_lambda_tau(ChainState& state, const HyperParams& hyper) {
  const auto S = static_cast<double>(state.num_informative_words);
  const auto V = static_cast<double>(state.num_words());
  state.lambda = clamp_open_unit(state.rng.beta(hyper.lambda_prior.a + S, hyper.lambda_prior.b + V - S));
  state.tau = clamp_open_unit(state.rng.beta(hyper.tau_prior.a + static_cast<double>(state.informative_total),
                                             hyper.tau_prior.b + static_cast<double>(state.noninf_total)));
}

std::vector<std::uint8_t> estimate_s(const std::vector<std::vector<std::uint8_t>>& samples) {
  if (samples.empty()) throw ArgumentError("estimate_s needs at least one retained sample");
  const std::size_t V = samples.front().size();
  std::vector<std::size_t> ones(V, 0);
  for (const auto& s : samples) {
    if (s.size() != V) throw ArgumentError("retained selection vectors differ in length");
    for (std::size_t j = 0; j < V; ++j) ones[j] += s[j] ? 1 : 0;
  }
  std::vector<std::uint8_t> out(V, 0);
  for (std::size_t j = 0; j < V; ++j) out[j] = 2 * ones[j] >= samples.size() ? 1 : 0;
  return out;
}

void project_selection(const Corpus& corpus, ChainState& state, const HyperParams& hyper,
                       const std::vector<std::uint8_t>& target) {
  if (target.size() != state.num_words()) throw ArgumentError("selection vector has the wrong length");
  if (std::find(target.begin(), target.end(), std::uint8_t{1}) == target.end()) {
    throw DegeneratePartitionError("target selection has no informative words");
  }
  std::vector<Topic> saved;
  for (WordId j = 0; j < target.size(); ++j) {
    if (state.s[j] && !target[j]) {
      WordMove move(corpus, state, hyper, j);
      move.detach(saved);
      state.s[j] = 0;
      --state.num_informative_words;
      move.attach_noninformative();
    }
  }
  std::vector<double> weights(state.num_topics());
  for (WordId j = 0; j < target.size(); ++j) {
    if (!state.s[j] && target[j]) {
      WordMove move(corpus, state, hyper, j);
      move.detach(saved);
      state.s[j] = 1;
      ++state.num_informative_words;
      for (const TokenRef& t : corpus.occurrences(j)) {
        const double total = topic_weights(state, hyper, t.doc, j, weights);
        add_informative(state, t, j, static_cast<Topic>(state.rng.discrete(weights, total)));
      }
    }
  }
}

namespace {

CountTable informative_topic_word(const ChainState& st) {
  const std::size_t K = st.num_topics();
  CountTable table(K, static_cast<std::size_t>(st.num_informative_words));
  std::size_t col = 0;
  for (WordId j = 0; j < st.num_words(); ++j) {
    if (!st.s[j]) continue;
    for (std::size_t k = 0; k < K; ++k) table(k, col) = st.word_topic(j, k);
    ++col;
  }
  return table;
}

void optimize_hyperparameters(const ChainConfig& cfg, const ChainState& st, HyperParams& hyper) {
  if (cfg.alpha_mode == AlphaMode::kAsymmetric) {
    hyper.alpha = optimize_alpha(st.doc_topic, hyper.alpha, cfg.fixed_point);
  } else {
    const double shared = optimize_alpha_symmetric(st.doc_topic, hyper.alpha.front(), cfg.fixed_point);
    std::fill(hyper.alpha.begin(), hyper.alpha.end(), shared);
  }
  if (cfg.optimize_beta) {
    hyper.beta = optimize_beta_symmetric(informative_topic_word(st), hyper.beta, cfg.fixed_point);
  }
  std::string msg = "sweep " + std::to_string(st.iteration) + ": beta=" + std::to_string(hyper.beta) + " alpha=";
  for (double a : hyper.alpha) msg += std::to_string(a) + " ";
  log::debug(msg);
}

bool hyperopt_due(const ChainConfig& cfg, std::int64_t t) {
  return cfg.hyperopt_interval > 0 && t >= cfg.hyperopt_start &&
         (t - cfg.hyperopt_start) % cfg.hyperopt_interval == 0;
}

}  // namespace

ChainProgress start_chain(const Corpus& corpus, const ChainConfig& config, const HyperParams& hyper,
                          std::string model) {
  ChainProgress p;
  p.config = config;
  p.hyper = hyper;
  p.state = init_chain(corpus, config, hyper);
  p.model = std::move(model);
  return p;
}

ChainResult continue_chain(const Corpus& corpus, ChainProgress p, const RunControl& control) {
  const ChainConfig& cfg = p.config;
  cfg.validate();
  ChainState& st = p.state;
  const auto V = static_cast<WordId>(corpus.num_words());

  for (std::int64_t t = st.iteration + 1; t <= cfg.iterations; ++t) {
    gibbs_sweep_z(corpus, st, p.hyper);
    std::int64_t accepted = 0;
    if (cfg.sample_selection) {
      for (WordId j = 0; j < V; ++j) {
        if (metropolis_update_s(corpus, st, j, p.hyper, cfg.mc_samples, cfg.estimator).accepted) ++accepted;
      }
    }
    if (cfg.sample_lambda_tau) update_lambda_tau(st, p.hyper);
    st.iteration = t;
    if (hyperopt_due(cfg, t)) optimize_hyperparameters(cfg, st, p.hyper);
    if (cfg.check_invariants) st.check_invariants(corpus);

    p.trace.push_back({t, joint_log_likelihood(st, p.hyper), st.num_informative_words, st.lambda, st.tau,
                       accepted});

    if (t > cfg.burn_in && (t - cfg.burn_in) % cfg.thinning == 0) {
      p.samples.push_back({t, st.s, st.word_topic, st.noninf_counts});
      p.last_retained = st;
    }

    const bool periodic = control.checkpoint_interval > 0 && t % control.checkpoint_interval == 0;
    const bool stopping = (control.stop != nullptr && control.stop->load()) ||
                          (control.stop_after && *control.stop_after == t && t < cfg.iterations);
    if (control.checkpoint_path && (periodic || stopping)) write_checkpoint(p, *control.checkpoint_path);
    if (stopping) throw ChainInterrupted(t);
  }

  ChainResult result;
  ChainState base = p.last_retained ? *p.last_retained : st;
  std::vector<std::uint8_t> s_hat;
  if (p.samples.empty()) {
    log::warning("no samples retained after burn-in; summarizing the final state");
    s_hat = st.s;
  } else {
    std::vector<std::vector<std::uint8_t>> selections;
    selections.reserve(p.samples.size());
    for (const auto& sample : p.samples) selections.push_back(sample.s);
    s_hat = estimate_s(selections);
  }
  project_selection(corpus, base, p.hyper, s_hat);
  result.summary = map_estimates(base, p.hyper);
  result.summary.thinned_samples = std::move(p.samples);
  result.summary.vocab = corpus.vocab();
  result.summary.model = p.model;
  result.summary.seed = cfg.seed;
  result.trace = std::move(p.trace);
  result.hyper = p.hyper;
  result.final_state = std::move(st);
  return result;
}

ChainResult run_chain(const Corpus& corpus, const ChainConfig& config, const HyperParams& hyper,
                      const RunControl& control) {
  return continue_chain(corpus, start_chain(corpus, config, hyper), control);
}

}  // namespace vslda
