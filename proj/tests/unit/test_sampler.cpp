#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "vslda/sampler.hpp"

using namespace vslda;

namespace {

Corpus tiny_corpus(const oracle::Tiny& t) {
  std::vector<std::string> vocab;
  for (std::size_t j = 0; j < t.V; ++j) vocab.push_back(std::string(1, static_cast<char>('a' + j)));
  return Corpus(vocab, t.docs);
}

HyperParams tiny_hyper(const oracle::Tiny& t) {
  HyperParams h;
  h.alpha = t.alpha;
  h.beta = t.beta;
  h.gamma = t.gamma;
  h.lambda = t.lambda;
  h.tau = t.tau;
  return h;
}

ChainState tiny_state(const Corpus& c, const oracle::Tiny& t, std::vector<std::uint8_t> s,
                      const oracle::Assign& z, std::uint64_t seed = 1) {
  std::vector<std::vector<Topic>> zz;
  for (const auto& row : z) zz.emplace_back(row.begin(), row.end());
  return make_state(c, t.K, std::move(s), std::move(zz), t.lambda, t.tau, seed);
}

// Everything but the RNG.
bool same_assignment(const ChainState& a, const ChainState& b) {
  return a.s == b.s && a.z == b.z && a.doc_topic == b.doc_topic && a.word_topic == b.word_topic &&
         a.topic_totals == b.topic_totals && a.noninf_counts == b.noninf_counts &&
         a.noninf_total == b.noninf_total && a.informative_total == b.informative_total &&
         a.num_informative_words == b.num_informative_words;
}

ChainConfig small_config() {
  ChainConfig cfg;
  cfg.num_topics = 2;
  cfg.iterations = 10;
  cfg.burn_in = 5;
  cfg.thinning = 2;
  cfg.mc_samples = 5;
  cfg.seed = 3;
  cfg.hyperopt_interval = 0;
  return cfg;
}

}  // namespace

TEST_CASE("init_chain") {
  auto t = oracle::default_tiny();
  Corpus c = tiny_corpus(t);
  ChainConfig cfg = small_config();
  HyperParams h = tiny_hyper(t);
  ChainState a = init_chain(c, cfg, h);
  CHECK(a.noninf_total == 0);
  CHECK(a.informative_total == static_cast<std::int64_t>(c.num_tokens()));
  a.check_invariants(c);
  CHECK(init_chain(c, cfg, h) == a);

  cfg.num_topics = 1;
  h.alpha = {0.5};
  ChainState one = init_chain(c, cfg, h);
  for (const auto& row : one.z) {
    for (Topic k : row) CHECK(k == 0);
  }
  for (std::size_t d = 0; d < c.num_docs(); ++d) {
    CHECK(one.doc_topic(d, 0) == static_cast<std::int32_t>(c.doc_length(d)));
  }

  cfg.s_init = SelectionInit::kBernoulli;
  h.lambda = 0.5;
  ChainState bern = init_chain(c, cfg, h);
  bern.check_invariants(c);
  CHECK(bern.num_informative_words >= 1);

  h.alpha = {0.5, 0.5};
  CHECK_THROWS_AS(init_chain(c, cfg, h), ArgumentError);
}

TEST_CASE("config validation") {
  ChainConfig cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  auto bad = cfg;
  bad.burn_in = bad.iterations;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = cfg;
  bad.thinning = 0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = cfg;
  bad.mc_samples = 0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = cfg;
  bad.num_topics = 0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
}

TEST_CASE("Gibbs conditional: hand-evaluated example") {
  // After removing the token: n_d = (3, 0), n_w = (2, 0), n_k = (5, 0), |s| = 2.
  Corpus c({"w", "b"}, {{0, 0, 1, 1}, {0, 1}});
  ChainState st = make_state(c, 2, {1, 1}, {{0, 0, 0, 0}, {0, 0}}, 0.5, 0.5, 0);
  st.doc_topic(0, 0) -= 1;
  st.word_topic(0, 0) -= 1;
  st.topic_totals[0] -= 1;
  HyperParams h = HyperParams::symmetric(2, 1.0, 1.0);
  std::vector<double> w(2);
  const double total = topic_weights(st, h, 0, 0, w);
  CHECK(w[0] == doctest::Approx(4.0 * 3.0 / 7.0));
  CHECK(w[1] == doctest::Approx(1.0 * 1.0 / 2.0));
  const double p0 = w[0] / total;
  CHECK(p0 == doctest::Approx((12.0 / 7.0) / (12.0 / 7.0 + 0.5)));
  CHECK(p0 == doctest::Approx(0.774).epsilon(0.001));
  // the same ratio from the two-term closed form
  CHECK(w[0] / w[1] == doctest::Approx((4.0 * 3.0 / 7.0) / 0.5));
}

TEST_CASE("Gibbs conditional: symmetric and empty is uniform") {
  Corpus single({"a"}, {{0}});
  ChainState lone = make_state(single, 3, {1}, {{0}}, 0.5, 0.5, 0);
  lone.doc_topic(0, 0) -= 1;
  lone.word_topic(0, 0) -= 1;
  lone.topic_totals[0] -= 1;
  std::vector<double> w(3);
  const double total = topic_weights(lone, HyperParams::symmetric(3, 0.3, 0.2), 0, 0, w);
  for (double v : w) CHECK(v / total == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("Gibbs sweep: single-token corpus samples uniformly") {
  Corpus c({"a"}, {{0}});
  HyperParams h = HyperParams::symmetric(2, 0.5, 0.1);
  ChainState st = make_state(c, 2, {1}, {{0}}, 0.5, 0.5, 99);
  int zeros = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    gibbs_sweep_z(c, st, h);
    zeros += st.z[0][0] == 0 ? 1 : 0;
  }
  const double sigma = std::sqrt(n * 0.25);
  CHECK(std::abs(zeros - n / 2) <= 3 * sigma);
  st.check_invariants(c);
}

TEST_CASE("Gibbs sweep keeps document totals and skips non-informative tokens") {
  auto t = oracle::default_tiny();
  Corpus c = tiny_corpus(t);
  HyperParams h = tiny_hyper(t);
  ChainState st = tiny_state(c, t, {1, 1, 0}, {{0, 1}, {1, -1}});
  const auto before = st.doc_informative;
  for (int i = 0; i < 50; ++i) {
    gibbs_sweep_z(c, st, h);
    st.check_invariants(c);
    CHECK(st.doc_informative == before);
    CHECK(st.z[1][1] == kNoTopic);
  }
}

TEST_CASE("joint likelihood: prior terms only for an empty state") {
  ChainState st;
  st.s = {1, 1, 1};
  st.z = {{}};
  st.doc_topic = CountTable(1, 2);
  st.word_topic = CountTable(3, 2);
  st.topic_totals = {0, 0};
  st.doc_informative = {0};
  st.noninf_counts = {0, 0, 0};
  st.num_informative_words = 3;
  st.lambda = 0.5;
  st.tau = 0.5;
  HyperParams h = HyperParams::symmetric(2, 0.7, 0.2);
  CHECK(joint_log_likelihood(st, h) == doctest::Approx(3 * std::log(0.5)));
}

TEST_CASE("joint likelihood matches the term-by-term oracle on every configuration") {
  auto t = oracle::default_tiny();
  Corpus c = tiny_corpus(t);
  for (double lambda : {0.5, 0.2}) {
    for (double tau : {0.5, 0.85}) {
      t.lambda = lambda;
      t.tau = tau;
      HyperParams h = tiny_hyper(t);
      int checked = 0;
      for (std::uint32_t code = 1; code < 8; ++code) {
        std::vector<std::uint8_t> s = {static_cast<std::uint8_t>(code & 1), static_cast<std::uint8_t>((code >> 1) & 1),
                                       static_cast<std::uint8_t>((code >> 2) & 1)};
        oracle::for_each_assignment(t, s, [&](const oracle::Assign& z) {
          ChainState st = tiny_state(c, t, s, z);
          CHECK(joint_log_likelihood(st, h) == doctest::Approx(oracle::log_joint(t, s, z)).epsilon(1e-12));
          ++checked;
        });
      }
      CHECK(checked == 2 + 4 + 2 + 8 + 4 + 8 + 16);
    }
  }
}

TEST_CASE("joint likelihood is invariant to topic relabeling") {
  Corpus c({"a", "b", "c", "d"}, {{0, 1, 2, 3, 0}, {1, 1, 3}, {2, 0}});
  HyperParams h;
  h.alpha = {0.3, 0.3, 0.3};
  h.beta = 0.2;
  ChainState st = make_state(c, 3, {1, 1, 0, 1}, {{0, 1, kNoTopic, 2, 2}, {1, 0, 2}, {kNoTopic, 0}}, 0.4, 0.6, 0);
  const std::vector<Topic> perm = {2, 0, 1};
  auto z = st.z;
  for (auto& row : z) {
    for (auto& k : row) {
      if (k != kNoTopic) k = perm[k];
    }
  }
  ChainState relabeled = make_state(c, 3, st.s, z, 0.4, 0.6, 0);
  CHECK(joint_log_likelihood(relabeled, h) == doctest::Approx(joint_log_likelihood(st, h)).epsilon(1e-12));
}

TEST_CASE("MC marginal: absent word reduces to the likelihood with s_j = 1") {
  Corpus c({"a", "b", "ghost"}, {{0, 1}, {1, 0}});
  HyperParams h = HyperParams::symmetric(2, 0.5, 0.3);
  ChainState st = make_state(c, 2, {1, 1, 0}, {{0, 1}, {1, 1}}, 0.5, 0.5, 4);
  ChainState flipped = make_state(c, 2, {1, 1, 1}, st.z, 0.5, 0.5, 4);
  for (auto est : {MarginalEstimator::kImportanceWeighted, MarginalEstimator::kUnweighted}) {
    auto r = mc_log_marginal_s1(c, st, 2, h, 7, est);
    CHECK(r.last_sample.empty());
    CHECK(r.log_marginal == doctest::Approx(joint_log_likelihood(flipped, h)).epsilon(1e-12));
  }
}

TEST_CASE("MC marginal with U = 1 is a single completion") {
  auto t = oracle::default_tiny();
  Corpus c = tiny_corpus(t);
  HyperParams h = tiny_hyper(t);
  for (std::vector<std::uint8_t> s0 : {std::vector<std::uint8_t>{1, 0, 1}, std::vector<std::uint8_t>{1, 1, 1}}) {
    oracle::Assign z = {{0, s0[1] ? 1 : -1}, {s0[1] ? 0 : -1, 1}};
    ChainState st = tiny_state(c, t, s0, z, 17);
    const ChainState before = st;

    auto plain = mc_log_marginal_s1(c, st, 1, h, 1, MarginalEstimator::kUnweighted);
    CHECK(same_assignment(st, before));
    REQUIRE(plain.last_sample.size() == 2);
    oracle::Assign completed = z;
    completed[0][1] = plain.last_sample[0];
    completed[1][0] = plain.last_sample[1];
    std::vector<std::uint8_t> s1 = s0;
    s1[1] = 1;
    CHECK(plain.log_marginal == doctest::Approx(oracle::log_joint(t, s1, completed)).epsilon(1e-12));

    auto weighted = mc_log_marginal_s1(c, st, 1, h, 1, MarginalEstimator::kImportanceWeighted);
    CHECK(same_assignment(st, before));
    completed[0][1] = weighted.last_sample[0];
    completed[1][0] = weighted.last_sample[1];
    const double q = oracle::sequential_draw_prob(t, s0, z, 1, weighted.last_sample);
    CHECK(weighted.log_marginal ==
          doctest::Approx(oracle::log_joint(t, s1, completed) - std::log(q)).epsilon(1e-12));
  }
}

TEST_CASE("MC marginal converges to the enumerated targets") {
  auto t = oracle::default_tiny();
  Corpus c = tiny_corpus(t);
  HyperParams h = tiny_hyper(t);
  for (std::vector<std::uint8_t> s0 : {std::vector<std::uint8_t>{1, 0, 1}, std::vector<std::uint8_t>{1, 1, 0}}) {
    oracle::Assign z = {{1, s0[1] ? 0 : -1}, {s0[1] ? 1 : -1, s0[2] ? 0 : -1}};
    ChainState st = tiny_state(c, t, s0, z, 5);
    const double exact = oracle::log_marginal_s1(t, s0, z, 1);
    const double unweighted_target = oracle::log_expected_unweighted(t, s0, z, 1);
    auto w = mc_log_marginal_s1(c, st, 1, h, 10000, MarginalEstimator::kImportanceWeighted);
    auto u = mc_log_marginal_s1(c, st, 1, h, 10000, MarginalEstimator::kUnweighted);
    CHECK(std::abs(w.log_marginal - exact) < 0.01);
    CHECK(std::abs(u.log_marginal - unweighted_target) < 0.01);
    // the plain average over draws from q is not the marginal on this instance
    CHECK(std::abs(unweighted_target - exact) > 0.05);
  }
}

TEST_CASE("MC marginal: a single-token word is integrated exactly") {
  auto t = oracle::default_tiny();
  Corpus c = tiny_corpus(t);
  HyperParams h = tiny_hyper(t);
  oracle::Assign z = {{0, 1}, {0, -1}};
  ChainState st = tiny_state(c, t, {1, 1, 0}, z, 8);
  const double exact = oracle::log_marginal_s1(t, {1, 1, 0}, z, 2);
  for (int U : {1, 3, 20}) {
    CHECK(mc_log_marginal_s1(c, st, 2, h, U).log_marginal == doctest::Approx(exact).epsilon(1e-12));
  }
  CHECK_THROWS_AS(mc_log_marginal_s1(c, st, 2, h, 0), ArgumentError);
}

TEST_CASE("Metropolis flip: acceptance bounds and the degenerate guard") {
  auto t = oracle::default_tiny();
  Corpus c = tiny_corpus(t);
  HyperParams h = tiny_hyper(t);
  ChainState lone = tiny_state(c, t, {0, 1, 0}, {{-1, 0}, {1, -1}});
  const ChainState before = lone;
  auto out = metropolis_update_s(c, lone, 1, h, 5);
  CHECK_FALSE(out.proposed);
  CHECK_FALSE(out.accepted);
  CHECK(lone == before);

  ChainState st = tiny_state(c, t, {1, 1, 1}, {{0, 1}, {1, 0}}, 21);
  for (int i = 0; i < 2000; ++i) {
    auto r = metropolis_update_s(c, st, static_cast<WordId>(i % 3), h, 3);
    CHECK(r.acceptance_probability >= 0.0);
    CHECK(r.acceptance_probability <= 1.0);
    if (r.proposed && r.log_ratio >= 0.0) CHECK(r.acceptance_probability == 1.0);
    CHECK(std::isfinite(r.acceptance_probability));
    st.check_invariants(c);
    CHECK(st.informative_total + st.noninf_total == static_cast<std::int64_t>(c.num_tokens()));
  }
}

TEST_CASE("Metropolis flip rate matches the enumerated marginal ratio") {
  // symmetric toy corpus; word 2 has one token so its s_j = 1 branch is exact
  oracle::Tiny t = oracle::default_tiny();
  t.alpha = {0.5, 0.5};
  Corpus c = tiny_corpus(t);
  HyperParams h = tiny_hyper(t);
  for (std::uint8_t start : {std::uint8_t{0}, std::uint8_t{1}}) {
    std::vector<std::uint8_t> s = {1, 1, start};
    oracle::Assign z = {{0, 1}, {1, start ? 0 : -1}};
    std::vector<std::uint8_t> s0 = s;
    s0[2] = 0;
    oracle::Assign z0 = z;
    z0[1][1] = -1;
    const double log0 = oracle::log_joint(t, s0, z0);
    const double log1 = oracle::log_marginal_s1(t, s0, z0, 2);
    const double log_ratio = start ? log0 - log1 : log1 - log0;
    const double expected = std::min(1.0, std::exp(log_ratio));

    const ChainState base = tiny_state(c, t, s, z);
    const int n = 10000;
    int accepted = 0;
    for (int i = 0; i < n; ++i) {
      ChainState st = base;
      st.rng = Rng(1000 + static_cast<std::uint64_t>(i));
      auto r = metropolis_update_s(c, st, 2, h, 4);
      CHECK(r.acceptance_probability == doctest::Approx(expected).epsilon(1e-10));
      accepted += r.accepted ? 1 : 0;
    }
    const double sigma = std::sqrt(n * expected * (1 - expected));
    CHECK(std::abs(accepted - n * expected) <= 3 * sigma + 1e-9);
  }
}

TEST_CASE("lambda and tau draws") {
  Corpus c({"a", "b", "c", "d"}, {{0, 1, 2, 3, 0, 1}});
  HyperParams h = HyperParams::symmetric(1, 0.5, 0.1);
  // |s| = V: lambda ~ Beta(V + 1, 1)
  ChainState st = make_state(c, 1, {1, 1, 1, 1}, {{0, 0, 0, 0, 0, 0}}, 0.5, 0.5, 12);
  const int n = 20000;
  double sum = 0, sum_tau = 0;
  for (int i = 0; i < n; ++i) {
    update_lambda_tau(st, h);
    CHECK(st.lambda > 0.0);
    CHECK(st.lambda < 1.0);
    sum += st.lambda;
    sum_tau += st.tau;
  }
  const double mean = 5.0 / 6.0;
  const double var = (5.0 * 1.0) / (36.0 * 7.0);
  CHECK(std::abs(sum / n - mean) <= 3 * std::sqrt(var / n));
  // tau ~ Beta(7, 1)
  const double tmean = 7.0 / 8.0, tvar = 7.0 / (64.0 * 9.0);
  CHECK(std::abs(sum_tau / n - tmean) <= 3 * std::sqrt(tvar / n));

  // n_total == m_total: tau symmetric about one half
  ChainState half = make_state(c, 1, {1, 0, 1, 0}, {{0, kNoTopic, 0, kNoTopic, 0, kNoTopic}}, 0.5, 0.5, 13);
  double tsum = 0;
  for (int i = 0; i < n; ++i) {
    update_lambda_tau(half, h);
    tsum += half.tau;
  }
  CHECK(std::abs(tsum / n - 0.5) <= 3 * std::sqrt((16.0 / (64.0 * 9.0)) / n));
}

TEST_CASE("estimate_s majority vote") {
  CHECK(estimate_s({{1, 0}, {1, 0}, {1, 1}}) == std::vector<std::uint8_t>{1, 0});
  CHECK(estimate_s({{0, 1, 1}}) == std::vector<std::uint8_t>{0, 1, 1});
  CHECK(estimate_s({{1, 0}, {0, 0}}) == std::vector<std::uint8_t>{1, 0});
  CHECK_THROWS_AS(estimate_s({}), ArgumentError);
}

TEST_CASE("project_selection moves tokens between the two sides") {
  auto t = oracle::default_tiny();
  Corpus c = tiny_corpus(t);
  HyperParams h = tiny_hyper(t);
  ChainState st = tiny_state(c, t, {1, 0, 1}, {{0, -1}, {-1, 1}});
  project_selection(c, st, h, {0, 1, 1});
  CHECK(st.s == std::vector<std::uint8_t>{0, 1, 1});
  st.check_invariants(c);
  CHECK(st.z[0][0] == kNoTopic);
  CHECK(st.z[1][1] == 1);
  CHECK(st.z[0][1] != kNoTopic);
  CHECK_THROWS_AS(project_selection(c, st, h, {0, 0, 0}), DegeneratePartitionError);
}

TEST_CASE("run_chain: retention schedule") {
  auto t = oracle::default_tiny();
  Corpus c = tiny_corpus(t);
  ChainConfig cfg = small_config();
  auto result = run_chain(c, cfg, tiny_hyper(t));
  REQUIRE(result.summary.thinned_samples.size() == 2);
  CHECK(result.summary.thinned_samples[0].iteration == 7);
  CHECK(result.summary.thinned_samples[1].iteration == 9);
  CHECK(result.trace.size() == 10);
  CHECK(result.trace.front().iteration == 1);
  CHECK(result.trace.back().iteration == 10);
  CHECK(result.final_state.iteration == 10);
}

TEST_CASE("run_chain: fixed seed is bit-identical") {
  std::vector<std::vector<WordId>> docs;
  std::mt19937 gen(3);
  for (int d = 0; d < 15; ++d) {
    std::vector<WordId> doc;
    for (int i = 0; i < 10; ++i) doc.push_back(gen() % 8);
    docs.push_back(doc);
  }
  std::vector<std::string> vocab;
  for (int j = 0; j < 8; ++j) vocab.push_back("w" + std::to_string(j));
  Corpus c(vocab, docs);
  ChainConfig cfg = small_config();
  cfg.num_topics = 3;
  cfg.iterations = 40;
  cfg.burn_in = 10;
  cfg.thinning = 5;
  cfg.hyperopt_interval = 10;
  cfg.hyperopt_start = 10;
  cfg.check_invariants = true;
  HyperParams h = HyperParams::symmetric(3, 0.5, 0.1);
  auto a = run_chain(c, cfg, h);
  auto b = run_chain(c, cfg, h);
  CHECK(a.trace == b.trace);
  CHECK(a.summary.phi_hat == b.summary.phi_hat);
  CHECK(a.summary.psi_hat == b.summary.psi_hat);
  CHECK(a.summary.theta_hat == b.summary.theta_hat);
  CHECK(a.summary.s_hat == b.summary.s_hat);
  CHECK(a.summary.tau_hat == b.summary.tau_hat);
  CHECK(a.hyper.alpha == b.hyper.alpha);
  CHECK(a.final_state == b.final_state);
  // hyperparameters moved away from their starting values
  CHECK(a.hyper.beta != h.beta);

  cfg.seed = 4;
  auto other = run_chain(c, cfg, h);
  CHECK_FALSE(other.trace == a.trace);
}

TEST_CASE("run_chain: summary reflects the estimated selection") {
  auto t = oracle::default_tiny();
  Corpus c = tiny_corpus(t);
  ChainConfig cfg = small_config();
  cfg.iterations = 60;
  cfg.burn_in = 20;
  cfg.thinning = 4;
  auto r = run_chain(c, cfg, tiny_hyper(t));
  std::vector<std::vector<std::uint8_t>> kept;
  for (const auto& smp : r.summary.thinned_samples) kept.push_back(smp.s);
  CHECK(r.summary.s_hat == estimate_s(kept));
  for (std::size_t j = 0; j < t.V; ++j) {
    for (const auto& row : r.summary.phi_hat) CHECK((row[j] > 0) == (r.summary.s_hat[j] == 1));
  }
}
