#include <cmath>
#include <filesystem>
#include <numeric>

#include "doctest.h"
#include "vslda/io.hpp"
#include "vslda/synthgen.hpp"

using namespace vslda;

TEST_CASE("default spec shape") {
  auto [corpus, truth] = generate(SyntheticSpec{});
  CHECK(corpus.num_words() == 35);
  CHECK(corpus.num_docs() == 200);
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    CHECK(corpus.doc_length(d) >= 40);
    CHECK(corpus.doc_length(d) <= 50);
  }
  CHECK(std::accumulate(truth.s.begin(), truth.s.end(), 0) == 25);
  CHECK(truth.phi.size() == 10);
  // disjoint supports matching s
  for (std::size_t j = 0; j < 35; ++j) {
    bool in_topic = false;
    for (const auto& row : truth.phi) in_topic = in_topic || row[j] > 0;
    CHECK(in_topic == (truth.s[j] == 1));
    CHECK((truth.psi[j] > 0) == (truth.s[j] == 0));
  }
  // row topic 2 and column topic 7 of the 5 x 5 grid
  CHECK(SyntheticSpec{}.topic_words(2) == std::vector<WordId>{10, 11, 12, 13, 14});
  CHECK(SyntheticSpec{}.topic_words(7) == std::vector<WordId>{2, 7, 12, 17, 22});
  CHECK(truth.phi[2][10] == doctest::Approx(0.2));
  CHECK(truth.phi[2][15] == 0.0);
  CHECK(truth.phi[7][22] == doctest::Approx(0.2));
  CHECK(truth.psi[30] == doctest::Approx(0.1));
  for (const auto& row : truth.phi) CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0));
  // every informative word belongs to exactly two topics
  for (std::size_t j = 0; j < 25; ++j) {
    int owners = 0;
    for (const auto& row : truth.phi) owners += row[j] > 0 ? 1 : 0;
    CHECK(owners == 2);
  }
}

TEST_CASE("block layout keeps topics disjoint") {
  SyntheticSpec spec;
  spec.layout = TopicLayout::kBlocks;
  auto [corpus, truth] = generate(spec);
  CHECK(corpus.num_words() == 60);
  CHECK(spec.topic_words(3) == std::vector<WordId>{15, 16, 17, 18, 19});
  CHECK(std::accumulate(truth.s.begin(), truth.s.end(), 0) == 50);
  CHECK(parse_topic_layout("blocks") == TopicLayout::kBlocks);
  CHECK_THROWS_AS(parse_topic_layout("bars"), ArgumentError);
}

TEST_CASE("non-informative token fraction") {
  auto [corpus, truth] = generate(SyntheticSpec{});
  std::size_t ni = 0;
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    for (auto w : corpus.document(d)) ni += truth.s[w] ? 0 : 1;
  }
  const double frac = static_cast<double>(ni) / static_cast<double>(corpus.num_tokens());
  CHECK(std::abs(frac - 0.4) <= 0.03);
  // b and z agree with the selection of each token's word
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    for (std::size_t i = 0; i < corpus.doc_length(d); ++i) {
      CHECK(truth.b[d][i] == truth.s[corpus.document(d)[i]]);
      CHECK((truth.z[d][i] == kNoTopic) == (truth.b[d][i] == 0));
    }
  }
}

TEST_CASE("tau = 1 leaves the non-informative words unused") {
  SyntheticSpec spec;
  spec.tau = 1.0;
  auto [corpus, truth] = generate(spec);
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    for (auto w : corpus.document(d)) CHECK(truth.s[w] == 1);
  }
}

TEST_CASE("deterministic under seed") {
  SyntheticSpec spec;
  spec.seed = 9;
  auto a = generate(spec);
  auto b = generate(spec);
  CHECK(a.first.documents() == b.first.documents());
  CHECK(a.second.theta == b.second.theta);
  spec.seed = 10;
  CHECK_FALSE(generate(spec).first.documents() == a.first.documents());
}

TEST_CASE("topic tokens follow the true topic distribution") {
  // chi-square goodness of fit per topic at the 1% level (4 degrees of freedom)
  SyntheticSpec spec;
  spec.num_docs = 400;
  auto [corpus, truth] = generate(spec);
  const double critical = 13.2767;
  int failures = 0;
  for (std::size_t k = 0; k < spec.num_topics; ++k) {
    std::vector<double> counts(corpus.num_words(), 0.0);
    double n = 0;
    for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
      for (std::size_t i = 0; i < corpus.doc_length(d); ++i) {
        if (truth.z[d][i] == static_cast<Topic>(k)) {
          counts[corpus.document(d)[i]] += 1;
          n += 1;
        }
      }
    }
    double chi2 = 0;
    for (std::size_t j = 0; j < corpus.num_words(); ++j) {
      if (truth.phi[k][j] == 0) {
        CHECK(counts[j] == 0);
        continue;
      }
      const double expected = n * truth.phi[k][j];
      chi2 += (counts[j] - expected) * (counts[j] - expected) / expected;
    }
    failures += chi2 > critical ? 1 : 0;
  }
  // ten independent 1% tests: allow one rejection
  CHECK(failures <= 1);
}

TEST_CASE("spec validation") {
  SyntheticSpec spec;
  spec.topic_word_prob = 0.25;
  CHECK_THROWS_AS(generate(spec), ArgumentError);
  spec = {};
  spec.noninf_word_prob = 0.2;
  CHECK_THROWS_AS(generate(spec), ArgumentError);
  spec = {};
  spec.min_doc_length = 60;
  CHECK_THROWS_AS(generate(spec), ArgumentError);
  spec = {};
  spec.tau = 0.0;
  CHECK_THROWS_AS(generate(spec), ArgumentError);
  spec = {};
  spec.num_topics = 8;
  CHECK_THROWS_AS(generate(spec), ArgumentError);
}

TEST_CASE("ground truth JSON") {
  SyntheticSpec spec;
  spec.tau = 0.3;
  spec.seed = 4;
  auto [corpus, truth] = generate(spec);
  auto path = std::filesystem::temp_directory_path() / "vslda_test_truth.json";
  write_ground_truth(truth, spec, path);
  Json j = read_json(path);
  CHECK(j.at("tau").get<double>() == doctest::Approx(0.3));
  CHECK(j.at("seed").get<std::uint64_t>() == 4);
  CHECK(j.at("true_s").size() == 35);
  CHECK(j.at("true_phi").size() == 10);
  std::filesystem::remove(path);
}
