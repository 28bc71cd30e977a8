#include <cmath>

#include "doctest.h"
#include "vslda/hyperopt.hpp"
#include "vslda/random.hpp"

using namespace vslda;

namespace {

// Rows drawn from a Dirichlet-multinomial with concentration `conc`.
CountTable dirichlet_multinomial_rows(Rng& rng, std::size_t rows, std::size_t tokens,
                                      const std::vector<double>& conc) {
  CountTable t(rows, conc.size());
  for (std::size_t r = 0; r < rows; ++r) {
    auto p = rng.dirichlet(conc);
    double total = 0;
    for (double v : p) total += v;
    for (std::size_t n = 0; n < tokens; ++n) ++t(r, rng.discrete(p, total));
  }
  return t;
}

}  // namespace

TEST_CASE("config validation") {
  FixedPointConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.tolerance = 0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.floor = 0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
}

TEST_CASE("alpha: histograms proportional to alpha are a fixed point") {
  // single-token documents whose topic histogram is proportional to alpha
  const std::vector<double> alpha = {1.0, 2.0, 3.0};
  CountTable counts(60, 3);
  std::size_t d = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    for (int i = 0; i < 10 * static_cast<int>(k + 1); ++i) counts(d++, k) = 1;
  }
  FixedPointConfig one;
  one.max_iters = 1;
  auto out = optimize_alpha(counts, alpha, one);
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(out[k] - alpha[k]) / alpha[k] < 1e-5);
}

TEST_CASE("alpha: symmetric input stays symmetric") {
  CountTable counts(5, 4);
  for (std::size_t d = 0; d < 5; ++d) {
    for (std::size_t k = 0; k < 4; ++k) counts(d, k) = static_cast<std::int32_t>(d + 1);
  }
  auto out = optimize_alpha(counts, {0.3, 0.3, 0.3, 0.3});
  for (std::size_t k = 1; k < 4; ++k) CHECK(out[k] == doctest::Approx(out[0]).epsilon(1e-12));
}

TEST_CASE("alpha: recovery from Dirichlet-multinomial data") {
  Rng rng(2024);
  const std::vector<double> truth = {2.0, 1.0, 0.5};
  CountTable counts = dirichlet_multinomial_rows(rng, 2000, 100, truth);
  auto out = optimize_alpha(counts, {1.0, 1.0, 1.0});
  for (std::size_t k = 0; k < 3; ++k) {
    INFO("k=" << k << " estimate=" << out[k]);
    CHECK(std::abs(out[k] - truth[k]) / truth[k] < 0.15);
  }
  // idempotent at convergence
  auto again = optimize_alpha(counts, out);
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(again[k] - out[k]) / out[k] < 1e-4);

  // the tied update recovers the mean level of symmetric data
  CountTable sym = dirichlet_multinomial_rows(rng, 1000, 50, {0.8, 0.8, 0.8, 0.8});
  CHECK(std::abs(optimize_alpha_symmetric(sym, 0.1) - 0.8) / 0.8 < 0.15);
}

TEST_CASE("beta: recovery with K = 10 topics over 25 words") {
  Rng rng(77);
  CountTable counts = dirichlet_multinomial_rows(rng, 10, 2000, std::vector<double>(25, 0.1));
  const double beta = optimize_beta_symmetric(counts, 1.0);
  INFO("estimate=" << beta);
  CHECK(std::abs(beta - 0.1) / 0.1 < 0.25);
}

TEST_CASE("beta: degenerate tables") {
  CHECK(optimize_beta_symmetric(CountTable(3, 5), 0.37) == 0.37);
  CHECK(optimize_alpha(CountTable(4, 2), {0.2, 0.9}) == std::vector<double>{0.2, 0.9});

  CountTable flat(1, 6);
  for (std::size_t j = 0; j < 6; ++j) flat(0, j) = 10;
  const double b = optimize_beta_symmetric(flat, 0.5);
  CHECK(std::isfinite(b));
  CHECK(b > 0.0);
}

TEST_CASE("outputs respect the floor") {
  // one topic absorbs every token: the others are driven toward zero
  CountTable counts(50, 3);
  for (std::size_t d = 0; d < 50; ++d) counts(d, 0) = 20;
  FixedPointConfig cfg;
  cfg.floor = 1e-3;
  cfg.max_iters = 1000;
  auto out = optimize_alpha(counts, {1.0, 1.0, 1.0}, cfg);
  for (double a : out) CHECK(a >= 1e-3);
  CHECK(out[1] == doctest::Approx(1e-3));
}
