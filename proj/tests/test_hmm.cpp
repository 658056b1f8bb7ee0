#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "shmm/hmm.hpp"
#include "shmm/model_io.hpp"

using namespace shmm;

namespace {

HmmModel identity_model() {
  HmmModel m;
  m.k = 2;
  m.d = 2;
  m.T = Matrix::Identity(2, 2);
  m.O = Matrix::Identity(2, 2);
  m.pi = Vector::Zero(2);
  m.pi[0] = 1.0;
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("hmm");

TEST_CASE("builtin models validate as spectral-learnable") {
  for (const auto& name : builtin_model_names()) {
    const auto report = validate_model(builtin_model(name), /*spectral=*/true);
    CAPTURE(name);
    CHECK(report.ok());
  }
}

TEST_CASE("validation reports broken column sums") {
  HmmModel m = builtin_model("k2d3");
  m.T(0, 0) = 0.8;  // column 1 sums to 0.9
  const auto report = validate_model(m);
  REQUIRE_FALSE(report.ok());
  CHECK(report.to_string().find("T column 1 not stochastic") != std::string::npos);
}

TEST_CASE("spectral validation rejects rank-deficient O") {
  HmmModel m = builtin_model("k2d3");
  m.O.col(1) = m.O.col(0);
  CHECK(validate_model(m, false).ok());
  const auto report = validate_model(m, true);
  REQUIRE_FALSE(report.ok());
  CHECK(report.to_string().find("rank(O) < k") != std::string::npos);
}

TEST_CASE("deterministic chain emits its only path") {
  Rng rng(7);
  const auto [xs, hs] = sample_sequence(identity_model(), 4, rng);
  CHECK(xs == ObservationSequence{0, 0, 0, 0});
  CHECK(hs == HiddenPath{0, 0, 0, 0});
}

TEST_CASE("long-run symbol frequency matches the stationary emission law") {
  const HmmModel m = builtin_model("k2d3");
  const Vector mu = oracle::stationary(m.T, m.pi);
  CHECK(mu[0] == doctest::Approx(0.75).epsilon(1e-10));
  const Vector stationary_emissions = m.O * mu;
  CHECK(stationary_emissions[0] == doctest::Approx(0.3875).epsilon(1e-10));

  Rng rng(42);
  const auto [xs, hs] = sample_sequence(m, 100000, rng);
  double freq = 0.0;
  for (int x : xs) freq += x == 0 ? 1.0 : 0.0;
  freq /= static_cast<double>(xs.size());
  CHECK(freq == doctest::Approx(stationary_emissions[0]).epsilon(0.03));
  CHECK(std::abs(freq - stationary_emissions[0]) < 0.01);
}

TEST_CASE("equal seeds give equal samples") {
  const HmmModel m = builtin_model("k2d6");
  Rng a(123), b(123);
  const auto sa = sample_sequence(m, 500, a);
  const auto sb = sample_sequence(m, 500, b);
  CHECK(sa.first == sb.first);
  CHECK(sa.second == sb.second);

  Rng c(9), e(9);
  CHECK(sample_triples(m, 200, c).symbols == sample_triples(m, 200, e).symbols);
}

TEST_CASE("triples from the deterministic chain") {
  Rng rng(0);
  const auto triples = sample_triples(identity_model(), 1, rng);
  REQUIRE(triples.size() == 1);
  CHECK(triples.symbols[0] == std::array<int, 3>{0, 0, 0});
}

TEST_CASE("first-symbol frequency approaches O pi") {
  const HmmModel m = builtin_model("k2d3");
  const Vector p1 = m.O * m.pi;
  CHECK(p1[0] == doctest::Approx(0.36).epsilon(1e-12));

  Rng rng(11);
  const auto triples = sample_triples(m, 100000, rng);
  Vector freq = Vector::Zero(m.d);
  for (const auto& t : triples.symbols) freq[t[0]] += 1.0;
  freq /= static_cast<double>(triples.size());
  CHECK(std::abs(freq[0] - 0.36) < 0.01);

  // all symbols within 3 standard errors
  for (int i = 0; i < m.d; ++i) {
    const double se = std::sqrt(p1[i] * (1 - p1[i]) / 100000.0);
    CHECK(std::abs(freq[i] - p1[i]) < 3 * se + 1e-12);
  }
}

TEST_CASE("sampling preconditions") {
  const HmmModel m = builtin_model("k2d3");
  Rng rng(1);
  CHECK_THROWS_AS(sample_triples(m, 0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_sequence(m, 0, rng), std::invalid_argument);
  HmmModel bad = m;
  bad.pi[0] = 2.0;
  CHECK_THROWS_AS(sample_triples(bad, 10, rng), std::invalid_argument);
}

TEST_CASE("sliding triples window one long sequence") {
  const HmmModel m = builtin_model("k2d3");
  Rng a(5), b(5);
  const auto triples = sample_triples(m, 50, a, TripleSampling::sliding);
  const auto [xs, hs] = sample_sequence(m, 52, b);
  REQUIRE(triples.size() == 50);
  for (int i = 0; i < 50; ++i) {
    CHECK(triples.symbols[i][0] == xs[i]);
    CHECK(triples.symbols[i][1] == xs[i + 1]);
    CHECK(triples.symbols[i][2] == xs[i + 2]);
  }
}

TEST_CASE("log-likelihood of a single symbol is log(O pi)") {
  const HmmModel m = builtin_model("k2d3");
  CHECK(sequence_log_likelihood(m, {0}) == doctest::Approx(std::log(0.36)).epsilon(1e-12));
}

TEST_CASE("deterministic chain has log-likelihood zero") {
  CHECK(sequence_log_likelihood(identity_model(), {0, 0}) == doctest::Approx(0.0));
}

TEST_CASE("pair probability matches the path sum") {
  const HmmModel m = builtin_model("k2d3");
  // sum over the 4 hidden paths: 0.09 + 0.002 + 0.024 + 0.0112
  const double expected = oracle::sequence_probability(m, {0, 1});
  CHECK(expected == doctest::Approx(0.1272).epsilon(1e-12));
  CHECK(sequence_log_likelihood(m, {0, 1}) ==
        doctest::Approx(std::log(expected)).epsilon(1e-12));
}

TEST_CASE("forward recursion equals path enumeration on random models") {
  Rng rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const int k = 2 + trial % 2;
    const int d = k + 1 + trial % 3;
    const HmmModel m = oracle::random_spectral_model(k, d, rng);
    ObservationSequence seq;
    const int len = 1 + trial % 6;
    for (int t = 0; t < len; ++t)
      seq.push_back(static_cast<int>(rng.uniform01() * d));
    const double brute = oracle::sequence_probability(m, seq);
    const double fast = sequence_log_likelihood(m, seq);
    CHECK(fast == doctest::Approx(std::log(brute)).epsilon(1e-10));
  }
}

TEST_CASE("log-likelihood rejects out-of-range symbols") {
  const HmmModel m = builtin_model("k2d3");
  CHECK_THROWS_AS(sequence_log_likelihood(m, {3}), std::out_of_range);
  CHECK_THROWS_AS(sequence_log_likelihood(m, {-1}), std::out_of_range);
}

TEST_CASE("one-hot embedding round-trips categorical triples") {
  const HmmModel m = builtin_model("k2d3");
  Rng rng(3);
  const TripleSet triples = sample_triples(m, 25, rng);
  const TripleSet vectors = to_vector_mode(triples);
  REQUIRE(vectors.mode == TripleMode::vectors);
  REQUIRE(vectors.size() == triples.size());
  for (int i = 0; i < triples.size(); ++i) {
    CHECK(vectors.x1.col(i) == one_hot(triples.symbols[i][0], m.d));
    CHECK(vectors.x2.col(i) == one_hot(triples.symbols[i][1], m.d));
    CHECK(vectors.x3.col(i) == one_hot(triples.symbols[i][2], m.d));
  }
}

TEST_SUITE_END();
