#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "shmm/baum_welch.hpp"
#include "shmm/evalbench.hpp"
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

std::vector<ObservationSequence> triples_as_sequences(const TripleSet& t) {
  std::vector<ObservationSequence> out(t.symbols.size());
  for (size_t i = 0; i < t.symbols.size(); ++i)
    out[i] = {t.symbols[i][0], t.symbols[i][1], t.symbols[i][2]};
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("baum_welch");

TEST_CASE("deterministic chain pins all posteriors") {
  const auto fb = forward_backward(identity_model(), {0, 0});
  CHECK(fb.loglik == doctest::Approx(0.0));
  for (int t = 0; t < 2; ++t) {
    CHECK(fb.gamma(t, 0) == doctest::Approx(1.0));
    CHECK(fb.gamma(t, 1) == doctest::Approx(0.0));
  }
  REQUIRE(fb.xi.size() == 1);
  CHECK(fb.xi[0](0, 0) == doctest::Approx(1.0));
}

TEST_CASE("length-1 posteriors follow Bayes' rule") {
  const HmmModel m = builtin_model("k2d3");
  const auto fb = forward_backward(m, {0});
  const double denominator = m.O(0, 0) * m.pi[0] + m.O(0, 1) * m.pi[1];
  CHECK(fb.gamma(0, 0) == doctest::Approx(m.O(0, 0) * m.pi[0] / denominator).epsilon(1e-12));
  CHECK(fb.gamma(0, 1) == doctest::Approx(m.O(0, 1) * m.pi[1] / denominator).epsilon(1e-12));
  CHECK(fb.xi.empty());
}

TEST_CASE("posteriors and likelihood match path enumeration") {
  const HmmModel m = builtin_model("k2d3");
  const ObservationSequence seq = {0, 1, 2, 1, 0};
  const auto fb = forward_backward(m, seq);
  CHECK(fb.loglik ==
        doctest::Approx(std::log(oracle::sequence_probability(m, seq))).epsilon(1e-10));
  CHECK(fb.loglik == doctest::Approx(sequence_log_likelihood(m, seq)).epsilon(1e-12));

  const auto brute = oracle::posteriors(m, seq);
  CHECK((fb.gamma - brute.gamma).cwiseAbs().maxCoeff() <= 1e-10);
  for (size_t t = 0; t < fb.xi.size(); ++t)
    CHECK((fb.xi[t] - brute.xi[t]).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("posteriors match enumeration on random models") {
  Rng rng(404);
  for (int trial = 0; trial < 6; ++trial) {
    const int k = 2 + trial % 2;
    const HmmModel m = oracle::random_spectral_model(k, k + 1, rng);
    ObservationSequence seq;
    for (int t = 0; t < 5; ++t)
      seq.push_back(static_cast<int>(rng.uniform01() * m.d));
    const auto fb = forward_backward(m, seq);
    const auto brute = oracle::posteriors(m, seq);
    CHECK((fb.gamma - brute.gamma).cwiseAbs().maxCoeff() <= 1e-10);
    for (size_t t = 0; t < fb.xi.size(); ++t)
      CHECK((fb.xi[t] - brute.xi[t]).cwiseAbs().maxCoeff() <= 1e-10);
    for (int t = 0; t < 5; ++t)
      CHECK(fb.gamma.row(t).sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& xi : fb.xi) CHECK(xi.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("EM log-likelihood trace never decreases") {
  const HmmModel m = builtin_model("k2d3");
  Rng rng(5150);
  const auto data = triples_as_sequences(sample_triples(m, 500, rng));
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    BwConfig config;
    config.iterations = 6;
    config.seed = seed;
    const BwEstimate est = baum_welch(data, 2, 3, config);
    REQUIRE(est.loglik_trace.size() == 6);
    for (size_t i = 1; i < est.loglik_trace.size(); ++i)
      CHECK(est.loglik_trace[i] >= est.loglik_trace[i - 1] - 1e-8);
  }
}

TEST_CASE("EM on deterministic data is monotone from a random start") {
  Rng rng(33);
  const auto data = triples_as_sequences(sample_triples(identity_model(), 100, rng));
  BwConfig config;
  config.iterations = 4;
  config.seed = 9;
  const BwEstimate est = baum_welch(data, 2, 2, config);
  for (size_t i = 1; i < est.loglik_trace.size(); ++i)
    CHECK(est.loglik_trace[i] >= est.loglik_trace[i - 1] - 1e-8);
}

TEST_CASE("M-step outputs are column stochastic") {
  const HmmModel m = builtin_model("k2d6");
  Rng rng(8);
  const auto data = triples_as_sequences(sample_triples(m, 300, rng));
  BwConfig config;
  config.iterations = 2;
  config.seed = 4;
  const BwEstimate est = baum_welch(data, 2, 6, config);
  CHECK(validate_model(est.model).ok());
}

TEST_CASE("a warm start at the truth stays near the truth") {
  const HmmModel m = builtin_model("k2d3");
  Rng rng(23);
  const auto triples = sample_triples(m, 100000, rng);
  const auto data = triples_as_sequences(triples);

  BwConfig config;
  config.iterations = 3;
  config.warm_start = m;
  const BwEstimate est = baum_welch(data, 2, 3, config);
  const ScoreResult after = score_estimate(est.model.O, est.model.T, m);
  // EM moves from the truth toward the sample's maximum likelihood, which at
  // N = 1e5 deviates from the generator by O(1/N) in squared error.
  CHECK(after.err_O <= 1e-3);
  CHECK(after.err_T <= 1e-2);
  for (size_t i = 1; i < est.loglik_trace.size(); ++i)
    CHECK(est.loglik_trace[i] >= est.loglik_trace[i - 1] - 1e-8);
}

TEST_CASE("k may exceed d") {
  // no spectral condition here, so an overcomplete state space is legal
  Rng rng(3);
  const auto data = triples_as_sequences(sample_triples(builtin_model("k2d3"), 50, rng));
  BwConfig config;
  config.iterations = 1;
  config.seed = 1;
  const BwEstimate est = baum_welch(data, 4, 3, config);
  CHECK(est.model.k == 4);
  for (int j = 0; j < 4; ++j) {
    CHECK(est.model.T.col(j).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(est.model.O.col(j).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(est.model.T.col(j).minCoeff() >= 0.0);
    CHECK(est.model.O.col(j).minCoeff() >= 0.0);
  }
  CHECK(est.model.pi.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("input validation") {
  BwConfig config;
  CHECK_THROWS_AS(baum_welch({}, 2, 3, config), std::invalid_argument);
  config.iterations = 0;
  CHECK_THROWS_AS(baum_welch({{0, 1}}, 2, 3, config), std::invalid_argument);
  const HmmModel m = builtin_model("k2d3");
  CHECK_THROWS_AS(forward_backward(m, {0, 5}), std::out_of_range);
  CHECK_THROWS_AS(forward_backward(m, {}), std::invalid_argument);
}

TEST_SUITE_END();
