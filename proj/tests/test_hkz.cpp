#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "shmm/errors.hpp"
#include "shmm/evalbench.hpp"
#include "shmm/hkz.hpp"
#include "shmm/model_io.hpp"
#include "shmm/numerics.hpp"

using namespace shmm;

TEST_SUITE_BEGIN("hkz");

TEST_CASE("population moments recover the k=2 models exactly") {
  for (const auto& name : {"k2d3", "k2d6"}) {
    CAPTURE(name);
    const HmmModel m = builtin_model(name);
    const HkzEstimate est = learn_hkz(analytic_moments(m), m.k, /*seed=*/1);

    const auto align = best_permutation_alignment(est.O_hat, m.O);
    CHECK((align.aligned - m.O).cwiseAbs().maxCoeff() <= 1e-6);

    Matrix t_aligned(m.k, m.k);
    Vector pi_aligned(m.k);
    for (int i = 0; i < m.k; ++i) {
      pi_aligned[i] = est.pi_hat[align.perm[i]];
      for (int j = 0; j < m.k; ++j)
        t_aligned(i, j) = est.T_hat(align.perm[i], align.perm[j]);
    }
    CHECK((t_aligned - m.T).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((pi_aligned - m.pi).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(est.diag.clamped_entries == 0);
    CHECK(est.diag.pi_floor_count == 0);
    CHECK_FALSE(est.diag.offdiag_warning);
  }
}

TEST_CASE("population recovery extends to every bundled model") {
  for (const auto& name : builtin_model_names()) {
    CAPTURE(name);
    const HmmModel m = builtin_model(name);
    const HkzEstimate est = learn_hkz(analytic_moments(m), m.k, /*seed=*/3);
    const ScoreResult score = score_estimate(est.O_hat, est.T_hat, m);
    CHECK(score.err_O <= 1e-12);
    CHECK(score.err_T <= 1e-12);
  }
}

TEST_CASE("population recovery on random spectral models up to k=3") {
  Rng rng(555);
  for (int trial = 0; trial < 10; ++trial) {
    const int k = 2 + trial % 2;
    const int d = k + 1 + trial % 3;
    const HmmModel m = oracle::random_spectral_model(k, d, rng);
    const HkzEstimate est = learn_hkz(analytic_moments(m), k, rng.raw());
    const auto align = best_permutation_alignment(est.O_hat, m.O);
    CHECK((align.aligned - m.O).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("operator eigenvalues are invariant to rotating the whitening basis") {
  const HmmModel m = builtin_model("k2d3");
  const MomentSet moments = analytic_moments(m);
  const Matrix u = truncated_svd(moments.P21, m.k).U;

  Rng rng(10);
  const Matrix q = random_rotation(m.k, rng);
  for (int r = 0; r < m.d; ++r) {
    const auto base = eigen_general(hkz_operator(moments, u, r));
    const auto rotated = eigen_general(hkz_operator(moments, Matrix(u * q), r));
    std::vector<double> a, b;
    for (int i = 0; i < m.k; ++i) {
      a.push_back(base.values[i].real());
      b.push_back(rotated.values[i].real());
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (int i = 0; i < m.k; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
  }
}

TEST_CASE("operator eigenvalues are the rows of O in population") {
  const HmmModel m = builtin_model("k2d3");
  const MomentSet moments = analytic_moments(m);
  const Matrix u = truncated_svd(moments.P21, m.k).U;
  for (int r = 0; r < m.d; ++r) {
    const auto eig = eigen_general(hkz_operator(moments, u, r));
    std::vector<double> vals = {eig.values[0].real(), eig.values[1].real()};
    std::sort(vals.begin(), vals.end());
    std::vector<double> expected = {m.O(r, 0), m.O(r, 1)};
    std::sort(expected.begin(), expected.end());
    CHECK(vals[0] == doctest::Approx(expected[0]).epsilon(1e-9));
    CHECK(vals[1] == doctest::Approx(expected[1]).epsilon(1e-9));
  }
}

TEST_CASE("estimates are deterministic in the seed") {
  const HmmModel m = builtin_model("k2d3");
  Rng rng(2);
  const MomentSet moments = estimate_moments(sample_triples(m, 5000, rng));
  const HkzEstimate a = learn_hkz(moments, m.k, 42);
  const HkzEstimate b = learn_hkz(moments, m.k, 42);
  CHECK((a.O_hat - b.O_hat).norm() == 0.0);
  CHECK((a.T_hat - b.T_hat).norm() == 0.0);
  CHECK((a.pi_hat - b.pi_hat).norm() == 0.0);
}

TEST_CASE("post-processing leaves stochastic estimates") {
  const HmmModel m = builtin_model("k2d6");
  Rng rng(6);
  const MomentSet moments = estimate_moments(sample_triples(m, 2000, rng));
  const HkzEstimate est = learn_hkz(moments, m.k, 5);
  for (int j = 0; j < m.k; ++j) {
    CHECK(est.O_hat.col(j).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(est.T_hat.col(j).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(est.O_hat.col(j).minCoeff() >= 0.0);
    CHECK(est.T_hat.col(j).minCoeff() >= 0.0);
  }
  CHECK(est.pi_hat.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(est.pi_hat.minCoeff() >= 0.0);
}

TEST_CASE("degenerate moments are rejected") {
  // rank-1 moments cannot support a k=2 whitening
  MomentSet flat;
  flat.d = 3;
  flat.P1 = Vector::Constant(3, 1.0 / 3);
  flat.P21 = flat.P1 * flat.P1.transpose();
  flat.P31 = flat.P21;
  flat.P32 = flat.P21;
  flat.P312.assign(3, flat.P21 / 3.0);
  CHECK_THROWS_AS(learn_hkz(flat, 2, 0), DegenerateMoments);
}

TEST_CASE("k out of range is rejected") {
  const MomentSet moments = analytic_moments(builtin_model("k2d3"));
  CHECK_THROWS_AS(learn_hkz(moments, 4, 0), std::invalid_argument);
  CHECK_THROWS_AS(learn_hkz(moments, 0, 0), std::invalid_argument);
}

TEST_SUITE_END();
