#pragma once

#include <vector>

#include "shmm/hmm.hpp"
#include "shmm/types.hpp"

namespace shmm {

// Singleton, pair and triple moments of observation triples.
//
// Index conventions (0-indexed symbols):
//   P1[i]      = Pr[x1 = i]
//   P21(i, j)  = Pr[x2 = i, x1 = j]
//   P31(i, j)  = Pr[x3 = i, x1 = j]
//   P32(i, j)  = Pr[x3 = i, x2 = j]
//   P312 is stored as d slices indexed by the middle symbol:
//   P312[a](i, j) = Pr[x3 = i, x1 = j, x2 = a]
// so third_slice(r) is the triple moment with the middle symbol fixed to r.
// For empirical categorical sets, P21/P31/P32 are exact marginal sums of the
// same counts that fill the P312 slices.
struct MomentSet {
  int d = 0;
  bool analytic = false;
  long long sample_count = 0;  // N for empirical sets, 0 for analytic
  Vector P1;
  Matrix P21;
  Matrix P31;
  Matrix P32;
  std::vector<Matrix> P312;

  const Matrix& third_slice(int r) const { return P312[r]; }
};

// Mixing weights and per-view conditional mean matrices of the three-view
// model induced by conditioning on the middle hidden state.
struct ViewMeans {
  Vector w;   // length k
  Matrix M1;  // d x k
  Matrix M2;  // d x k (= O for an HMM)
  Matrix M3;  // d x k (= O T for an HMM)
};

// Empirical frequencies (categorical) or averaged outer products (vector
// mode). Throws std::invalid_argument on an empty triple set.
MomentSet estimate_moments(const TripleSet& triples);

// Applies the third-order tensor as a linear operator:
// result(i, j) = sum_a eta[a] * p312[a](i, j).
Matrix contract_third_order(const std::vector<Matrix>& p312, const Vector& eta);

// w = T pi, M1 = O diag(pi) T^T diag(T pi)^-1, M2 = O, M3 = O T.
// Throws DivisionGuard when an entry of T pi falls below 1e-12.
ViewMeans analytic_view_means(const HmmModel& model);

// Population moments of a model, free of sampling noise. Serves as the
// exact-recovery oracle for the spectral learners.
MomentSet analytic_moments(const HmmModel& model);

}  // namespace shmm
