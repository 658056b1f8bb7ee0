#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "shmm/rng.hpp"
#include "shmm/types.hpp"

namespace shmm {

// Hidden Markov model over k states and d observation symbols.
//   T: k x k column-stochastic, T(i,j) = Pr[h_{t+1} = i | h_t = j]
//   O: d x k column-stochastic, O(i,j) = Pr[x_t = i | h_t = j]
//   pi: initial state distribution, length k
// States and symbols are 0-indexed in memory; every file format and CLI
// surface uses 1-indexed symbols.
struct HmmModel {
  int k = 0;
  int d = 0;
  Matrix T;
  Matrix O;
  Vector pi;
};

using ObservationSequence = std::vector<int>;
using HiddenPath = std::vector<int>;

enum class TripleMode { categorical, vectors };

// N observation triples (x1, x2, x3). Categorical triples hold symbol
// indices; vector mode holds one observation per column of x1/x2/x3 and is
// the input form for moment estimation from non-one-hot data.
struct TripleSet {
  TripleMode mode = TripleMode::categorical;
  int d = 0;
  std::vector<std::array<int, 3>> symbols;
  Matrix x1, x2, x3;  // d x N, vector mode only

  int size() const {
    return mode == TripleMode::categorical ? static_cast<int>(symbols.size())
                                           : static_cast<int>(x1.cols());
  }
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

// Checks simplex constraints (tolerance 1e-12 on column sums), d >= k, and,
// when spectral is set, the rank conditions rank(O) = rank(T) = k (singular
// values above 1e-10 relative to the largest) and min(pi) > 0.
ValidationReport validate_model(const HmmModel& model, bool spectral = false);

// Samples h1 ~ pi, h_{t+1} ~ T(., h_t), x_t ~ O(., h_t).
std::pair<ObservationSequence, HiddenPath> sample_sequence(const HmmModel& model,
                                                           int length, Rng& rng);

enum class TripleSampling {
  independent,  // N fresh length-3 sequences, each with h1 ~ pi (default)
  sliding       // overlapping windows of one length N+2 sequence
};

TripleSet sample_triples(const HmmModel& model, int n, Rng& rng,
                         TripleSampling sampling = TripleSampling::independent);

// log p(x_1..x_L | model) by the scaled forward recursion. Returns -inf for
// sequences of probability zero.
double sequence_log_likelihood(const HmmModel& model, const ObservationSequence& seq);

Vector one_hot(int symbol, int d);

// Standard-basis embedding of categorical triples, for the vector-mode
// moment estimator.
TripleSet to_vector_mode(const TripleSet& triples);

}  // namespace shmm
