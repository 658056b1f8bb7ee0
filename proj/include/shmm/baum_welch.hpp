#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "shmm/hmm.hpp"
#include "shmm/types.hpp"

namespace shmm {

struct ForwardBackwardResult {
  Matrix gamma;            // L x k state posteriors, each row sums to 1
  std::vector<Matrix> xi;  // L-1 pair posteriors, xi[t](j,i) = Pr[h_{t+2}=j, h_{t+1}=i | x]
  double loglik;
};

// Scaled forward-backward pass.
ForwardBackwardResult forward_backward(const HmmModel& model,
                                       const ObservationSequence& seq);

struct BwConfig {
  int iterations = 3;
  std::optional<HmmModel> warm_start;  // random Dirichlet(1) init when absent
  std::uint64_t seed = 0;              // feeds the random init
  // When set, stop early once the log-likelihood gain drops below this;
  // off by default to match the fixed-iteration protocol.
  std::optional<double> loglik_tol;
};

struct BwEstimate {
  HmmModel model;
  std::vector<double> loglik_trace;  // one entry per E step, nondecreasing
  double wall_time_s = 0.0;
};

// Baum-Welch EM over a set of observation sequences. Multinomial M step
// with an additive 1e-10 floor before normalization.
BwEstimate baum_welch(const std::vector<ObservationSequence>& data, int k, int d,
                      const BwConfig& config);

}  // namespace shmm
