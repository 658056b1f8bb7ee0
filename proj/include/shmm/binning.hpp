#pragma once

#include <string>
#include <vector>

#include "shmm/hmm.hpp"
#include "shmm/rng.hpp"

namespace shmm {

using RealSequence = std::vector<double>;

// Bin bounds for b bins: b-1 strictly increasing thresholds. A value v maps
// to bin 1 + #{bounds <= v} (ties go to the upper bin).
struct BinSpec {
  std::vector<double> bounds;
  // Quantile estimator identifier, kept alongside serialized bounds.
  std::string convention = "order-statistics-linear-(n-1)p";
  int bins() const { return static_cast<int>(bounds.size()) + 1; }
};

// y_t ~ Normal(mean = 1-indexed symbol value of x_t, sd = sigma).
RealSequence generate_gaussian_emissions(const ObservationSequence& seq,
                                         double sigma, Rng& rng);

// Empirical quantiles at cumulative probabilities i/b, i = 1..b-1, by linear
// interpolation of order statistics at g = (n-1)p. Throws
// std::invalid_argument when bounds collide (too few distinct values).
BinSpec quantile_bounds(const RealSequence& values, int b);

// Order-preserving discretization against a BinSpec; returns 0-indexed
// symbols over an alphabet of spec.bins() symbols.
ObservationSequence bin_sequence(const RealSequence& values, const BinSpec& spec);

struct BinnedSequence {
  ObservationSequence symbols;
  BinSpec spec;  // retained so finer-than-target binnings stay usable downstream
};

// quantile_bounds + bin_sequence. bins may exceed the nominal observation
// count of the generating model (fine mode).
BinnedSequence simple_binning(const RealSequence& values, int bins);

}  // namespace shmm
