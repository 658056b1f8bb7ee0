#include "shmm/binning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shmm {

RealSequence generate_gaussian_emissions(const ObservationSequence& seq,
                                         double sigma, Rng& rng) {
  if (sigma <= 0.0) throw std::invalid_argument("sigma must be > 0");
  RealSequence out(seq.size());
  for (size_t t = 0; t < seq.size(); ++t) {
    const double mean = static_cast<double>(seq[t] + 1);  // 1-indexed symbol value
    out[t] = mean + sigma * rng.normal();
  }
  return out;
}

BinSpec quantile_bounds(const RealSequence& values, int b) {
  if (b < 2) throw std::invalid_argument("quantile_bounds: need at least 2 bins");
  if (static_cast<int>(values.size()) < b)
    throw std::invalid_argument("quantile_bounds: fewer values than bins");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("quantile_bounds: non-finite value");

  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();

  BinSpec spec;
  spec.bounds.resize(b - 1);
  for (int i = 1; i < b; ++i) {
    const double g = static_cast<double>(n - 1) * (static_cast<double>(i) / b);
    const auto lo = static_cast<size_t>(std::floor(g));
    const double frac = g - static_cast<double>(lo);
    const double q = lo + 1 < n ? sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
                                : sorted[lo];
    spec.bounds[i - 1] = q;
  }
  for (size_t i = 1; i < spec.bounds.size(); ++i) {
    if (!(spec.bounds[i - 1] < spec.bounds[i]))
      throw std::invalid_argument("quantile_bounds: degenerate quantiles (colliding bounds)");
  }
  if (b == 2 && sorted.front() == sorted.back())
    throw std::invalid_argument("quantile_bounds: degenerate quantiles (constant input)");
  return spec;
}

ObservationSequence bin_sequence(const RealSequence& values, const BinSpec& spec) {
  for (size_t i = 1; i < spec.bounds.size(); ++i)
    if (!(spec.bounds[i - 1] < spec.bounds[i]))
      throw std::invalid_argument("bin_sequence: bounds not strictly increasing");

  ObservationSequence out(values.size());
  for (size_t t = 0; t < values.size(); ++t) {
    // upper_bound counts #{b_i <= v}, which is the upper-bin tie rule
    const auto it = std::upper_bound(spec.bounds.begin(), spec.bounds.end(), values[t]);
    out[t] = static_cast<int>(it - spec.bounds.begin());
  }
  return out;
}

BinnedSequence simple_binning(const RealSequence& values, int bins) {
  BinnedSequence out;
  out.spec = quantile_bounds(values, bins);
  out.symbols = bin_sequence(values, out.spec);
  return out;
}

}  // namespace shmm
