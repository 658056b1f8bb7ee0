#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "shmm/hmm.hpp"
#include "shmm/types.hpp"

namespace shmm {

struct ScoreResult {
  double err_O = 0.0;  // squared Frobenius after column alignment
  double err_T = 0.0;  // same permutation applied as P^T T_hat P
  std::vector<int> perm;
};

// Aligns the estimate's state labels to the truth by the permutation that
// minimizes ||O_hat P - O||_F^2; T_hat is aligned with that same
// permutation so both errors refer to one labeling.
ScoreResult score_estimate(const Matrix& o_hat, const Matrix& t_hat,
                           const HmmModel& truth);

struct ExperimentRecord {
  std::string algorithm;
  std::string model_id;
  long long n = 0;
  int realization = 0;
  std::uint64_t seed = 0;
  double err_O = std::numeric_limits<double>::quiet_NaN();
  double err_T = std::numeric_limits<double>::quiet_NaN();
  double wall_time_s = 0.0;
  std::string status = "ok";
  int attempts = 1;
  int clamped_entries = 0;
  double imag_mass = 0.0;
};

struct GridConfig {
  std::vector<std::string> algorithms;  // "hkz" and/or "ahk"
  std::vector<std::pair<std::string, HmmModel>> models;
  std::vector<long long> sample_sizes;
  int realizations = 20;
  std::uint64_t master_seed = 0;
  int threads = 0;  // 0: SHMM_THREADS env var, else hardware concurrency
  // When sigma > 0, each realization routes its triples through Gaussian
  // emissions followed by quantile binning with `bins` bins (0 = model d)
  // before learning.
  double sigma = 0.0;
  int bins = 0;
};

// One record per (algorithm, model, N, realization). Data are sampled from
// a child seed shared by all algorithms of a cell, so learners see the same
// triples. Learner errors become failed records with a status tag. Results
// are deterministic for a fixed master seed, at any thread count.
std::vector<ExperimentRecord> run_grid(const GridConfig& config);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
  std::vector<long long> sample_sizes;
};

struct SlopeOptions {
  bool use_err_T = false;
  std::vector<long long> exclude_sample_sizes = {1000};
};

// OLS fit of log(mean err) against log(N) over the records of one
// (algorithm, model). Means ignore failed records; N = 1000 is excluded by
// default. Throws std::invalid_argument with fewer than 3 usable points.
SlopeFit fit_loglog_slope(const std::vector<ExperimentRecord>& records,
                          const std::string& algorithm, const std::string& model_id,
                          const SlopeOptions& options = {});

struct BwComparisonConfig {
  std::string model_id;
  HmmModel model;
  std::vector<long long> sample_sizes = {1000, 2500, 5000};
  // Random-init EM only runs on sample sizes in this list.
  std::vector<long long> bw_random_sample_sizes = {1000, 2500, 5000};
  int realizations = 10;
  int iterations = 3;
  std::uint64_t master_seed = 0;
  int threads = 0;
};

// Runs "ahk", "bw-random" and "bw-warm" (EM initialized at the ahk
// estimate) on shared data per cell. EM timing covers the E and M steps;
// spectral timing covers moment estimation plus the learner.
std::vector<ExperimentRecord> bw_comparison(const BwComparisonConfig& config);

void write_records_csv(const std::vector<ExperimentRecord>& records,
                       const std::string& path);
// Per (algorithm, model, N) means and standard deviations over successful
// runs, with log10 columns for plotting.
void write_summary_csv(const std::vector<ExperimentRecord>& records,
                       const std::string& path);

}  // namespace shmm
