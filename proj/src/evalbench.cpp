#include "shmm/evalbench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "shmm/ahk.hpp"
#include "shmm/baum_welch.hpp"
#include "shmm/binning.hpp"
#include "shmm/errors.hpp"
#include "shmm/hkz.hpp"
#include "shmm/moments.hpp"
#include "shmm/numerics.hpp"

namespace shmm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SHMM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Index-addressed parallel for; records land in caller-owned slots, so the
// output is independent of scheduling.
void parallel_for(int total, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || total <= 1) {
    for (int i = 0; i < total; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(threads, total);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < total; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string status_of(const std::exception& e) {
  if (dynamic_cast<const DegenerateMoments*>(&e)) return "degenerate_moments";
  if (dynamic_cast<const SpectralInstability*>(&e)) return "spectral_instability";
  if (dynamic_cast<const DivisionGuard*>(&e)) return "division_guard";
  return "error";
}

// Routes a categorical triple set through Gaussian emissions and quantile
// binning with bounds from the pooled values, preserving the triple layout.
TripleSet bin_triples(const TripleSet& triples, double sigma, int bins,
                      std::uint64_t seed) {
  Rng rng(seed);
  const int n = triples.size();
  RealSequence pooled;
  pooled.reserve(3 * static_cast<size_t>(n));
  for (const auto& t : triples.symbols)
    for (int pos = 0; pos < 3; ++pos)
      pooled.push_back(static_cast<double>(t[pos] + 1) + sigma * rng.normal());
  const BinSpec spec = quantile_bounds(pooled, bins);
  const ObservationSequence binned = bin_sequence(pooled, spec);
  TripleSet out;
  out.mode = TripleMode::categorical;
  out.d = bins;
  out.symbols.resize(n);
  for (int i = 0; i < n; ++i)
    out.symbols[i] = {binned[3 * i], binned[3 * i + 1], binned[3 * i + 2]};
  return out;
}

struct LearnerOutput {
  Matrix o_hat;
  Matrix t_hat;
  int attempts = 1;
  int clamped = 0;
  double imag_mass = 0.0;
};

LearnerOutput run_spectral(const std::string& algorithm, const TripleSet& data,
                           int k, std::uint64_t seed) {
  const MomentSet moments = estimate_moments(data);
  LearnerOutput out;
  if (algorithm == "hkz") {
    const HkzEstimate est = learn_hkz(moments, k, seed);
    out.o_hat = est.O_hat;
    out.t_hat = est.T_hat;
    out.clamped = est.diag.clamped_entries;
    out.imag_mass = est.diag.imag_mass;
  } else if (algorithm == "ahk") {
    const AhkEstimate est = learn_ahk_retry(moments, k, seed);
    out.o_hat = est.O_hat;
    out.t_hat = est.T_hat;
    out.attempts = est.diag.attempt;
    out.clamped = est.diag.clamped_entries;
    out.imag_mass = est.diag.imag_mass;
  } else {
    throw std::invalid_argument("unknown algorithm: " + algorithm);
  }
  return out;
}

std::string csv_double(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

ScoreResult score_estimate(const Matrix& o_hat, const Matrix& t_hat,
                           const HmmModel& truth) {
  if (o_hat.rows() != truth.O.rows() || o_hat.cols() != truth.O.cols())
    throw std::invalid_argument("score_estimate: O shape mismatch");
  if (t_hat.rows() != truth.k || t_hat.cols() != truth.k)
    throw std::invalid_argument("score_estimate: T shape mismatch");

  const PermutationAlignment align = best_permutation_alignment(o_hat, truth.O);
  ScoreResult out;
  out.perm = align.perm;
  out.err_O = align.sq_error;
  Matrix t_aligned(truth.k, truth.k);
  for (int i = 0; i < truth.k; ++i)
    for (int j = 0; j < truth.k; ++j) t_aligned(i, j) = t_hat(align.perm[i], align.perm[j]);
  out.err_T = (t_aligned - truth.T).squaredNorm();
  return out;
}

std::vector<ExperimentRecord> run_grid(const GridConfig& config) {
  if (config.algorithms.empty() || config.models.empty() || config.sample_sizes.empty())
    throw std::invalid_argument("run_grid: empty grid");
  if (config.realizations < 1) throw std::invalid_argument("run_grid: realizations >= 1");
  for (const auto& [id, model] : config.models) {
    const auto report = validate_model(model, /*spectral=*/true);
    if (!report.ok())
      throw std::invalid_argument("run_grid: model " + id + ": " + report.to_string());
    if (config.sigma > 0.0 && config.bins > 0 && config.bins != model.d)
      throw std::invalid_argument("run_grid: estimates with bins != d cannot be scored against " + id);
  }

  const int num_algos = static_cast<int>(config.algorithms.size());
  const int num_models = static_cast<int>(config.models.size());
  const int num_ns = static_cast<int>(config.sample_sizes.size());
  const int total = num_algos * num_models * num_ns * config.realizations;

  std::vector<ExperimentRecord> records(total);
  const auto body = [&](int idx) {
    int rest = idx;
    const int rep = rest % config.realizations;
    rest /= config.realizations;
    const int n_idx = rest % num_ns;
    rest /= num_ns;
    const int model_idx = rest % num_models;
    const int algo_idx = rest / num_models;

    const auto& [model_id, model] = config.models[model_idx];
    const long long n = config.sample_sizes[n_idx];
    const std::string& algorithm = config.algorithms[algo_idx];

    // Data seed is shared by all algorithms of the cell.
    const std::uint64_t data_seed =
        derive_seed(config.master_seed, model_idx + 1, static_cast<std::uint64_t>(n), rep + 1);
    const std::uint64_t learner_seed = derive_seed(data_seed, 0xabcdULL, algo_idx + 1);

    ExperimentRecord rec;
    rec.algorithm = algorithm;
    rec.model_id = model_id;
    rec.n = n;
    rec.realization = rep;
    rec.seed = data_seed;

    Rng rng(data_seed);
    TripleSet data = sample_triples(model, static_cast<int>(n), rng);
    try {
      if (config.sigma > 0.0) {
        const int bins = config.bins > 0 ? config.bins : model.d;
        data = bin_triples(data, config.sigma, bins, derive_seed(data_seed, 0xb1ULL));
      }
      const auto start = Clock::now();
      const LearnerOutput out = run_spectral(algorithm, data, model.k, learner_seed);
      rec.wall_time_s = seconds_since(start);
      const ScoreResult score = score_estimate(out.o_hat, out.t_hat, model);
      rec.err_O = score.err_O;
      rec.err_T = score.err_T;
      rec.attempts = out.attempts;
      rec.clamped_entries = out.clamped;
      rec.imag_mass = out.imag_mass;
      rec.status = "ok";
    } catch (const std::exception& e) {
      rec.status = status_of(e);
    }
    records[idx] = std::move(rec);
  };

  parallel_for(total, resolve_threads(config.threads), body);
  return records;
}

SlopeFit fit_loglog_slope(const std::vector<ExperimentRecord>& records,
                          const std::string& algorithm, const std::string& model_id,
                          const SlopeOptions& options) {
  std::map<long long, std::pair<double, int>> sums;  // N -> (sum err, count)
  for (const auto& rec : records) {
    if (rec.algorithm != algorithm || rec.model_id != model_id) continue;
    if (rec.status != "ok") continue;
    if (std::find(options.exclude_sample_sizes.begin(), options.exclude_sample_sizes.end(),
                  rec.n) != options.exclude_sample_sizes.end())
      continue;
    const double err = options.use_err_T ? rec.err_T : rec.err_O;
    auto& [sum, count] = sums[rec.n];
    sum += err;
    count += 1;
  }

  std::vector<double> xs, ys;
  SlopeFit fit;
  for (const auto& [n, sc] : sums) {
    const double mean = sc.first / sc.second;
    if (mean <= 0.0) continue;
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(mean));
    fit.sample_sizes.push_back(n);
  }
  if (xs.size() < 3)
    throw std::invalid_argument("fit_loglog_slope: fewer than 3 usable sample sizes");

  const auto n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.points = static_cast<int>(xs.size());
  return fit;
}

std::vector<ExperimentRecord> bw_comparison(const BwComparisonConfig& config) {
  const auto report = validate_model(config.model, /*spectral=*/true);
  if (!report.ok())
    throw std::invalid_argument("bw_comparison: " + report.to_string());
  if (config.realizations < 1)
    throw std::invalid_argument("bw_comparison: realizations >= 1");

  const int num_ns = static_cast<int>(config.sample_sizes.size());
  const int cells = num_ns * config.realizations;
  // Three candidate rows per cell; bw-random rows are dropped for sample
  // sizes outside its list.
  std::vector<std::vector<ExperimentRecord>> per_cell(cells);

  const auto body = [&](int idx) {
    const int rep = idx % config.realizations;
    const int n_idx = idx / config.realizations;
    const long long n = config.sample_sizes[n_idx];
    const std::uint64_t data_seed =
        derive_seed(config.master_seed, 1, static_cast<std::uint64_t>(n), rep + 1);

    Rng rng(data_seed);
    const TripleSet data = sample_triples(config.model, static_cast<int>(n), rng);
    std::vector<ObservationSequence> sequences(data.symbols.size());
    for (size_t i = 0; i < data.symbols.size(); ++i)
      sequences[i] = {data.symbols[i][0], data.symbols[i][1], data.symbols[i][2]};

    auto make_record = [&](const std::string& algo) {
      ExperimentRecord rec;
      rec.algorithm = algo;
      rec.model_id = config.model_id;
      rec.n = n;
      rec.realization = rep;
      rec.seed = data_seed;
      return rec;
    };

    auto& rows = per_cell[idx];

    // Spectral baseline; its estimate warm-starts the second EM run.
    ExperimentRecord ahk_rec = make_record("ahk");
    Matrix ahk_O, ahk_T;
    bool ahk_ok = false;
    try {
      const auto start = Clock::now();
      const MomentSet moments = estimate_moments(data);
      const AhkEstimate est =
          learn_ahk_retry(moments, config.model.k, derive_seed(data_seed, 0xaaULL));
      ahk_rec.wall_time_s = seconds_since(start);
      const ScoreResult score = score_estimate(est.O_hat, est.T_hat, config.model);
      ahk_rec.err_O = score.err_O;
      ahk_rec.err_T = score.err_T;
      ahk_rec.attempts = est.diag.attempt;
      ahk_rec.clamped_entries = est.diag.clamped_entries;
      ahk_rec.imag_mass = est.diag.imag_mass;
      ahk_O = est.O_hat;
      ahk_T = est.T_hat;
      ahk_ok = true;
    } catch (const std::exception& e) {
      ahk_rec.status = status_of(e);
    }
    rows.push_back(ahk_rec);

    const bool run_random =
        std::find(config.bw_random_sample_sizes.begin(), config.bw_random_sample_sizes.end(),
                  n) != config.bw_random_sample_sizes.end();
    if (run_random) {
      ExperimentRecord rec = make_record("bw-random");
      try {
        BwConfig bw;
        bw.iterations = config.iterations;
        bw.seed = derive_seed(data_seed, 0xbbULL);
        const auto start = Clock::now();
        const BwEstimate est = baum_welch(sequences, config.model.k, config.model.d, bw);
        rec.wall_time_s = seconds_since(start);
        const ScoreResult score = score_estimate(est.model.O, est.model.T, config.model);
        rec.err_O = score.err_O;
        rec.err_T = score.err_T;
      } catch (const std::exception& e) {
        rec.status = status_of(e);
      }
      rows.push_back(rec);
    }

    ExperimentRecord warm = make_record("bw-warm");
    if (ahk_ok) {
      try {
        HmmModel init;
        init.k = config.model.k;
        init.d = config.model.d;
        init.O = ahk_O;
        init.T = ahk_T;
        // The spectral estimate carries no initial distribution; start
        // uniform and let the first M step move it.
        init.pi = Vector::Constant(config.model.k, 1.0 / config.model.k);
        BwConfig bw;
        bw.iterations = config.iterations;
        bw.warm_start = init;
        const auto start = Clock::now();
        const BwEstimate est = baum_welch(sequences, config.model.k, config.model.d, bw);
        warm.wall_time_s = seconds_since(start);
        const ScoreResult score = score_estimate(est.model.O, est.model.T, config.model);
        warm.err_O = score.err_O;
        warm.err_T = score.err_T;
      } catch (const std::exception& e) {
        warm.status = status_of(e);
      }
    } else {
      warm.status = "upstream_failed";
    }
    rows.push_back(warm);
  };

  parallel_for(cells, resolve_threads(config.threads), body);

  std::vector<ExperimentRecord> records;
  for (auto& rows : per_cell)
    for (auto& rec : rows) records.push_back(std::move(rec));
  return records;
}

void write_records_csv(const std::vector<ExperimentRecord>& records,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "algorithm,model,N,realization,seed,err_O,err_T,wall_time_s,status,"
         "attempts,clamped_entries,imag_mass\n";
  for (const auto& r : records) {
    out << r.algorithm << ',' << r.model_id << ',' << r.n << ',' << r.realization << ','
        << r.seed << ',' << csv_double(r.err_O) << ',' << csv_double(r.err_T) << ','
        << csv_double(r.wall_time_s) << ',' << r.status << ',' << r.attempts << ','
        << r.clamped_entries << ',' << csv_double(r.imag_mass) << '\n';
  }
}

void write_summary_csv(const std::vector<ExperimentRecord>& records,
                       const std::string& path) {
  struct Group {
    int runs = 0;
    int failures = 0;
    double sum_O = 0, sum_O2 = 0, sum_T = 0, sum_T2 = 0, sum_time = 0;
  };
  std::map<std::tuple<std::string, std::string, long long>, Group> groups;
  for (const auto& r : records) {
    auto& g = groups[{r.algorithm, r.model_id, r.n}];
    ++g.runs;
    if (r.status != "ok") {
      ++g.failures;
      continue;
    }
    g.sum_O += r.err_O;
    g.sum_O2 += r.err_O * r.err_O;
    g.sum_T += r.err_T;
    g.sum_T2 += r.err_T * r.err_T;
    g.sum_time += r.wall_time_s;
  }

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "algorithm,model,N,runs,failures,mean_err_O,std_err_O,mean_err_T,std_err_T,"
         "mean_wall_time_s,log10_N,log10_mean_err_O,log10_mean_err_T\n";
  for (const auto& [key, g] : groups) {
    const auto& [algo, model, n] = key;
    const int ok = g.runs - g.failures;
    const double mean_O = ok > 0 ? g.sum_O / ok : std::numeric_limits<double>::quiet_NaN();
    const double mean_T = ok > 0 ? g.sum_T / ok : std::numeric_limits<double>::quiet_NaN();
    const double var_O = ok > 1 ? (g.sum_O2 - ok * mean_O * mean_O) / (ok - 1) : 0.0;
    const double var_T = ok > 1 ? (g.sum_T2 - ok * mean_T * mean_T) / (ok - 1) : 0.0;
    const double mean_time =
        ok > 0 ? g.sum_time / ok : std::numeric_limits<double>::quiet_NaN();
    out << algo << ',' << model << ',' << n << ',' << g.runs << ',' << g.failures << ','
        << csv_double(mean_O) << ',' << csv_double(std::sqrt(std::max(0.0, var_O))) << ','
        << csv_double(mean_T) << ',' << csv_double(std::sqrt(std::max(0.0, var_T))) << ','
        << csv_double(mean_time) << ',' << csv_double(std::log10(static_cast<double>(n)))
        << ',' << csv_double(std::log10(mean_O)) << ',' << csv_double(std::log10(mean_T))
        << '\n';
  }
}

}  // namespace shmm
