// Command line front end: data generation, learning, binning and benchmark
// grids, all seeded for bitwise reproducibility.
//
// Exit codes: 0 success, 2 usage, 3 numerical failure, 4 I/O failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shmm/ahk.hpp"
#include "shmm/baum_welch.hpp"
#include "shmm/binning.hpp"
#include "shmm/errors.hpp"
#include "shmm/evalbench.hpp"
#include "shmm/hkz.hpp"
#include "shmm/model_io.hpp"
#include "shmm/moments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

shmm::HmmModel resolve_model(const std::string& spec) {
  if (std::filesystem::exists(spec)) return shmm::load_model(spec);
  if (shmm::is_builtin_model(spec)) return shmm::builtin_model(spec);
  throw std::runtime_error("model '" + spec + "' is neither a file nor a builtin (" +
                           [] {
                             std::string names;
                             for (const auto& n : shmm::builtin_model_names())
                               names += names.empty() ? n : ", " + n;
                             return names;
                           }() +
                           ")");
}

bool is_moment_dump(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw std::runtime_error("cannot open " + path);
  std::string first_token;
  probe >> first_token;
  return first_token == "moments";
}

// Triples file (three symbols per line) or symbol-per-line sequence, which
// is split into consecutive non-overlapping triples.
shmm::TripleSet load_learn_data(const std::string& path, int d) {
  std::ifstream probe(path);
  if (!probe) throw std::runtime_error("cannot open " + path);
  std::string first_line;
  std::getline(probe, first_line);
  std::istringstream is(first_line);
  int tmp;
  int fields = 0;
  while (is >> tmp) ++fields;
  probe.close();

  if (fields == 3) return shmm::load_triples(path, d);
  if (fields == 1) {
    const auto seq = shmm::load_symbols(path, d);
    if (seq.size() < 3) throw std::runtime_error(path + ": need at least 3 symbols");
    shmm::TripleSet triples;
    triples.mode = shmm::TripleMode::categorical;
    triples.d = d;
    for (size_t i = 0; i + 2 < seq.size(); i += 3)
      triples.symbols.push_back({seq[i], seq[i + 1], seq[i + 2]});
    return triples;
  }
  throw std::runtime_error(path + ": expected 1 or 3 symbols per line");
}

void save_estimate(const std::string& path, const std::string& algorithm, int k, int d,
                   const shmm::Matrix& t, const shmm::Matrix& o, const shmm::Vector* pi,
                   const shmm::LearnDiagnostics* diag,
                   const std::vector<double>* loglik_trace) {
  nlohmann::json j;
  j["algorithm"] = algorithm;
  j["k"] = k;
  j["d"] = d;
  auto mat = [](const shmm::Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
      rows.push_back(row);
    }
    return rows;
  };
  j["T"] = mat(t);
  j["O"] = mat(o);
  if (pi) {
    nlohmann::json arr = nlohmann::json::array();
    for (int i = 0; i < pi->size(); ++i) arr.push_back((*pi)[i]);
    j["pi"] = arr;
  } else {
    j["pi"] = nullptr;
  }
  if (diag) {
    j["diagnostics"] = {{"imag_mass", diag->imag_mass},
                        {"offdiag_ratio", diag->offdiag_ratio},
                        {"offdiag_warning", diag->offdiag_warning},
                        {"whitened_sigma_min", diag->whitened_sigma_min},
                        {"whitened_condition", diag->whitened_condition},
                        {"clamped_entries", diag->clamped_entries},
                        {"pi_floor_count", diag->pi_floor_count},
                        {"attempt", diag->attempt}};
  }
  if (loglik_trace) j["loglik_trace"] = *loglik_trace;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

struct GenerateArgs {
  std::string model;
  std::string out;
  int n = 0;
  int length = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  bool sliding = false;
  bool analytic_moments = false;
};

int cmd_generate(const GenerateArgs& args) {
  const shmm::HmmModel model = resolve_model(args.model);
  shmm::Rng rng(args.seed);
  if (args.analytic_moments) {
    shmm::save_moments(shmm::analytic_moments(model), args.out);
    std::cout << "wrote population moments to " << args.out << "\n";
  } else if (args.sigma > 0.0) {
    if (args.length < 1) {
      std::cerr << "generate: --sigma requires --length\n";
      return kExitUsage;
    }
    const auto [seq, path] = shmm::sample_sequence(model, args.length, rng);
    (void)path;
    const auto reals = shmm::generate_gaussian_emissions(seq, args.sigma, rng);
    shmm::save_reals(reals, args.out);
    std::cout << "wrote " << reals.size() << " real values to " << args.out << "\n";
  } else {
    if (args.n < 1) {
      std::cerr << "generate: need --n (triples) or --sigma with --length (reals)\n";
      return kExitUsage;
    }
    const auto triples = shmm::sample_triples(
        model, args.n, rng,
        args.sliding ? shmm::TripleSampling::sliding : shmm::TripleSampling::independent);
    shmm::save_triples(triples, args.out);
    std::cout << "wrote " << triples.size() << " triples to " << args.out << "\n";
  }
  return kExitOk;
}

struct LearnArgs {
  std::string data;
  std::string algo = "ahk";
  std::string out;
  std::string truth;
  std::string dump_moments;
  int k = 0;
  int d = 0;
  int iterations = 3;
  std::uint64_t seed = 0;
};

int cmd_learn(const LearnArgs& args) {
  if (args.algo != "hkz" && args.algo != "ahk" && args.algo != "bw") {
    std::cerr << "learn: unknown algorithm '" << args.algo << "' (hkz | ahk | bw)\n";
    return kExitUsage;
  }
  if ((args.algo == "hkz" || args.algo == "ahk") && args.k > args.d) {
    std::cerr << "learn: spectral algorithms need k <= d\n";
    return kExitUsage;
  }
  const bool from_moments = is_moment_dump(args.data);
  if (from_moments && args.algo == "bw") {
    std::cerr << "learn: EM needs raw triples, not a moment dump\n";
    return kExitUsage;
  }
  shmm::TripleSet data;
  if (!from_moments) {
    data = load_learn_data(args.data, args.d);
    std::cout << "loaded " << data.size() << " triples (d = " << args.d << ")\n";
  }

  shmm::Matrix o_hat, t_hat;
  const shmm::Vector* pi_ptr = nullptr;
  shmm::Vector pi_hat;
  shmm::LearnDiagnostics diag;
  std::vector<double> trace;
  const std::vector<double>* trace_ptr = nullptr;

  if (args.algo == "bw") {
    std::vector<shmm::ObservationSequence> sequences(data.symbols.size());
    for (size_t i = 0; i < data.symbols.size(); ++i)
      sequences[i] = {data.symbols[i][0], data.symbols[i][1], data.symbols[i][2]};
    shmm::BwConfig config;
    config.iterations = args.iterations;
    config.seed = args.seed;
    const shmm::BwEstimate est = shmm::baum_welch(sequences, args.k, args.d, config);
    o_hat = est.model.O;
    t_hat = est.model.T;
    pi_hat = est.model.pi;
    pi_ptr = &pi_hat;
    trace = est.loglik_trace;
    trace_ptr = &trace;
    std::cout << "log-likelihood trace:";
    for (double v : trace) std::cout << ' ' << v;
    std::cout << "\n";
  } else {
    const shmm::MomentSet moments =
        from_moments ? shmm::load_moments(args.data) : shmm::estimate_moments(data);
    if (from_moments) {
      if (moments.d != args.d) {
        std::cerr << "learn: moment dump has d = " << moments.d << ", expected " << args.d
                  << "\n";
        return kExitUsage;
      }
      std::cout << "loaded " << (moments.analytic ? "analytic" : "empirical")
                << " moment dump (d = " << moments.d << ")\n";
    }
    if (!args.dump_moments.empty()) {
      shmm::save_moments(moments, args.dump_moments);
      std::cout << "wrote moment dump to " << args.dump_moments << "\n";
    }
    if (args.algo == "hkz") {
      const shmm::HkzEstimate est = shmm::learn_hkz(moments, args.k, args.seed);
      o_hat = est.O_hat;
      t_hat = est.T_hat;
      pi_hat = est.pi_hat;
      pi_ptr = &pi_hat;
      diag = est.diag;
    } else {
      const shmm::AhkEstimate est = shmm::learn_ahk_retry(moments, args.k, args.seed);
      o_hat = est.O_hat;
      t_hat = est.T_hat;
      diag = est.diag;
    }
    std::cout << "diagnostics: imag_mass=" << diag.imag_mass
              << " offdiag_ratio=" << diag.offdiag_ratio
              << " clamped=" << diag.clamped_entries << " attempt=" << diag.attempt
              << "\n";
    if (diag.offdiag_warning)
      std::cout << "warning: simultaneous diagonalization residual above 0.1\n";
  }

  if (!args.truth.empty()) {
    const shmm::HmmModel truth = resolve_model(args.truth);
    const shmm::ScoreResult score = shmm::score_estimate(o_hat, t_hat, truth);
    shmm::Matrix o_aligned(o_hat.rows(), o_hat.cols());
    for (int j = 0; j < o_hat.cols(); ++j) o_aligned.col(j) = o_hat.col(score.perm[j]);
    std::cout << "aligned err_O=" << score.err_O << " err_T=" << score.err_T
              << " max_abs_err_O=" << (o_aligned - truth.O).cwiseAbs().maxCoeff() << "\n";
  }

  if (!args.out.empty()) {
    save_estimate(args.out, args.algo, args.k, args.d, t_hat, o_hat, pi_ptr,
                  args.algo == "bw" ? nullptr : &diag, trace_ptr);
    std::cout << "wrote estimate to " << args.out << "\n";
  }
  return kExitOk;
}

struct BinArgs {
  std::string data;
  std::string out;
  std::string spec_out;
  int bins = 0;
};

int cmd_bin(const BinArgs& args) {
  const shmm::RealSequence values = shmm::load_reals(args.data);
  const shmm::BinnedSequence binned = shmm::simple_binning(values, args.bins);
  shmm::save_symbols(binned.symbols, args.out);
  const std::string spec_path = args.spec_out.empty() ? args.out + ".binspec.json"
                                                      : args.spec_out;
  shmm::save_binspec(binned.spec, spec_path);
  std::cout << "wrote " << binned.symbols.size() << " symbols (alphabet " << args.bins
            << ") to " << args.out << ", bounds to " << spec_path << "\n";
  return kExitOk;
}

struct BenchArgs {
  std::string preset;
  std::string out_dir = ".";
  int realizations = 0;
  double sigma = 0.1;
  std::uint64_t seed = 0;
  int threads = 0;
};

void print_slopes(const std::vector<shmm::ExperimentRecord>& records,
                  const std::vector<std::string>& algorithms,
                  const std::vector<std::string>& model_ids) {
  for (const auto& model : model_ids) {
    for (const auto& algo : algorithms) {
      for (bool use_t : {false, true}) {
        shmm::SlopeOptions options;
        options.use_err_T = use_t;
        try {
          const auto fit = shmm::fit_loglog_slope(records, algo, model, options);
          std::cout << "slope " << algo << " " << model << " " << (use_t ? "T" : "O")
                    << ": " << fit.slope << " (" << fit.points << " points)\n";
        } catch (const std::invalid_argument&) {
          std::cout << "slope " << algo << " " << model << " " << (use_t ? "T" : "O")
                    << ": insufficient data\n";
        }
      }
    }
  }
}

int cmd_bench(const BenchArgs& args) {
  namespace fs = std::filesystem;
  fs::create_directories(args.out_dir);
  const std::string records_path = (fs::path(args.out_dir) / "results.csv").string();
  const std::string summary_path = (fs::path(args.out_dir) / "summary.csv").string();

  const std::vector<long long> full_grid = {1000, 2500, 5000, 10000, 25000, 50000, 100000};
  std::vector<shmm::ExperimentRecord> records;

  if (args.preset == "k2" || args.preset == "k3") {
    shmm::GridConfig config;
    config.algorithms = {"hkz", "ahk"};
    if (args.preset == "k2")
      config.models = {{"k2d3", shmm::builtin_model("k2d3")},
                       {"k2d6", shmm::builtin_model("k2d6")}};
    else
      config.models = {{"k3d8", shmm::builtin_model("k3d8")},
                       {"k3d10", shmm::builtin_model("k3d10")}};
    config.sample_sizes = full_grid;
    config.realizations = args.realizations > 0 ? args.realizations : 20;
    config.master_seed = args.seed;
    config.threads = args.threads;
    records = shmm::run_grid(config);
    std::vector<std::string> ids;
    for (const auto& [id, m] : config.models) ids.push_back(id);
    print_slopes(records, config.algorithms, ids);
  } else if (args.preset == "bw") {
    shmm::BwComparisonConfig config;
    config.model_id = "k2d3";
    config.model = shmm::builtin_model("k2d3");
    config.realizations = args.realizations > 0 ? args.realizations : 10;
    config.master_seed = args.seed;
    config.threads = args.threads;
    records = shmm::bw_comparison(config);
  } else if (args.preset == "binning") {
    shmm::GridConfig config;
    config.algorithms = {"ahk"};
    config.models = {{"k2d3", shmm::builtin_model("k2d3")},
                     {"k2d6", shmm::builtin_model("k2d6")}};
    config.sample_sizes = full_grid;
    config.realizations = args.realizations > 0 ? args.realizations : 20;
    config.master_seed = args.seed;
    config.threads = args.threads;
    config.sigma = args.sigma;
    records = shmm::run_grid(config);
    std::vector<std::string> ids = {"k2d3", "k2d6"};
    print_slopes(records, config.algorithms, ids);
  } else {
    std::cerr << "bench: unknown preset '" << args.preset
              << "' (k2 | k3 | bw | binning)\n";
    return kExitUsage;
  }

  shmm::write_records_csv(records, records_path);
  shmm::write_summary_csv(records, summary_path);
  int failures = 0;
  for (const auto& r : records)
    if (r.status != "ok") ++failures;
  std::cout << records.size() << " records (" << failures << " failed) -> "
            << records_path << ", " << summary_path << "\n";
  if (failures == static_cast<int>(records.size())) {
    std::cerr << "bench: every cell failed\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral and EM parameter estimation for hidden Markov models"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand(
      "generate", "Sample observation triples or a noisy real-valued sequence");
  generate->add_option("--model", gen.model, "Model file or builtin name")->required();
  generate->add_option("--out", gen.out, "Output path")->required();
  generate->add_option("--n", gen.n, "Number of triples");
  generate->add_option("--length", gen.length, "Sequence length (with --sigma)");
  generate->add_option("--sigma", gen.sigma, "Gaussian emission noise; switches to real output");
  generate->add_option("--seed", gen.seed, "RNG seed")->default_val(0);
  generate->add_flag("--sliding", gen.sliding, "Overlapping triples from one long sequence");
  generate->add_flag("--analytic-moments", gen.analytic_moments,
                     "Write the model's population moments instead of samples");

  LearnArgs learn;
  auto* learn_cmd = app.add_subcommand("learn", "Estimate model parameters from triples");
  learn_cmd->add_option("--data", learn.data, "Triples file (or symbol-per-line sequence)")
      ->required();
  learn_cmd->add_option("--k", learn.k, "Number of states")->required();
  learn_cmd->add_option("--d", learn.d, "Number of observation symbols")->required();
  learn_cmd->add_option("--algo", learn.algo, "hkz | ahk | bw")->default_val("ahk");
  learn_cmd->add_option("--seed", learn.seed, "RNG seed")->default_val(0);
  learn_cmd->add_option("--iterations", learn.iterations, "EM iterations (bw)")->default_val(3);
  learn_cmd->add_option("--out", learn.out, "Estimate output file (JSON)");
  learn_cmd->add_option("--truth", learn.truth, "Reference model for error reporting");
  learn_cmd->add_option("--dump-moments", learn.dump_moments,
                        "Write the estimated moments as diffable text");

  BinArgs bin;
  auto* bin_cmd = app.add_subcommand("bin", "Quantile-bin a real-valued sequence");
  bin_cmd->add_option("--data", bin.data, "Real values, one per line")->required();
  bin_cmd->add_option("--bins", bin.bins, "Number of bins")->required()
      ->check(CLI::Range(2, 1 << 20));
  bin_cmd->add_option("--out", bin.out, "Binned symbol output")->required();
  bin_cmd->add_option("--spec-out", bin.spec_out, "Bound sidecar path (default <out>.binspec.json)");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark grid and write CSVs");
  bench_cmd->add_option("--preset", bench.preset, "k2 | k3 | bw | binning")->required();
  bench_cmd->add_option("--out", bench.out_dir, "Output directory")->default_val(".");
  bench_cmd->add_option("--realizations", bench.realizations, "Realizations per cell");
  bench_cmd->add_option("--sigma", bench.sigma, "Emission noise for the binning preset")
      ->default_val(0.1);
  bench_cmd->add_option("--seed", bench.seed, "Master seed")->default_val(0);
  bench_cmd->add_option("--threads", bench.threads, "Worker threads (0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen);
    if (learn_cmd->parsed()) return cmd_learn(learn);
    if (bin_cmd->parsed()) return cmd_bin(bin);
    if (bench_cmd->parsed()) return cmd_bench(bench);
    return kExitUsage;
  } catch (const shmm::SpectralInstability& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const shmm::DegenerateMoments& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const shmm::DivisionGuard& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    // Degenerate quantiles and malformed grids are argument errors, but the
    // exit taxonomy routes numerical degeneracy to 3.
    const std::string what = e.what();
    if (what.find("degenerate") != std::string::npos) {
      std::cerr << "numerical failure: " << what << "\n";
      return kExitNumerical;
    }
    std::cerr << "error: " << what << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}
