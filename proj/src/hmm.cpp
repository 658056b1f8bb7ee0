#include "shmm/hmm.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "shmm/numerics.hpp"

namespace shmm {

namespace {

constexpr double kStochasticTol = 1e-12;
constexpr double kRankTol = 1e-10;  // relative to the top singular value

void check_column_stochastic(const Matrix& m, const std::string& name,
                             std::vector<std::string>& out) {
  for (int j = 0; j < m.cols(); ++j) {
    if ((m.col(j).array() < 0.0).any()) {
      out.push_back(name + " column " + std::to_string(j + 1) + " has negative entries");
      continue;
    }
    if (std::abs(m.col(j).sum() - 1.0) > kStochasticTol) {
      out.push_back(name + " column " + std::to_string(j + 1) + " not stochastic");
    }
  }
}

int numerical_rank(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s[0] <= 0.0) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s[i] > kRankTol * s[0]) ++r;
  }
  return r;
}

}  // namespace

std::string ValidationReport::to_string() const {
  if (ok()) return "valid";
  std::ostringstream os;
  for (size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i];
  }
  return os.str();
}

ValidationReport validate_model(const HmmModel& model, bool spectral) {
  ValidationReport report;
  auto& v = report.violations;
  if (model.k < 1) v.push_back("k must be >= 1");
  if (model.d < model.k) v.push_back("d must be >= k");
  if (model.T.rows() != model.k || model.T.cols() != model.k)
    v.push_back("T is not k x k");
  if (model.O.rows() != model.d || model.O.cols() != model.k)
    v.push_back("O is not d x k");
  if (model.pi.size() != model.k) v.push_back("pi does not have length k");
  if (!v.empty()) return report;  // shape errors mask the rest

  check_column_stochastic(model.T, "T", v);
  check_column_stochastic(model.O, "O", v);
  if ((model.pi.array() < 0.0).any() ||
      std::abs(model.pi.sum() - 1.0) > kStochasticTol) {
    v.push_back("pi not in the probability simplex");
  }

  if (spectral) {
    if (numerical_rank(model.O) < model.k) v.push_back("rank(O) < k");
    if (numerical_rank(model.T) < model.k) v.push_back("rank(T) < k");
    if (model.pi.minCoeff() <= 0.0) v.push_back("pi has a zero entry");
  }
  return report;
}

std::pair<ObservationSequence, HiddenPath> sample_sequence(const HmmModel& model,
                                                           int length, Rng& rng) {
  auto report = validate_model(model);
  if (!report.ok()) throw std::invalid_argument("invalid model: " + report.to_string());
  if (length < 1) throw std::invalid_argument("sequence length must be >= 1");

  ObservationSequence xs(length);
  HiddenPath hs(length);
  int h = rng.categorical(model.pi);
  for (int t = 0; t < length; ++t) {
    hs[t] = h;
    xs[t] = rng.categorical(model.O.col(h));
    if (t + 1 < length) h = rng.categorical(model.T.col(h));
  }
  return {std::move(xs), std::move(hs)};
}

TripleSet sample_triples(const HmmModel& model, int n, Rng& rng,
                         TripleSampling sampling) {
  auto report = validate_model(model);
  if (!report.ok()) throw std::invalid_argument("invalid model: " + report.to_string());
  if (n < 1) throw std::invalid_argument("triple count must be >= 1");

  TripleSet out;
  out.mode = TripleMode::categorical;
  out.d = model.d;
  out.symbols.resize(n);
  if (sampling == TripleSampling::independent) {
    for (int i = 0; i < n; ++i) {
      int h = rng.categorical(model.pi);
      for (int t = 0; t < 3; ++t) {
        out.symbols[i][t] = rng.categorical(model.O.col(h));
        if (t < 2) h = rng.categorical(model.T.col(h));
      }
    }
  } else {
    auto [xs, hs] = sample_sequence(model, n + 2, rng);
    for (int i = 0; i < n; ++i) out.symbols[i] = {xs[i], xs[i + 1], xs[i + 2]};
  }
  return out;
}

double sequence_log_likelihood(const HmmModel& model, const ObservationSequence& seq) {
  auto report = validate_model(model);
  if (!report.ok()) throw std::invalid_argument("invalid model: " + report.to_string());
  if (seq.empty()) throw std::invalid_argument("empty sequence");

  Vector alpha(model.k);
  double loglik = 0.0;
  for (size_t t = 0; t < seq.size(); ++t) {
    const int x = seq[t];
    if (x < 0 || x >= model.d) throw std::out_of_range("symbol out of range");
    if (t == 0) {
      alpha = model.O.row(x).transpose().cwiseProduct(model.pi);
    } else {
      alpha = model.O.row(x).transpose().cwiseProduct(model.T * alpha);
    }
    const double c = alpha.sum();
    if (c <= 0.0) return -std::numeric_limits<double>::infinity();
    alpha /= c;
    loglik += std::log(c);
  }
  return loglik;
}

Vector one_hot(int symbol, int d) {
  if (symbol < 0 || symbol >= d) throw std::out_of_range("symbol out of range");
  Vector e = Vector::Zero(d);
  e[symbol] = 1.0;
  return e;
}

TripleSet to_vector_mode(const TripleSet& triples) {
  if (triples.mode == TripleMode::vectors) return triples;
  const int n = triples.size();
  TripleSet out;
  out.mode = TripleMode::vectors;
  out.d = triples.d;
  out.x1 = Matrix::Zero(triples.d, n);
  out.x2 = Matrix::Zero(triples.d, n);
  out.x3 = Matrix::Zero(triples.d, n);
  for (int i = 0; i < n; ++i) {
    out.x1(triples.symbols[i][0], i) = 1.0;
    out.x2(triples.symbols[i][1], i) = 1.0;
    out.x3(triples.symbols[i][2], i) = 1.0;
  }
  return out;
}

}  // namespace shmm
