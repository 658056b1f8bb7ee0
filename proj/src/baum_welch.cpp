#include "shmm/baum_welch.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace shmm {

namespace {

constexpr double kCountFloor = 1e-10;

// Dirichlet(1) columns: normalized -log(u) draws.
HmmModel random_init(int k, int d, std::uint64_t seed) {
  Rng rng(seed);
  HmmModel m;
  m.k = k;
  m.d = d;
  auto draw_column = [&](int rows) {
    Vector c(rows);
    for (int i = 0; i < rows; ++i) c[i] = -std::log1p(-rng.uniform01());
    return Vector(c / c.sum());
  };
  m.T.resize(k, k);
  for (int j = 0; j < k; ++j) m.T.col(j) = draw_column(k);
  m.O.resize(d, k);
  for (int j = 0; j < k; ++j) m.O.col(j) = draw_column(d);
  m.pi = draw_column(k);
  return m;
}

// Exact zeros in a warm start (e.g. clamped spectral estimates) would pin
// events at probability zero and can zero out whole scaling factors; the
// floor keeps every path admissible.
void floor_model(HmmModel& m) {
  m.T = m.T.array().max(kCountFloor);
  m.O = m.O.array().max(kCountFloor);
  m.pi = m.pi.array().max(kCountFloor);
  for (int j = 0; j < m.k; ++j) {
    m.T.col(j) /= m.T.col(j).sum();
    m.O.col(j) /= m.O.col(j).sum();
  }
  m.pi /= m.pi.sum();
}

}  // namespace

ForwardBackwardResult forward_backward(const HmmModel& model,
                                       const ObservationSequence& seq) {
  const int k = model.k;
  const int len = static_cast<int>(seq.size());
  if (len == 0) throw std::invalid_argument("forward_backward: empty sequence");
  for (int x : seq)
    if (x < 0 || x >= model.d) throw std::out_of_range("symbol out of range");

  Matrix alpha(len, k);
  Vector scale(len);
  for (int t = 0; t < len; ++t) {
    Vector a = t == 0
                   ? Vector(model.O.row(seq[0]).transpose().cwiseProduct(model.pi))
                   : Vector(model.O.row(seq[t]).transpose().cwiseProduct(
                         model.T * alpha.row(t - 1).transpose()));
    const double c = a.sum();
    if (c <= 0.0)
      throw std::domain_error("forward_backward: sequence has zero probability");
    alpha.row(t) = (a / c).transpose();
    scale[t] = c;
  }

  Matrix beta(len, k);
  beta.row(len - 1).setOnes();
  for (int t = len - 2; t >= 0; --t) {
    const Vector emitted = model.O.row(seq[t + 1]).transpose().cwiseProduct(
        beta.row(t + 1).transpose());
    beta.row(t) = (model.T.transpose() * emitted).transpose() / scale[t + 1];
  }

  ForwardBackwardResult out;
  out.gamma = alpha.cwiseProduct(beta);
  out.xi.resize(len > 1 ? len - 1 : 0);
  for (int t = 0; t + 1 < len; ++t) {
    // xi[t](j, i) = Pr[h_{t+2} = j, h_{t+1} = i | x], matching T's column
    // convention.
    const Vector emitted = model.O.row(seq[t + 1]).transpose().cwiseProduct(
        beta.row(t + 1).transpose());
    out.xi[t] = (emitted * alpha.row(t)).cwiseProduct(model.T) / scale[t + 1];
  }
  out.loglik = scale.array().log().sum();
  return out;
}

BwEstimate baum_welch(const std::vector<ObservationSequence>& data, int k, int d,
                      const BwConfig& config) {
  if (data.empty()) throw std::invalid_argument("baum_welch: empty data");
  if (config.iterations < 1) throw std::invalid_argument("baum_welch: iterations must be >= 1");
  for (const auto& seq : data)
    if (seq.empty()) throw std::invalid_argument("baum_welch: empty sequence in data");

  const auto start = std::chrono::steady_clock::now();

  HmmModel model = config.warm_start ? *config.warm_start : random_init(k, d, config.seed);
  if (model.k != k || model.d != d)
    throw std::invalid_argument("baum_welch: warm start has wrong dimensions");
  floor_model(model);

  BwEstimate out;
  for (int iter = 0; iter < config.iterations; ++iter) {
    Matrix t_counts = Matrix::Constant(k, k, kCountFloor);
    Matrix o_counts = Matrix::Constant(d, k, kCountFloor);
    Vector pi_counts = Vector::Constant(k, kCountFloor);
    double loglik = 0.0;

    for (const auto& seq : data) {
      const auto fb = forward_backward(model, seq);
      loglik += fb.loglik;
      pi_counts += fb.gamma.row(0).transpose();
      for (const auto& xi : fb.xi) t_counts += xi;
      for (size_t t = 0; t < seq.size(); ++t)
        o_counts.row(seq[t]) += fb.gamma.row(static_cast<int>(t));
    }

    out.loglik_trace.push_back(loglik);
    for (int j = 0; j < k; ++j) {
      model.T.col(j) = t_counts.col(j) / t_counts.col(j).sum();
      model.O.col(j) = o_counts.col(j) / o_counts.col(j).sum();
    }
    model.pi = pi_counts / pi_counts.sum();

    if (config.loglik_tol && out.loglik_trace.size() > 1) {
      const auto n = out.loglik_trace.size();
      if (out.loglik_trace[n - 1] - out.loglik_trace[n - 2] < *config.loglik_tol) break;
    }
  }

  out.model = std::move(model);
  out.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace shmm
