#include "shmm/moments.hpp"

#include <stdexcept>

#include "shmm/errors.hpp"

namespace shmm {

namespace {

// All pair/singleton moments of a categorical set are marginal sums of the
// triple counts, which keeps them consistent with the P312 slices down to
// the last bit.
MomentSet from_categorical(const TripleSet& triples) {
  const int d = triples.d;
  const double n = static_cast<double>(triples.size());
  MomentSet m;
  m.d = d;
  m.sample_count = triples.size();
  m.P312.assign(d, Matrix::Zero(d, d));
  for (const auto& t : triples.symbols) {
    if (t[0] < 0 || t[0] >= d || t[1] < 0 || t[1] >= d || t[2] < 0 || t[2] >= d)
      throw std::out_of_range("triple symbol out of range");
    m.P312[t[1]](t[2], t[0]) += 1.0;
  }
  for (auto& slice : m.P312) slice /= n;

  m.P31 = Matrix::Zero(d, d);
  for (const auto& slice : m.P312) m.P31 += slice;
  m.P32.resize(d, d);
  m.P21.resize(d, d);
  for (int a = 0; a < d; ++a) {
    m.P32.col(a) = m.P312[a].rowwise().sum();        // marginalize x1
    m.P21.row(a) = m.P312[a].colwise().sum();        // marginalize x3
  }
  m.P1 = m.P21.colwise().sum().transpose();          // marginalize x2
  return m;
}

MomentSet from_vectors(const TripleSet& triples) {
  const int d = triples.d;
  const double n = static_cast<double>(triples.size());
  if (!triples.x1.allFinite() || !triples.x2.allFinite() || !triples.x3.allFinite())
    throw std::invalid_argument("estimate_moments: non-finite observation vectors");
  MomentSet m;
  m.d = d;
  m.sample_count = triples.size();
  m.P1 = triples.x1.rowwise().mean();
  m.P21 = triples.x2 * triples.x1.transpose() / n;
  m.P31 = triples.x3 * triples.x1.transpose() / n;
  m.P32 = triples.x3 * triples.x2.transpose() / n;
  m.P312.assign(d, Matrix());
  for (int a = 0; a < d; ++a) {
    m.P312[a] =
        triples.x3 * triples.x2.row(a).asDiagonal() * triples.x1.transpose() / n;
  }
  return m;
}

}  // namespace

MomentSet estimate_moments(const TripleSet& triples) {
  if (triples.size() < 1) throw std::invalid_argument("empty triple set");
  if (triples.d < 1) throw std::invalid_argument("triple set has no alphabet");
  return triples.mode == TripleMode::categorical ? from_categorical(triples)
                                                 : from_vectors(triples);
}

Matrix contract_third_order(const std::vector<Matrix>& p312, const Vector& eta) {
  if (p312.empty()) throw std::invalid_argument("contract_third_order: empty tensor");
  if (eta.size() != static_cast<Eigen::Index>(p312.size()))
    throw std::invalid_argument("contract_third_order: probe length mismatch");
  Matrix out = Matrix::Zero(p312[0].rows(), p312[0].cols());
  for (size_t a = 0; a < p312.size(); ++a) out += eta[static_cast<int>(a)] * p312[a];
  return out;
}

ViewMeans analytic_view_means(const HmmModel& model) {
  auto report = validate_model(model);
  if (!report.ok()) throw std::invalid_argument("invalid model: " + report.to_string());

  ViewMeans v;
  v.w = model.T * model.pi;
  if (v.w.minCoeff() < 1e-12)
    throw DivisionGuard("analytic_view_means: entry of T pi below 1e-12");
  // The middle state h2 plays the mixture role: conditioning x1 on h2 runs
  // the chain backwards through Bayes' rule, hence diag(pi) T^T diag(w)^-1.
  v.M1 = model.O * model.pi.asDiagonal() * model.T.transpose() *
         v.w.cwiseInverse().asDiagonal();
  v.M2 = model.O;
  v.M3 = model.O * model.T;
  return v;
}

MomentSet analytic_moments(const HmmModel& model) {
  const ViewMeans v = analytic_view_means(model);
  const int d = model.d;
  MomentSet m;
  m.d = d;
  m.analytic = true;
  m.P1 = model.O * model.pi;
  m.P21 = model.O * model.T * model.pi.asDiagonal() * model.O.transpose();
  m.P31 = v.M3 * v.w.asDiagonal() * v.M1.transpose();
  m.P32 = v.M3 * v.w.asDiagonal() * v.M2.transpose();
  m.P312.assign(d, Matrix());
  for (int a = 0; a < d; ++a) {
    m.P312[a] = v.M3 * v.M2.row(a).transpose().cwiseProduct(v.w).asDiagonal() *
                v.M1.transpose();
  }
  return m;
}

}  // namespace shmm
