#include "shmm/hkz.hpp"

#include <stdexcept>

#include "learn_util.hpp"
#include "shmm/errors.hpp"
#include "shmm/numerics.hpp"
#include "shmm/rng.hpp"

namespace shmm {

namespace {
constexpr double kSigmaMinTol = 1e-10;  // degeneracy cutoff for U^T P31
constexpr double kImagTol = 1e-6;       // relative imaginary mass cutoff
constexpr double kPiFloor = 1e-8;
constexpr double kOffdiagWarn = 0.1;
// A combination whose eigenvalues sit closer than this (relative to the
// spectral radius) gives an unusable eigenvector basis and is redrawn.
constexpr double kMinGapRatio = 0.15;
constexpr int kMaxSeparationDraws = 32;
}  // namespace

Matrix hkz_operator(const MomentSet& moments, const Matrix& u, int r) {
  const Matrix whitened = u.transpose() * moments.P31;
  return (u.transpose() * moments.third_slice(r)) * pseudoinverse(whitened);
}

HkzEstimate learn_hkz(const MomentSet& moments, int k, std::uint64_t seed) {
  const int d = moments.d;
  if (k < 1 || k > d) throw std::invalid_argument("learn_hkz: need 1 <= k <= d");
  if (moments.P312.size() != static_cast<size_t>(d))
    throw std::invalid_argument("learn_hkz: moment set lacks triple slices");

  HkzEstimate est;

  const Matrix u = truncated_svd(moments.P21, k).U;
  const Matrix whitened = u.transpose() * moments.P31;  // k x d
  {
    Eigen::JacobiSVD<Matrix> svd(whitened);
    const Vector& s = svd.singularValues();
    est.diag.whitened_sigma_min = s[k - 1];
    est.diag.whitened_condition = s[k - 1] > 0.0 ? s[0] / s[k - 1]
                                                 : std::numeric_limits<double>::infinity();
    if (s[k - 1] < kSigmaMinTol)
      throw DegenerateMoments("learn_hkz: whitened P31 is rank deficient");
  }
  const Matrix whitened_pinv = pseudoinverse(whitened);

  std::vector<Matrix> ops(d);
  for (int r = 0; r < d; ++r)
    ops[r] = (u.transpose() * moments.third_slice(r)) * whitened_pinv;

  // All ops share eigenvectors in population, so a Gaussian combination
  // separates the eigenvalues almost surely and fixes one ordering for all
  // r. Draws that fail to separate at finite precision are resampled; the
  // best-separated draw wins.
  Rng rng(seed);
  EigenDecomposition eig;
  double best_ratio = -1.0;
  for (int draw = 1; draw <= kMaxSeparationDraws; ++draw) {
    Matrix combined = Matrix::Zero(k, k);
    for (int r = 0; r < d; ++r) combined += rng.normal() * ops[r];
    EigenDecomposition candidate = eigen_general(combined);
    const double rho = candidate.spectral_radius();
    const double ratio = rho > 0.0 ? candidate.min_eigen_gap() / rho : 0.0;
    if (ratio > best_ratio) {
      best_ratio = ratio;
      eig = std::move(candidate);
      est.diag.separation_draws = draw;
    }
    if (best_ratio >= kMinGapRatio) break;
  }
  est.diag.eigen_gap_ratio = best_ratio;

  est.diag.imag_mass = eig.max_imag_ratio();
  if (est.diag.imag_mass > kImagTol)
    throw SpectralInstability("learn_hkz: complex eigenvalues in the combined operator");

  const Matrix basis = eig.vectors.real();
  Eigen::FullPivLU<Matrix> lu(basis);
  if (!lu.isInvertible())
    throw SpectralInstability("learn_hkz: shared eigenvector matrix is singular");
  const Matrix basis_inv = lu.inverse();

  est.O_raw.resize(d, k);
  for (int r = 0; r < d; ++r) {
    const Matrix similar = basis_inv * ops[r] * basis;
    est.O_raw.row(r) = similar.diagonal().transpose();
    est.diag.offdiag_ratio = std::max(est.diag.offdiag_ratio, detail::offdiag_ratio(similar));
  }
  est.diag.offdiag_warning = est.diag.offdiag_ratio > kOffdiagWarn;

  const Matrix o_pinv = pseudoinverse(est.O_raw);
  est.pi_raw = o_pinv * moments.P1;

  Vector pi_floored = est.pi_raw;
  for (int j = 0; j < k; ++j) {
    if (pi_floored[j] < kPiFloor) {
      pi_floored[j] = kPiFloor;
      ++est.diag.pi_floor_count;
    }
  }
  est.T_raw = o_pinv * moments.P21 * o_pinv.transpose() *
              pi_floored.cwiseInverse().asDiagonal();

  est.O_hat = est.O_raw;
  est.T_hat = est.T_raw;
  est.pi_hat = est.pi_raw;
  est.diag.clamped_entries += detail::clamp_normalize_columns(est.O_hat);
  est.diag.clamped_entries += detail::clamp_normalize_columns(est.T_hat);
  est.diag.clamped_entries += detail::clamp_normalize(est.pi_hat);
  return est;
}

}  // namespace shmm
