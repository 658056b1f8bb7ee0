#include "shmm/ahk.hpp"

#include <stdexcept>

#include "learn_util.hpp"
#include "shmm/numerics.hpp"
#include "shmm/rng.hpp"

namespace shmm {

namespace {

constexpr double kSigmaMinTol = 1e-10;
constexpr double kOffdiagWarn = 0.1;
// Rotations whose first probe leaves the operator eigenvalues closer than
// this (relative to the spectral radius) are resampled; the best draw wins.
constexpr double kMinGapRatio = 0.15;
constexpr int kMaxSeparationDraws = 32;

// Fills diag as far as the computation gets, so failed attempts still
// surface their numerical state.
AhkEstimate learn_ahk_impl(const MomentSet& moments, int k, std::uint64_t seed,
                           const AhkOptions& options, LearnDiagnostics& diag) {
  const int d = moments.d;
  if (k < 1 || k > d) throw std::invalid_argument("learn_ahk: need 1 <= k <= d");
  if (moments.P312.size() != static_cast<size_t>(d))
    throw std::invalid_argument("learn_ahk: moment set lacks triple slices");

  AhkEstimate est;

  const TruncatedSvd svd31 = truncated_svd(moments.P31, k);
  const Matrix& u3 = svd31.U;
  const Matrix& u1 = svd31.V;
  const Matrix u2 = truncated_svd(moments.P32, k).V;

  const Matrix whitened = u3.transpose() * moments.P31 * u1;  // k x k
  {
    Eigen::JacobiSVD<Matrix> svd(whitened);
    const Vector& s = svd.singularValues();
    diag.whitened_sigma_min = s[k - 1];
    diag.whitened_condition = s[k - 1] > 0.0 ? s[0] / s[k - 1]
                                             : std::numeric_limits<double>::infinity();
    if (s[k - 1] < kSigmaMinTol)
      throw DegenerateMoments("learn_ahk: whitened P31 is near singular");
  }
  const Matrix whitened_inv = whitened.inverse();

  // Probes run through the x2 subspace: eta_i = U2 theta_i, so that the
  // eigenvalue matrix satisfies L = Theta U2^T M2 and step 5 can undo Theta.
  const auto probe_operator = [&](const Vector& theta_row) {
    const Vector eta = u2 * theta_row;
    const Matrix contracted = contract_third_order(moments.P312, eta);
    return Matrix((u3.transpose() * contracted * u1) * whitened_inv);
  };

  // The first probe's eigenvectors become the shared diagonalization basis,
  // so its eigenvalues must be separated; rotations that fail to separate
  // them at finite precision are resampled and the best draw wins.
  Rng rng(seed);
  EigenDecomposition eig;
  Matrix first_operator;
  double best_ratio = -1.0;
  for (int draw = 1; draw <= kMaxSeparationDraws; ++draw) {
    const Matrix theta = random_rotation(k, rng);
    Matrix candidate_op = probe_operator(theta.row(0).transpose());
    EigenDecomposition candidate = eigen_general(candidate_op);
    const double rho = candidate.spectral_radius();
    const double ratio = rho > 0.0 ? candidate.min_eigen_gap() / rho : 0.0;
    if (ratio > best_ratio) {
      best_ratio = ratio;
      est.Theta = theta;
      first_operator = std::move(candidate_op);
      eig = std::move(candidate);
      diag.separation_draws = draw;
    }
    if (best_ratio >= kMinGapRatio) break;
  }
  diag.eigen_gap_ratio = best_ratio;

  std::vector<Matrix> operators(k);
  operators[0] = first_operator;
  for (int i = 1; i < k; ++i)
    operators[i] = probe_operator(est.Theta.row(i).transpose());

  diag.imag_mass = eig.max_imag_ratio();
  if (diag.imag_mass > options.imag_tol)
    throw SpectralInstability("learn_ahk: complex eigenvalues of the probe operator");
  if (eig.min_eigen_gap() < options.eig_gap_tol)
    throw SpectralInstability("learn_ahk: probe operator eigenvalues collide");

  est.R3_hat = eig.vectors.real();
  Eigen::FullPivLU<Matrix> lu(est.R3_hat);
  if (!lu.isInvertible())
    throw SpectralInstability("learn_ahk: eigenvector matrix is singular");
  const Matrix r3_inv = lu.inverse();

  est.L_hat.resize(k, k);
  for (int i = 0; i < k; ++i) {
    const Matrix similar = r3_inv * operators[i] * est.R3_hat;
    est.L_hat.row(i) = similar.diagonal().transpose();
    diag.offdiag_ratio = std::max(diag.offdiag_ratio, detail::offdiag_ratio(similar));
  }
  diag.offdiag_warning = diag.offdiag_ratio > kOffdiagWarn;

  est.O_raw = u2 * est.Theta.transpose() * est.L_hat;  // Theta^-1 = Theta^T

  const Matrix u3o = u3.transpose() * est.O_raw;
  Eigen::FullPivLU<Matrix> lu_o(u3o);
  if (!lu_o.isInvertible())
    throw SpectralInstability("learn_ahk: U3^T O_hat is singular");
  est.T_raw = lu_o.inverse() * est.R3_hat;

  // Eigenvector columns carry an arbitrary scale and sign; dividing by the
  // signed column sum restores stochastic columns in population.
  for (int j = 0; j < k; ++j) {
    const double s = est.T_raw.col(j).sum();
    if (s != 0.0) est.T_raw.col(j) /= s;
  }

  est.O_hat = est.O_raw;
  est.T_hat = est.T_raw;
  diag.clamped_entries += detail::clamp_normalize_columns(est.O_hat);
  diag.clamped_entries += detail::clamp_normalize_columns(est.T_hat);
  est.diag = diag;
  return est;
}

}  // namespace

ObservableOperator build_operator(const MomentSet& moments, const Matrix& u1,
                                  const Matrix& u3, const Vector& eta) {
  const Matrix whitened = u3.transpose() * moments.P31 * u1;
  Eigen::JacobiSVD<Matrix> svd(whitened);
  const Vector& s = svd.singularValues();
  if (s[s.size() - 1] < kSigmaMinTol)
    throw DegenerateMoments("build_operator: whitened P31 is near singular");

  ObservableOperator op;
  op.eta = eta;
  const Matrix contracted = contract_third_order(moments.P312, eta);
  op.B = (u3.transpose() * contracted * u1) * whitened.inverse();
  return op;
}

AhkEstimate learn_ahk(const MomentSet& moments, int k, std::uint64_t seed,
                      const AhkOptions& options) {
  LearnDiagnostics diag;
  return learn_ahk_impl(moments, k, seed, options, diag);
}

AhkEstimate learn_ahk_retry(const MomentSet& moments, int k,
                            std::uint64_t master_seed, const AhkOptions& options) {
  std::vector<LearnDiagnostics> failed;
  std::string last_error;
  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    LearnDiagnostics diag;
    diag.attempt = attempt;
    try {
      AhkEstimate est =
          learn_ahk_impl(moments, k, derive_seed(master_seed, attempt), options, diag);
      est.diag.attempt = attempt;
      return est;
    } catch (const SpectralInstability& e) {
      failed.push_back(diag);
      last_error = e.what();
    }
  }
  throw AhkRetriesExhausted("learn_ahk: all rotation attempts failed: " + last_error,
                            std::move(failed));
}

}  // namespace shmm
