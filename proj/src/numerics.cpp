#include "shmm/numerics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "shmm/errors.hpp"

namespace shmm {

TruncatedSvd truncated_svd(const Matrix& a, int k) {
  const int minmn = static_cast<int>(std::min(a.rows(), a.cols()));
  if (k < 1 || k > minmn) throw std::invalid_argument("truncated_svd: rank out of range");
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd out;
  out.U = svd.matrixU().leftCols(k);
  out.S = svd.singularValues().head(k);
  out.V = svd.matrixV().leftCols(k);
  return out;
}

double EigenDecomposition::spectral_radius() const {
  double rho = 0.0;
  for (int i = 0; i < values.size(); ++i) rho = std::max(rho, std::abs(values[i]));
  return rho;
}

double EigenDecomposition::max_imag_ratio() const {
  const double rho = spectral_radius();
  if (rho <= 0.0) return 0.0;
  double m = 0.0;
  for (int i = 0; i < values.size(); ++i)
    m = std::max(m, std::abs(values[i].imag()));
  return m / rho;
}

double EigenDecomposition::min_eigen_gap() const {
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < values.size(); ++i)
    for (int j = i + 1; j < values.size(); ++j)
      gap = std::min(gap, std::abs(values[i] - values[j]));
  return gap;
}

EigenDecomposition eigen_general(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eigen_general: matrix not square");
  if (!a.allFinite()) throw std::invalid_argument("eigen_general: non-finite entries");
  Eigen::EigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success)
    throw SpectralInstability("eigendecomposition did not converge");
  EigenDecomposition out;
  out.values = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  return out;
}

Matrix pseudoinverse(const Matrix& a) {
  if (!a.allFinite()) throw std::invalid_argument("pseudoinverse: non-finite entries");
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? 1e-12 * s[0] : 0.0;
  Vector sinv = Vector::Zero(s.size());
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > cutoff && s[i] > 0.0) sinv[i] = 1.0 / s[i];
  return svd.matrixV() * sinv.asDiagonal() * svd.matrixU().transpose();
}

Matrix random_rotation(int k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("random_rotation: k must be >= 1");
  Matrix z(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) z(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < k; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  if (q.determinant() < 0.0) q.col(k - 1) = -q.col(k - 1);
  return q;
}

PermutationAlignment best_permutation_alignment(const Matrix& est, const Matrix& ref) {
  if (est.rows() != ref.rows() || est.cols() != ref.cols())
    throw std::invalid_argument("best_permutation_alignment: shape mismatch");
  const int k = static_cast<int>(est.cols());
  if (k > 8) throw std::invalid_argument("best_permutation_alignment: k > 8 unsupported");

  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_err = std::numeric_limits<double>::infinity();
  do {
    double err = 0.0;
    for (int j = 0; j < k; ++j) err += (est.col(perm[j]) - ref.col(j)).squaredNorm();
    if (err < best_err) {  // lexicographic enumeration keeps the smallest tie
      best_err = err;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  PermutationAlignment out;
  out.perm = best;
  out.aligned.resize(est.rows(), k);
  for (int j = 0; j < k; ++j) out.aligned.col(j) = est.col(best[j]);
  out.sq_error = best_err;
  return out;
}

}  // namespace shmm
