#pragma once

#include <complex>
#include <vector>

#include "shmm/rng.hpp"
#include "shmm/types.hpp"

namespace shmm {

struct TruncatedSvd {
  Matrix U;  // m x k, orthonormal columns
  Vector S;  // k singular values, nonincreasing
  Matrix V;  // n x k, orthonormal columns
};

// Best rank-k factors of a dense matrix.
TruncatedSvd truncated_svd(const Matrix& a, int k);

struct EigenDecomposition {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;  // right eigenvectors, unit columns

  double spectral_radius() const;
  double max_imag_ratio() const;   // max |Im| / spectral radius
  double min_eigen_gap() const;    // min pairwise modulus distance
};

// General real eigendecomposition. No ordering guarantee; callers impose
// their own pairing. Throws SpectralInstability on non-convergence.
EigenDecomposition eigen_general(const Matrix& a);

// Moore-Penrose pseudoinverse with singular values below 1e-12 * sigma_max
// treated as zero.
Matrix pseudoinverse(const Matrix& a);

// Haar-distributed rotation: QR of a standard Gaussian matrix with
// R-diagonal sign correction, then one column flip if det = -1.
Matrix random_rotation(int k, Rng& rng);

struct PermutationAlignment {
  std::vector<int> perm;  // aligned.col(j) = est.col(perm[j])
  Matrix aligned;
  double sq_error;  // squared Frobenius distance to the reference
};

// Brute-force search over column permutations (k <= 8) minimizing
// ||est * P - ref||_F^2. Ties keep the lexicographically smallest
// permutation.
PermutationAlignment best_permutation_alignment(const Matrix& est, const Matrix& ref);

}  // namespace shmm
