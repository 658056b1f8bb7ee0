#pragma once

#include <cstdint>

#include "shmm/diagnostics.hpp"
#include "shmm/moments.hpp"
#include "shmm/types.hpp"

namespace shmm {

struct HkzEstimate {
  Matrix O_hat;   // d x k, column-stochastic after post-processing
  Matrix T_hat;   // k x k, column-stochastic after post-processing
  Vector pi_hat;  // length k, simplex after post-processing
  // Raw values before clamping/renormalization.
  Matrix O_raw;
  Matrix T_raw;
  Vector pi_raw;
  LearnDiagnostics diag;
};

// The whitened operator whose eigenvalues are row r of O in population:
// C_r = (U^T P_{3,r,1}) (U^T P_{3,1})^+, with U the top-k left singular
// vectors of P21. Exposed for the similarity-invariance tests.
Matrix hkz_operator(const MomentSet& moments, const Matrix& u, int r);

// Spectral estimator that reads the emission matrix off eigenvalues of the
// d whitened operators, then recovers pi and T through pseudoinverses.
//
// The d operators share their eigenvectors in population, so one
// eigendecomposition of a random Gaussian combination sum_r g_r C_r fixes a
// single consistent eigenvalue ordering; eigenvalues are then read off the
// diagonal of R^-1 C_r R. The seed feeds the Gaussian weights g_r.
//
// Throws SpectralInstability, DegenerateMoments (see errors.hpp).
HkzEstimate learn_hkz(const MomentSet& moments, int k, std::uint64_t seed);

}  // namespace shmm
