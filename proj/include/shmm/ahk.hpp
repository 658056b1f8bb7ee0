#pragma once

#include <cstdint>
#include <vector>

#include "shmm/diagnostics.hpp"
#include "shmm/errors.hpp"
#include "shmm/moments.hpp"
#include "shmm/types.hpp"

namespace shmm {

// Observable operator for a probe vector eta:
// B = (U3^T P312(eta) U1) (U3^T P31 U1)^-1.
// On population moments B is similar to diag(M2^T eta).
struct ObservableOperator {
  Matrix B;  // k x k
  Vector eta;
};

ObservableOperator build_operator(const MomentSet& moments, const Matrix& u1,
                                  const Matrix& u3, const Vector& eta);

struct AhkOptions {
  double imag_tol = 1e-6;     // max |Im| / spectral radius of B_1 eigenvalues
  double eig_gap_tol = 1e-8;  // min pairwise eigenvalue distance of B_1
  int max_attempts = 3;       // rotation redraws in learn_ahk_retry
};

struct AhkEstimate {
  Matrix O_hat;   // d x k, column-stochastic after post-processing
  Matrix T_hat;   // k x k, column-stochastic after post-processing
  Matrix Theta;   // rotation used for the probes
  Matrix L_hat;   // k x k eigenvalue matrix, L(i,j) = lambda_{i,j}
  Matrix R3_hat;  // shared eigenvector matrix of B_1
  // Raw values before clamping/renormalization (T_raw after the signed
  // column scaling that resolves the eigenvector scale ambiguity).
  Matrix O_raw;
  Matrix T_raw;
  LearnDiagnostics diag;
};

// Simultaneous-diagonalization estimator:
//   whiten P31 (left/right) and P32 (right), probe the third-order tensor
//   with eta_i = U2 theta_i for the rows theta_i of a random rotation,
//   diagonalize B_1 once, read all eigenvalue rows in that basis, then
//   O = U2 Theta^-1 L and T = (U3^T O)^-1 R3 with column scaling.
// Single attempt; the seed feeds the rotation draw.
AhkEstimate learn_ahk(const MomentSet& moments, int k, std::uint64_t seed,
                      const AhkOptions& options = {});

// SpectralInstability carrying the diagnostics of every failed attempt.
struct AhkRetriesExhausted : SpectralInstability {
  AhkRetriesExhausted(const std::string& what, std::vector<LearnDiagnostics> tried)
      : SpectralInstability(what), attempts(std::move(tried)) {}
  std::vector<LearnDiagnostics> attempts;
};

// Retries learn_ahk with freshly derived rotation seeds on
// SpectralInstability, up to options.max_attempts. Other errors propagate
// immediately; exhausted retries raise AhkRetriesExhausted.
AhkEstimate learn_ahk_retry(const MomentSet& moments, int k,
                            std::uint64_t master_seed,
                            const AhkOptions& options = {});

}  // namespace shmm
