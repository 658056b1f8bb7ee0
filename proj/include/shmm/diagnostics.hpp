#pragma once

namespace shmm {

// Numerical health indicators attached to every spectral estimate.
struct LearnDiagnostics {
  // max |Im(lambda)| / spectral_radius at the eigendecomposition that fixes
  // the shared eigenvector basis.
  double imag_mass = 0.0;
  // Largest off-diagonal-to-diagonal Frobenius ratio seen when reading
  // eigenvalues off the similarity-transformed operator matrices. Values
  // above 0.1 set the warning flag.
  double offdiag_ratio = 0.0;
  bool offdiag_warning = false;
  // Smallest singular value and condition number of the whitened pair
  // moment that gets inverted.
  double whitened_sigma_min = 0.0;
  double whitened_condition = 0.0;
  // Relative eigenvalue separation (gap / spectral radius) of the operator
  // whose eigenvectors fix the shared basis, and the number of random draws
  // it took to reach a separated one.
  double eigen_gap_ratio = 0.0;
  int separation_draws = 1;
  // Entries below -1e-12 zeroed by the clamp-and-renormalize step.
  int clamped_entries = 0;
  // Entries of pi_hat floored at 1e-8 before diag(pi_hat)^-1.
  int pi_floor_count = 0;
  // 1-based attempt index when a retry policy is in effect.
  int attempt = 1;
};

}  // namespace shmm
