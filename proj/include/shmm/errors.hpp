#pragma once

#include <stdexcept>
#include <string>

namespace shmm {

// Failure taxonomy shared by the learners. Callers that drive experiment
// grids catch these and record failed runs instead of aborting.

// Eigendecomposition produced complex or colliding eigenvalues beyond
// tolerance, or an eigenvector matrix that cannot be inverted.
struct SpectralInstability : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A whitened moment matrix is numerically rank deficient.
struct DegenerateMoments : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A probability used as a divisor fell below its guard threshold.
struct DivisionGuard : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace shmm
