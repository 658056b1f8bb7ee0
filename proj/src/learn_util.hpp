#pragma once

#include "shmm/types.hpp"

namespace shmm::detail {

// Entries more negative than this are counted as clamped; smaller negatives
// are rounding debris and zeroed silently.
constexpr double kClampReportTol = 1e-12;

// Zeros negatives and rescales each column to sum 1. Returns the number of
// reportable clamps. A column that ends up empty becomes uniform.
inline int clamp_normalize_columns(Matrix& m) {
  int clamped = 0;
  for (int j = 0; j < m.cols(); ++j) {
    for (int i = 0; i < m.rows(); ++i) {
      if (m(i, j) < 0.0) {
        if (m(i, j) < -kClampReportTol) ++clamped;
        m(i, j) = 0.0;
      }
    }
    const double s = m.col(j).sum();
    if (s > 0.0)
      m.col(j) /= s;
    else
      m.col(j).setConstant(1.0 / static_cast<double>(m.rows()));
  }
  return clamped;
}

inline int clamp_normalize(Vector& v) {
  int clamped = 0;
  for (int i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0) {
      if (v[i] < -kClampReportTol) ++clamped;
      v[i] = 0.0;
    }
  }
  const double s = v.sum();
  if (s > 0.0)
    v /= s;
  else
    v.setConstant(1.0 / static_cast<double>(v.size()));
  return clamped;
}

// Off-diagonal Frobenius mass relative to the diagonal, for the
// near-diagonality diagnostics of similarity-transformed operators.
inline double offdiag_ratio(const Matrix& m) {
  const double diag = m.diagonal().norm();
  const double off = std::sqrt(std::max(0.0, m.squaredNorm() - diag * diag));
  return diag > 0.0 ? off / diag : (off > 0.0 ? 1.0 : 0.0);
}

}  // namespace shmm::detail
