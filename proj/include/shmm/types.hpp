#pragma once

#include <Eigen/Dense>

namespace shmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace shmm
