#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace tfcs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Sorted list of column indices (0-based).
using Support = std::vector<int>;

}  // namespace tfcs
