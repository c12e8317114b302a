#pragma once

#include <Eigen/Dense>

namespace ccbfnet {

using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;
using Mat = Eigen::MatrixXd;

/// Node index into a NetworkGraph. 0-based everywhere in the library;
/// user-facing I/O (configs, CSV) uses 1-based ids.
using NodeId = int;

}  // namespace ccbfnet
