#pragma once

#include <Eigen/Dense>

namespace shield {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

} // namespace shield
