#pragma once

#include <Eigen/Dense>

namespace csix {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace csix
