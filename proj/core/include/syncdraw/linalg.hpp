#pragma once

#include <Eigen/Dense>

namespace syncdraw {

// All numerics run at 64-bit precision; reproducibility contracts
// (checkpoint resume, gradient checks) assume it.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix sigmoid(const Matrix& m) {
  return (1.0 / (1.0 + (-m.array()).exp())).matrix();
}

inline Vector sigmoid(const Vector& v) {
  return (1.0 / (1.0 + (-v.array()).exp())).matrix();
}

}  // namespace syncdraw
