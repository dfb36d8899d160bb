#pragma once

#include <Eigen/Dense>

#include "homlab/fourier.hpp"

namespace homlab {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// One-step propagator of x' = A x by the trapezoid rule:
/// (I - h/2 A)^{-1} (I + h/2 A).
CMatrix trapezoid_propagator(const CMatrix& a, double h);

/// exp(h A).
CMatrix exponential_propagator(const CMatrix& a, double h);

}  // namespace homlab
