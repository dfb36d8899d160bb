#include "homlab/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "homlab/errors.hpp"

namespace homlab {

CMatrix trapezoid_propagator(const CMatrix& a, double h) {
  const Eigen::Index n = a.rows();
  const CMatrix id = CMatrix::Identity(n, n);
  Eigen::PartialPivLU<CMatrix> lu(id - 0.5 * h * a);
  CMatrix out = lu.solve(id + 0.5 * h * a);
  if (!out.allFinite()) throw Error(ErrorCode::SolveFailed, "trapezoid propagator is singular");
  return out;
}

CMatrix exponential_propagator(const CMatrix& a, double h) {
  CMatrix scaled = h * a;
  CMatrix out = scaled.exp();
  if (!out.allFinite()) throw Error(ErrorCode::SolveFailed, "matrix exponential overflowed");
  return out;
}

}  // namespace homlab
