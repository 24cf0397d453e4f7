#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>

namespace wavekernel {

using cplx = std::complex<double>;

/// n x n complex matrix, the value type of potentials and kernels.
using Matrix = Eigen::MatrixXcd;
/// C^n value of controls and waves.
using Vector = Eigen::VectorXcd;

/// Row-major views over flat per-node storage.
using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixView = Eigen::Map<RowMatrix>;
using ConstMatrixView = Eigen::Map<const RowMatrix>;

/// Operator 2-norm (largest singular value).
double op_norm(const Matrix& m);

/// Unitary conjugation U m U*.
inline Matrix conjugate_by(const Matrix& u, const Matrix& m) { return u * m * u.adjoint(); }

}  // namespace wavekernel
