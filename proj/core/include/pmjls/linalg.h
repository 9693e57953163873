#pragma once

#include <Eigen/Dense>

namespace pmjls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Small dense helpers shared across modules.

/// Largest |a_ij - a_ji|.
double AsymmetryMax(const Matrix& m);

/// (m + m^T) / 2.
Matrix Symmetrize(const Matrix& m);

/// Smallest eigenvalue of the symmetric part of `m`.
double MinEigenvalue(const Matrix& m);

/// Principal square root of a symmetric PSD matrix. Negative eigenvalues
/// produced by rounding are clamped to zero.
Matrix PsdSqrt(const Matrix& m);

Matrix Kron(const Matrix& a, const Matrix& b);

/// Column-stacking vectorization.
Vector Vec(const Matrix& m);
Matrix Unvec(const Vector& v, int rows, int cols);

}  // namespace pmjls
