#include "pmjls/linalg.h"

#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace pmjls {

double AsymmetryMax(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("AsymmetryMax: matrix is not square");
  }
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

Matrix Symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double MinEigenvalue(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("MinEigenvalue: matrix is not square");
  }
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(Symmetrize(m),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Matrix PsdSqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(Symmetrize(m));
  Vector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

Matrix Kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Vector Vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix Unvec(const Vector& v, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols) {
    throw std::invalid_argument("Unvec: length does not match shape");
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

}  // namespace pmjls
