#include "pmjls/operators.h"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace pmjls {

namespace {

void CheckMode(int i, int num_modes) {
  if (i < 0 || i >= num_modes) {
    throw ModelError("mode index " + std::to_string(i) + " out of range [0, " +
                     std::to_string(num_modes) + ")");
  }
}

void CheckCompatible(const ModeIndexedSet& v, const ClosedLoopSystem& cl) {
  if (v.num_modes() != cl.num_modes() || v.dim() != cl.state_dim()) {
    throw ModelError("operand does not match the closed loop (modes/dimension)");
  }
}

}  // namespace

Matrix Expectation(const ModeIndexedSet& v, const Matrix& transition, int i) {
  CheckMode(i, static_cast<int>(transition.rows()));
  if (v.num_modes() != transition.cols()) {
    throw ModelError("Expectation: set has " + std::to_string(v.num_modes()) +
                     " modes, transition matrix has " +
                     std::to_string(transition.cols()));
  }
  Matrix out = Matrix::Zero(v.dim(), v.dim());
  for (int j = 0; j < v.num_modes(); ++j) out += transition(i, j) * v[j];
  return out;
}

Matrix TOperator(const ModeIndexedSet& v, const ClosedLoopSystem& cl, long k,
                 int j) {
  CheckCompatible(v, cl);
  CheckMode(j, cl.num_modes());
  Matrix out = Matrix::Zero(v.dim(), v.dim());
  for (int i = 0; i < cl.num_modes(); ++i) {
    const double p = cl.transition(i, j);
    if (p == 0.0) continue;
    const Matrix& f = cl.Phi(k, i);
    out.noalias() += p * f * v[i] * f.transpose();
  }
  return out;
}

Matrix LOperator(const ModeIndexedSet& v, const ClosedLoopSystem& cl, long k,
                 int i) {
  CheckCompatible(v, cl);
  const Matrix& f = cl.Phi(k, i);
  return f.transpose() * Expectation(v, cl.transition, i) * f;
}

ModeIndexedSet TStep(const ModeIndexedSet& v, const ClosedLoopSystem& cl,
                     long k) {
  std::vector<Matrix> out;
  out.reserve(cl.num_modes());
  for (int j = 0; j < cl.num_modes(); ++j) out.push_back(TOperator(v, cl, k, j));
  return ModeIndexedSet(std::move(out));
}

ModeIndexedSet LStep(const ModeIndexedSet& v, const ClosedLoopSystem& cl,
                     long k) {
  std::vector<Matrix> out;
  out.reserve(cl.num_modes());
  for (int i = 0; i < cl.num_modes(); ++i) out.push_back(LOperator(v, cl, k, i));
  return ModeIndexedSet(std::move(out));
}

Vector StackVec(const ModeIndexedSet& v) {
  const int d2 = v.dim() * v.dim();
  Vector out(static_cast<Eigen::Index>(v.num_modes()) * d2);
  for (int i = 0; i < v.num_modes(); ++i) out.segment(i * d2, d2) = Vec(v[i]);
  return out;
}

ModeIndexedSet UnstackVec(const Vector& stacked, int num_modes, int dim) {
  const int d2 = dim * dim;
  if (stacked.size() != static_cast<Eigen::Index>(num_modes) * d2) {
    throw ModelError("UnstackVec: length does not match N * d^2");
  }
  std::vector<Matrix> out;
  out.reserve(num_modes);
  for (int i = 0; i < num_modes; ++i) {
    out.push_back(Unvec(stacked.segment(i * d2, d2), dim, dim));
  }
  return ModeIndexedSet(std::move(out));
}

LiftedStepMatrix LiftedStep(const ClosedLoopSystem& cl, long k) {
  const int n = cl.num_modes();
  const int d2 = cl.state_dim() * cl.state_dim();
  LiftedStepMatrix out{Matrix::Zero(n * d2, n * d2), k};
  for (int i = 0; i < n; ++i) {
    const Matrix kp = Kron(cl.Phi(k, i), cl.Phi(k, i));
    for (int j = 0; j < n; ++j) {
      out.M.block(j * d2, i * d2, d2, d2) = cl.transition(i, j) * kp;
    }
  }
  return out;
}

LiftedStepMatrix LiftedAdjointStep(const ClosedLoopSystem& cl, long k) {
  const int n = cl.num_modes();
  const int d2 = cl.state_dim() * cl.state_dim();
  LiftedStepMatrix out{Matrix::Zero(n * d2, n * d2), k};
  for (int i = 0; i < n; ++i) {
    const Matrix ft = cl.Phi(k, i).transpose();
    const Matrix kp = Kron(ft, ft);
    for (int j = 0; j < n; ++j) {
      out.M.block(i * d2, j * d2, d2, d2) = cl.transition(i, j) * kp;
    }
  }
  return out;
}

Matrix OnePeriodOperator(const ClosedLoopSystem& cl) {
  Matrix g = LiftedStep(cl, 0).M;
  for (int k = 1; k < cl.period(); ++k) g = LiftedStep(cl, k).M * g;
  return g;
}

Matrix FPeriodOperator(const ClosedLoopSystem& cl) {
  Matrix f = LiftedAdjointStep(cl, 0).M;
  for (int k = 1; k < cl.period(); ++k) f = f * LiftedAdjointStep(cl, k).M;
  return f;
}

double PowerIterationSpectralRadius(const Matrix& m,
                                    const PowerIterationOptions& opts) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("SpectralRadius: matrix is not square");
  }
  const Eigen::Index n = m.rows();
  if (n == 0) return 0.0;
  // Deterministic start with no special alignment to coordinate axes.
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i) = 1.0 + 0.5 * std::sin(1.0 + 0.37 * static_cast<double>(i));
  }
  x.normalize();
  // Two-step growth ratio: insensitive to a dominant +/- real pair.
  double estimate = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    Vector y = m * x;
    Vector z = m * y;
    const double nz = z.norm();
    if (nz == 0.0) return 0.0;
    const double next = std::sqrt(nz);
    if (it > 0 && std::abs(next - estimate) <= opts.tolerance * std::max(next, 1e-300)) {
      return next;
    }
    estimate = next;
    x = z / nz;
  }
  throw SpectralRadiusNotConverged(
      "power iteration did not converge within " +
          std::to_string(opts.max_iterations) + " iterations",
      estimate);
}

double SpectralRadius(const Matrix& m, const PowerIterationOptions& opts) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("SpectralRadius: matrix is not square");
  }
  if (m.rows() == 0) return 0.0;
  if (m.rows() > kDenseSpectrumLimit) return PowerIterationSpectralRadius(m, opts);
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    return PowerIterationSpectralRadius(m, opts);
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double OperatorNorm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Matrix PerModeMonodromy(const PeriodicMjlsModel& model, int i) {
  CheckMode(i, model.num_modes);
  Matrix out = Matrix::Identity(model.n_x, model.n_x);
  for (int k = 0; k < model.period; ++k) out = model.A[k][i] * out;
  return out;
}

Matrix PerModeMonodromy(const ClosedLoopSystem& cl, int i) {
  CheckMode(i, cl.num_modes());
  Matrix out = Matrix::Identity(cl.state_dim(), cl.state_dim());
  for (int k = 0; k < cl.period(); ++k) out = cl.phi[k][i] * out;
  return out;
}

}  // namespace pmjls
