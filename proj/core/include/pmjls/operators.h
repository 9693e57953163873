#pragma once

#include <stdexcept>

#include "pmjls/model.h"

namespace pmjls {

// Operator algebra on M^N for a closed loop phi_k(i) with transition p_ij:
//
//   E^i(V)   = sum_j p_ij V(j)
//   T^j_k(V) = sum_i p_ij phi_k(i) V(i) phi_k(i)^T      (covariance step)
//   L^i_k(V) = phi_k(i)^T E^i(V) phi_k(i)               (adjoint of T_k)
//
// Lifted matrices act on the mode-major stack [vec V(0); ...; vec V(N-1)]
// with column-stacking vec.

Matrix Expectation(const ModeIndexedSet& v, const Matrix& transition, int i);

Matrix TOperator(const ModeIndexedSet& v, const ClosedLoopSystem& cl, long k,
                 int j);
Matrix LOperator(const ModeIndexedSet& v, const ClosedLoopSystem& cl, long k,
                 int i);

/// (T^0_k(V), ..., T^{N-1}_k(V)).
ModeIndexedSet TStep(const ModeIndexedSet& v, const ClosedLoopSystem& cl,
                     long k);
/// (L^0_k(V), ..., L^{N-1}_k(V)).
ModeIndexedSet LStep(const ModeIndexedSet& v, const ClosedLoopSystem& cl,
                     long k);

Vector StackVec(const ModeIndexedSet& v);
ModeIndexedSet UnstackVec(const Vector& stacked, int num_modes, int dim);

/// Matrix of T_k on the stacked vectorization: block (j, i) is
/// p_ij (phi_k(i) kron phi_k(i)); dimension N n_x^2.
struct LiftedStepMatrix {
  Matrix M;
  long k = 0;
};

LiftedStepMatrix LiftedStep(const ClosedLoopSystem& cl, long k);

/// Matrix of L_k, assembled from its own definition: block (i, j) is
/// p_ij (phi_k(i)^T kron phi_k(i)^T).
LiftedStepMatrix LiftedAdjointStep(const ClosedLoopSystem& cl, long k);

/// Lifted G_T = T_{T-1} o ... o T_0, i.e. M_{T-1} ... M_1 M_0.
Matrix OnePeriodOperator(const ClosedLoopSystem& cl);

/// Lifted F_T = L_0 o L_1 o ... o L_{T-1}. Built from LiftedAdjointStep so it
/// is an independent route to the spectrum of G_T.
Matrix FPeriodOperator(const ClosedLoopSystem& cl);

/// Dimension above which SpectralRadius switches from a dense eigenvalue
/// solve to power iteration.
inline constexpr int kDenseSpectrumLimit = 512;

struct PowerIterationOptions {
  double tolerance = 1e-10;
  int max_iterations = 100000;
};

class SpectralRadiusNotConverged : public std::runtime_error {
 public:
  SpectralRadiusNotConverged(const std::string& what, double best_estimate)
      : std::runtime_error(what), best_estimate_(best_estimate) {}
  double best_estimate() const { return best_estimate_; }

 private:
  double best_estimate_;
};

/// Maximum eigenvalue modulus.
double SpectralRadius(const Matrix& m, const PowerIterationOptions& opts = {});

/// Power-iteration estimate, exposed for testing the large-matrix path.
double PowerIterationSpectralRadius(const Matrix& m,
                                    const PowerIterationOptions& opts = {});

/// Largest singular value.
double OperatorNorm(const Matrix& m);

/// A_{T-1}(i) ... A_1(i) A_0(i).
Matrix PerModeMonodromy(const PeriodicMjlsModel& model, int i);

/// phi_{T-1}(i) ... phi_0(i) for a closed loop.
Matrix PerModeMonodromy(const ClosedLoopSystem& cl, int i);

}  // namespace pmjls
