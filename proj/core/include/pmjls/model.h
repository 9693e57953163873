#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pmjls/linalg.h"

namespace pmjls {

/// Invalid model data: wrong shapes, non-stochastic transitions, bad indices.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reduces a time index into [0, period). All periodic lookups go through
/// this function.
int WrapTime(long k, int period);

/// Table indexed as [k][i]: time step k in [0, T), mode i in [0, N).
template <typename T>
using PeriodicTable = std::vector<std::vector<T>>;

/// N square matrices of a common dimension: one element of M^N.
class ModeIndexedSet {
 public:
  ModeIndexedSet() = default;
  /// N zero matrices of size dim x dim.
  ModeIndexedSet(int num_modes, int dim);
  explicit ModeIndexedSet(std::vector<Matrix> entries);

  static ModeIndexedSet Identity(int num_modes, int dim);
  static ModeIndexedSet Constant(int num_modes, const Matrix& value);

  int num_modes() const { return static_cast<int>(entries_.size()); }
  int dim() const { return dim_; }

  const Matrix& operator[](int i) const { return entries_[i]; }
  /// Bounds-checked access.
  const Matrix& at(int i) const;
  void Set(int i, Matrix value);

  bool IsSymmetric(double tol = 1e-12) const;
  /// Throws ModelError naming the first asymmetric entry.
  void RequireSymmetric(double tol = 1e-12) const;

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::vector<Matrix> entries_;
  int dim_ = 0;
};

/// x_{k+1} = A_k(w_k) x_k + B_k(w_k) u_k with T-periodic A, B and a
/// homogeneous Markov chain w_k with transition matrix p_ij.
struct PeriodicMjlsModel {
  int n_x = 0;
  int n_u = 0;
  int num_modes = 0;
  int period = 1;
  PeriodicTable<Matrix> A;  // [T][N], n_x x n_x
  PeriodicTable<Matrix> B;  // [T][N], n_x x n_u
  Matrix transition;        // N x N, row-stochastic

  const Matrix& StateMatrix(long k, int i) const {
    return A[WrapTime(k, period)][i];
  }
  const Matrix& InputMatrix(long k, int i) const {
    return B[WrapTime(k, period)][i];
  }
};

/// Mode-dependent periodic feedback u_k = K_k(i) x_k.
struct ControllerGains {
  int period = 1;
  int num_modes = 0;
  PeriodicTable<Matrix> K;  // [T][N], n_u x n_x

  const Matrix& Gain(long k, int i) const { return K[WrapTime(k, period)][i]; }

  static ControllerGains Zero(const PeriodicMjlsModel& model);
};

/// phi_k(i) = A_k(i) + B_k(i) K_k(i) together with the transition matrix.
struct ClosedLoopSystem {
  PeriodicTable<Matrix> phi;  // [T][N], n_x x n_x
  Matrix transition;

  int period() const { return static_cast<int>(phi.size()); }
  int num_modes() const { return static_cast<int>(transition.rows()); }
  int state_dim() const {
    return phi.empty() || phi[0].empty() ? 0 : static_cast<int>(phi[0][0].rows());
  }
  const Matrix& Phi(long k, int i) const { return phi[WrapTime(k, period())][i]; }

  /// Time-invariant (T = 1) closed loop from per-mode matrices.
  static ClosedLoopSystem TimeInvariant(const ModeIndexedSet& modes,
                                        const Matrix& transition);
};

/// Row-sum tolerance for transition matrices. Rows are never renormalized.
inline constexpr double kStochasticTolerance = 1e-9;

/// Checks entries in [0, 1] and row sums within kStochasticTolerance of 1.
void ValidateTransitionMatrix(const Matrix& transition);

/// Verifies every structural invariant of the model and returns it unchanged.
/// Throws ModelError naming the offending (k, i) or row.
PeriodicMjlsModel ValidateModel(PeriodicMjlsModel model);

/// Checks gains against the model's period, mode count and shapes.
void ValidateGains(const PeriodicMjlsModel& model, const ControllerGains& gains);

ClosedLoopSystem CloseLoop(const PeriodicMjlsModel& model,
                           const ControllerGains& gains);

/// The two-mode, period-10 actuator-failure example:
///   A_k(1) = [-0.5, 2; -0.4, 0.8 sin(0.2 pi k)],  B_k(1) = [1; 1]
///   A_k(2) = [0.5 cos(0.2 pi k), 0.5; 0.8, 0.5],   B_k(2) = [0; 0]
///   p = [0.8 0.2; 0.9 0.1].
/// Each mode alone is stable over a period, the jump system is not.
PeriodicMjlsModel ActuatorFailureExample();

/// Time-invariant two-mode system whose modes are individually Schur stable
/// but whose jump dynamics are not mean-square stable.
ClosedLoopSystem StableModesUnstableJumpExample();

}  // namespace pmjls
