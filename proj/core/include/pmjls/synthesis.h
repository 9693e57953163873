#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmjls/model.h"
#include "pmjls/sdp.h"
#include "pmjls/stability.h"

namespace pmjls {

/// Quadratic-cost synthesis with initial states in a convex hull.
struct SynthesisSpecP1 {
  ModeIndexedSet Q;                              // N x (n_x x n_x), PSD
  ModeIndexedSet R;                              // N x (n_u x n_u), PD
  std::vector<double> u_max;                     // N, > 0
  std::optional<PeriodicTable<Matrix>> W;        // [T][N] state bounds, PSD
  std::vector<Vector> hull_vertices;             // l >= 1 states
};

/// Region-of-attraction synthesis with the relaxed decrease sequence nu.
struct SynthesisSpecP2 {
  std::vector<double> nu;                        // T, > 0, product < 1
  std::vector<double> u_max;                     // N, > 0
  PeriodicTable<Matrix> W;                       // [T][N], PSD
  Vector rho;                                    // N, probability vector
};

/// Throws ModelError describing the first violated invariant.
void ValidateSpec(const PeriodicMjlsModel& model, const SynthesisSpecP1& spec);
void ValidateSpec(const PeriodicMjlsModel& model, const SynthesisSpecP2& spec);

inline constexpr double kDefaultSynthesisEpsilon = 1e-7;

/// Handles to the decision variables of an assembled synthesis SDP.
struct SynthesisVariables {
  std::optional<sdp::ScalarVar> beta;
  PeriodicTable<sdp::SymmetricVar> S;  // [T][N]
  PeriodicTable<sdp::MatrixVar> Y;     // [T][N], n_u x n_x
};

struct AssembledSynthesis {
  sdp::SdpProblem problem;
  SynthesisVariables vars;
};

/// min beta subject to the hull, cost/decrease, invariance, control-norm and
/// (when W is present) state-bound LMIs for every k, i. S_T aliases S_0.
AssembledSynthesis BuildP1Sdp(const PeriodicMjlsModel& model,
                              const SynthesisSpecP1& spec,
                              double epsilon = kDefaultSynthesisEpsilon);

/// min -sum_i rho_i tr S_0(i) subject to the nu-scaled decrease, invariance,
/// control-norm and state-bound LMIs.
AssembledSynthesis BuildP2Sdp(const PeriodicMjlsModel& model,
                              const SynthesisSpecP2& spec,
                              double epsilon = kDefaultSynthesisEpsilon);

class GainExtractionError : public std::runtime_error {
 public:
  GainExtractionError(const std::string& what, double min_eigenvalue)
      : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

/// K_k(i) = Y_k(i) S_k(i)^{-1}. Throws GainExtractionError if some S_k(i)
/// has minimum eigenvalue below min_eigenvalue.
ControllerGains ExtractGains(const std::vector<ModeIndexedSet>& S,
                             const PeriodicTable<Matrix>& Y,
                             double min_eigenvalue);

enum class SynthesisStatus { kSuccess, kInfeasible, kNumericalFailure };

std::string ToString(SynthesisStatus s);

/// Independent post-solve checks, recomputed from S, Y and the model.
struct SynthesisChecks {
  /// max ||K S - Y||_max / (1 + ||Y||_max) over (k, i).
  double gain_residual = 0.0;
  /// Smallest eigenvalue of the Schur-reduced decrease inequality in S form,
  /// divided by max(1, ||S_k(i)||_max).
  double schur_min = 0.0;
  /// Smallest eigenvalue of P_k(i) - phi^T E^i(P_{k+1}) phi - M_k(i)/beta
  /// (Problem 1) or nu_k P_k(i) - phi^T E^i(P_{k+1}) phi (Problem 2).
  double decrease_min = 0.0;
  /// Smallest eigenvalue of P_k(i) - phi_k(i)^T P_{k+1}(j) phi_k(i) over all
  /// k, i, j.
  double invariance_min = 0.0;
  /// Smallest eigenvalue of u_m(i)^2 I - Y S^{-1} Y^T, relative to u_m^2.
  double control_min = 0.0;
  /// Smallest eigenvalue of I - H S H^T (1 when no state bound).
  double state_min = 1.0;
  /// Smallest value of 1 - x_v^T S_0(i)^{-1} x_v (Problem 1).
  double hull_min = 1.0;
  bool passed = false;
  std::string message;
};

/// Tolerance on the scalar-form inequalities recomputed after a solve.
inline constexpr double kSynthesisCheckTolerance = 1e-7;

struct SynthesisResult {
  SynthesisStatus status = SynthesisStatus::kNumericalFailure;
  ControllerGains gains;
  std::vector<ModeIndexedSet> S;
  PeriodicTable<Matrix> Y;
  std::optional<double> beta;
  double objective = 0.0;
  double closed_loop_radius = 0.0;
  LyapunovCertificate certificate;  // P_k(i) = S_k(i)^{-1}
  std::optional<CertificateCheck> certificate_check;
  SynthesisChecks checks;
  /// tr S_0(i): size of the invariant ellipsoid {x : x^T S_0(i)^{-1} x <= 1}.
  std::vector<double> ellipsoid_traces;
  double rho_average_trace = 0.0;  // Problem 2
  int num_lmis = 0;
  int solver_iterations = 0;
  double solve_seconds = 0.0;
  double max_constraint_violation = 0.0;
  std::string diagnostics;
};

SynthesisResult SynthesizeP1(const PeriodicMjlsModel& model,
                             const SynthesisSpecP1& spec, double epsilon,
                             sdp::SdpBackend& backend);

SynthesisResult SynthesizeP2(const PeriodicMjlsModel& model,
                             const SynthesisSpecP2& spec, double epsilon,
                             sdp::SdpBackend& backend);

/// M_k(i) = Q(i) + K_k(i)^T R(i) K_k(i).
std::vector<ModeIndexedSet> StageCostWeights(const SynthesisSpecP1& spec,
                                             const ControllerGains& gains);

}  // namespace pmjls
