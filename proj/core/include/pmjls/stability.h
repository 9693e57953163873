#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmjls/model.h"
#include "pmjls/sdp.h"

namespace pmjls {

/// Result of a mean-square stability test. mss is true iff
/// spectral_radius < 1.
struct StabilityReport {
  bool mss = false;
  double spectral_radius = 0.0;
  std::vector<double> per_mode_radii;  // spectral radius of each mode's monodromy
  std::vector<double> per_mode_norms;  // largest singular value of the same
  std::string method;
};

/// Time-invariant test: builds (P^T kron I) blkdiag(phi(i) kron phi(i)) and
/// compares its spectral radius to 1.
StabilityReport CheckMssTimeInvariant(const ModeIndexedSet& modes,
                                      const Matrix& transition);

/// Periodic test: spectral radius of the lifted one-period operator G_T.
StabilityReport CheckMssPeriodic(const ClosedLoopSystem& cl);

/// T-periodic Lyapunov matrices P_k(i), optionally with the per-step
/// relaxation factors nu_k of the relaxed criterion.
struct LyapunovCertificate {
  std::vector<ModeIndexedSet> P;  // length T
  std::optional<std::vector<double>> nu;
  double epsilon = 0.0;
  /// residuals[k][i] = lambda_min(nu_k P_k(i) - L^i_k(P_{k+1})), nu_k = 1
  /// when absent. Filled by VerifyCertificate.
  std::vector<std::vector<double>> residuals;
};

struct CertificateCheck {
  bool valid = false;
  double min_residual = 0.0;     // smallest decrease-inequality eigenvalue
  int worst_k = 0;
  int worst_i = 0;
  double min_positivity = 0.0;   // smallest eigenvalue over all P_k(i)
  double max_asymmetry = 0.0;
  double nu_product = 1.0;
  std::string message;
};

/// Tolerance on the decrease inequality used by VerifyCertificate.
inline constexpr double kCertificateTolerance = 1e-8;

/// Recomputes every inequality of the certificate directly from the closed
/// loop and fills cert.residuals. valid requires: P symmetric, every P_k(i)
/// positive definite, all residuals >= -kCertificateTolerance, and
/// prod(nu) < 1 when nu is present.
CertificateCheck VerifyCertificate(LyapunovCertificate& cert,
                                   const ClosedLoopSystem& cl);

class NotConvergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed point of P_k(i) = L^i_k(P_{k+1}) + I from P = I, sweeping whole
/// periods backwards until the max-norm change over a period is <= tol.
/// Throws NotConvergedError after max_periods sweeps.
LyapunovCertificate CanonicalLyapunov(const ClosedLoopSystem& cl,
                                      double tol = 1e-10,
                                      int max_periods = 100000);

enum class FeasibilityStatus { kFeasible, kInfeasible, kSolverFailure };

std::string ToString(FeasibilityStatus s);

struct FeasibilityResult {
  FeasibilityStatus status = FeasibilityStatus::kSolverFailure;
  std::optional<LyapunovCertificate> certificate;
  std::optional<CertificateCheck> check;
  std::string diagnostics;
};

/// Solves: find symmetric P_k(i) with P_k(i) >= eps I and
/// P_k(i) - L^i_k(P_{k+1}) >= eps I for all k, i (P_T = P_0), minimizing the
/// total trace to fix the scale.
FeasibilityResult LyapunovFeasibility(const ClosedLoopSystem& cl,
                                      double epsilon,
                                      sdp::SdpBackend& backend);

/// Same with nu_k P_k(i) - L^i_k(P_{k+1}) >= eps I. Throws
/// std::invalid_argument unless every nu_k > 0 and prod(nu) < 1.
FeasibilityResult RelaxedLyapunovFeasibility(const ClosedLoopSystem& cl,
                                             const std::vector<double>& nu,
                                             double epsilon,
                                             sdp::SdpBackend& backend);

class PerformanceInequalityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Certified bound beta x0^T P_0(i0) x0 on E[sum_k x_k^T M_k(w_k) x_k].
/// `weights` is a T-sequence of PSD sets M_k. First checks
/// P_k(i) - L^i_k(P_{k+1}) - M_k(i)/beta >= -1e-8 for all (k, i); throws
/// PerformanceInequalityError naming the worst (k, i) otherwise.
double PerformanceBound(const LyapunovCertificate& cert,
                        const ClosedLoopSystem& cl,
                        const std::vector<ModeIndexedSet>& weights,
                        double beta, const Vector& x0, int i0);

}  // namespace pmjls
