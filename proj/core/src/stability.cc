#include "pmjls/stability.h"

#include <cmath>
#include <sstream>

#include "pmjls/operators.h"

namespace pmjls {

StabilityReport CheckMssTimeInvariant(const ModeIndexedSet& modes,
                                      const Matrix& transition) {
  ValidateTransitionMatrix(transition);
  const int n = modes.num_modes();
  if (transition.rows() != n) {
    throw ModelError("transition matrix size does not match mode count");
  }
  const int d2 = modes.dim() * modes.dim();
  Matrix blkdiag = Matrix::Zero(n * d2, n * d2);
  for (int i = 0; i < n; ++i) {
    blkdiag.block(i * d2, i * d2, d2, d2) = Kron(modes[i], modes[i]);
  }
  // Block (j, i) = p_ij (phi(i) kron phi(i)): the covariance step.
  const Matrix lifted =
      Kron(transition.transpose(), Matrix::Identity(d2, d2)) * blkdiag;

  StabilityReport r;
  r.method = "time-invariant: spectral radius of (P^T kron I) blkdiag(phi kron phi)";
  r.spectral_radius = SpectralRadius(lifted);
  r.mss = r.spectral_radius < 1.0;
  for (const auto& m : modes) {
    r.per_mode_radii.push_back(SpectralRadius(m));
    r.per_mode_norms.push_back(OperatorNorm(m));
  }
  return r;
}

StabilityReport CheckMssPeriodic(const ClosedLoopSystem& cl) {
  StabilityReport r;
  r.method = "periodic: spectral radius of one-period operator G_T";
  r.spectral_radius = SpectralRadius(OnePeriodOperator(cl));
  r.mss = r.spectral_radius < 1.0;
  for (int i = 0; i < cl.num_modes(); ++i) {
    const Matrix mono = PerModeMonodromy(cl, i);
    r.per_mode_radii.push_back(SpectralRadius(mono));
    r.per_mode_norms.push_back(OperatorNorm(mono));
  }
  return r;
}

CertificateCheck VerifyCertificate(LyapunovCertificate& cert,
                                   const ClosedLoopSystem& cl) {
  const int period = cl.period();
  const int n = cl.num_modes();
  if (static_cast<int>(cert.P.size()) != period) {
    throw ModelError("certificate has " + std::to_string(cert.P.size()) +
                     " time entries, closed loop has period " +
                     std::to_string(period));
  }
  for (const auto& pk : cert.P) {
    if (pk.num_modes() != n || pk.dim() != cl.state_dim()) {
      throw ModelError("certificate dimensions do not match the closed loop");
    }
  }
  if (cert.nu && static_cast<int>(cert.nu->size()) != period) {
    throw ModelError("certificate nu sequence must have length T");
  }

  CertificateCheck check;
  check.min_residual = std::numeric_limits<double>::infinity();
  check.min_positivity = std::numeric_limits<double>::infinity();
  cert.residuals.assign(period, std::vector<double>(n, 0.0));
  if (cert.nu) {
    for (double v : *cert.nu) check.nu_product *= v;
  }
  for (int k = 0; k < period; ++k) {
    const ModeIndexedSet& next = cert.P[WrapTime(k + 1, period)];
    const double nu_k = cert.nu ? (*cert.nu)[k] : 1.0;
    for (int i = 0; i < n; ++i) {
      const Matrix& p = cert.P[k][i];
      check.max_asymmetry = std::max(check.max_asymmetry, AsymmetryMax(p));
      check.min_positivity = std::min(check.min_positivity, MinEigenvalue(p));
      const double res = MinEigenvalue(nu_k * p - LOperator(next, cl, k, i));
      cert.residuals[k][i] = res;
      if (res < check.min_residual) {
        check.min_residual = res;
        check.worst_k = k;
        check.worst_i = i;
      }
    }
  }

  std::ostringstream msg;
  bool ok = true;
  if (check.max_asymmetry > 1e-9) {
    ok = false;
    msg << "P is not symmetric (" << check.max_asymmetry << "); ";
  }
  if (!(check.min_positivity > 0.0) ||
      check.min_positivity < cert.epsilon - kCertificateTolerance) {
    ok = false;
    msg << "P not positive definite (min eigenvalue " << check.min_positivity
        << "); ";
  }
  if (check.min_residual < -kCertificateTolerance) {
    ok = false;
    msg << "decrease inequality violated at (k=" << check.worst_k
        << ", i=" << check.worst_i << "): min eigenvalue " << check.min_residual
        << "; ";
  }
  if (cert.nu && !(check.nu_product < 1.0)) {
    ok = false;
    msg << "product of nu is " << check.nu_product << " (must be < 1); ";
  }
  check.valid = ok;
  check.message = ok ? "certificate verified" : msg.str();
  return check;
}

LyapunovCertificate CanonicalLyapunov(const ClosedLoopSystem& cl, double tol,
                                      int max_periods) {
  const int period = cl.period();
  const int n = cl.num_modes();
  const int d = cl.state_dim();
  std::vector<ModeIndexedSet> p(period, ModeIndexedSet::Identity(n, d));
  const Matrix eye = Matrix::Identity(d, d);

  double change = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < max_periods; ++sweep) {
    change = 0.0;
    for (int k = period - 1; k >= 0; --k) {
      const ModeIndexedSet& next = p[WrapTime(k + 1, period)];
      std::vector<Matrix> updated;
      updated.reserve(n);
      for (int i = 0; i < n; ++i) {
        Matrix v = Symmetrize(LOperator(next, cl, k, i) + eye);
        change = std::max(change, (v - p[k][i]).cwiseAbs().maxCoeff());
        updated.push_back(std::move(v));
      }
      p[k] = ModeIndexedSet(std::move(updated));
    }
    if (!std::isfinite(change)) break;
    if (change <= tol) {
      LyapunovCertificate cert;
      cert.P = std::move(p);
      cert.epsilon = 1.0;
      return cert;
    }
  }
  std::ostringstream os;
  os << "canonical Lyapunov iteration did not converge in " << max_periods
     << " periods (last change " << change
     << "); the system is likely not mean-square stable";
  throw NotConvergedError(os.str());
}

std::string ToString(FeasibilityStatus s) {
  switch (s) {
    case FeasibilityStatus::kFeasible: return "feasible";
    case FeasibilityStatus::kInfeasible: return "infeasible";
    case FeasibilityStatus::kSolverFailure: return "solver-failure";
  }
  return "unknown";
}

namespace {

FeasibilityResult SolveLyapunovSdp(const ClosedLoopSystem& cl,
                                   const std::vector<double>* nu,
                                   double epsilon, sdp::SdpBackend& backend) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  using sdp::AffineExpr;
  const int period = cl.period();
  const int n = cl.num_modes();
  const int d = cl.state_dim();
  const Matrix eps_eye = epsilon * Matrix::Identity(d, d);

  sdp::SdpProblem problem;
  std::vector<std::vector<sdp::SymmetricVar>> vars(period);
  for (int k = 0; k < period; ++k) {
    for (int i = 0; i < n; ++i) {
      vars[k].push_back(problem.AddSymmetric(
          "P_" + std::to_string(k) + "(" + std::to_string(i) + ")", d));
    }
  }
  for (int k = 0; k < period; ++k) {
    const int kn = WrapTime(k + 1, period);
    const double nu_k = nu ? (*nu)[k] : 1.0;
    for (int i = 0; i < n; ++i) {
      const std::string tag = "(k=" + std::to_string(k) + ",i=" + std::to_string(i) + ")";
      const AffineExpr pki = AffineExpr::Of(vars[k][i]);
      problem.AddLmi(pki - AffineExpr::Constant(eps_eye), "positivity " + tag);

      AffineExpr expected(d, d);
      for (int j = 0; j < n; ++j) {
        const double p = cl.transition(i, j);
        if (p != 0.0) expected = expected + AffineExpr::Of(vars[kn][j]) * p;
      }
      const Matrix& f = cl.Phi(k, i);
      const AffineExpr decrease =
          pki * nu_k - f.transpose() * expected * f - AffineExpr::Constant(eps_eye);
      problem.AddLmi(decrease, "decrease " + tag);

      AffineExpr trace(1, 1);
      for (int r = 0; r < d; ++r) {
        Matrix e = Matrix::Zero(1, d);
        e(0, r) = 1.0;
        trace = trace + e * pki * e.transpose();
      }
      problem.AddObjective(trace);
    }
  }

  const sdp::SdpSolution sol = sdp::Solve(problem, backend);
  FeasibilityResult result;
  result.diagnostics = sol.diagnostics;
  switch (sol.status) {
    case sdp::SolveStatus::kInfeasible:
      result.status = FeasibilityStatus::kInfeasible;
      return result;
    case sdp::SolveStatus::kNumericalFailure:
      result.status = FeasibilityStatus::kSolverFailure;
      return result;
    case sdp::SolveStatus::kOptimal:
      break;
  }
  LyapunovCertificate cert;
  cert.epsilon = epsilon;
  if (nu) cert.nu = *nu;
  for (int k = 0; k < period; ++k) {
    std::vector<Matrix> entries;
    for (int i = 0; i < n; ++i) entries.push_back(sol.Value(vars[k][i]));
    cert.P.emplace_back(std::move(entries));
  }
  // The SDP enforces the shifted inequalities; the certificate only claims
  // the unshifted ones, so positivity is checked against a small fraction of
  // epsilon to absorb solver tolerance.
  LyapunovCertificate claimed = cert;
  claimed.epsilon = 0.5 * epsilon;
  CertificateCheck check = VerifyCertificate(claimed, cl);
  cert.residuals = claimed.residuals;
  result.check = check;
  result.status = check.valid ? FeasibilityStatus::kFeasible
                              : FeasibilityStatus::kSolverFailure;
  if (!check.valid) result.diagnostics += "; certificate re-check failed: " + check.message;
  result.certificate = std::move(cert);
  return result;
}

}  // namespace

FeasibilityResult LyapunovFeasibility(const ClosedLoopSystem& cl,
                                      double epsilon,
                                      sdp::SdpBackend& backend) {
  return SolveLyapunovSdp(cl, nullptr, epsilon, backend);
}

FeasibilityResult RelaxedLyapunovFeasibility(const ClosedLoopSystem& cl,
                                             const std::vector<double>& nu,
                                             double epsilon,
                                             sdp::SdpBackend& backend) {
  if (static_cast<int>(nu.size()) != cl.period()) {
    throw std::invalid_argument("nu must have one entry per time step (T = " +
                                std::to_string(cl.period()) + ")");
  }
  double product = 1.0;
  for (double v : nu) {
    if (!(v > 0.0)) throw std::invalid_argument("every nu_k must be > 0");
    product *= v;
  }
  if (!(product < 1.0)) {
    std::ostringstream os;
    os << "product of nu is " << product << "; the relaxed criterion needs < 1";
    throw std::invalid_argument(os.str());
  }
  return SolveLyapunovSdp(cl, &nu, epsilon, backend);
}

double PerformanceBound(const LyapunovCertificate& cert,
                        const ClosedLoopSystem& cl,
                        const std::vector<ModeIndexedSet>& weights, double beta,
                        const Vector& x0, int i0) {
  const int period = cl.period();
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  if (static_cast<int>(weights.size()) != period ||
      static_cast<int>(cert.P.size()) != period) {
    throw std::invalid_argument("weights and certificate must have length T");
  }
  if (x0.size() != cl.state_dim()) {
    throw std::invalid_argument("x0 has the wrong dimension");
  }
  double worst = std::numeric_limits<double>::infinity();
  int wk = 0, wi = 0;
  for (int k = 0; k < period; ++k) {
    const ModeIndexedSet& next = cert.P[WrapTime(k + 1, period)];
    for (int i = 0; i < cl.num_modes(); ++i) {
      if (MinEigenvalue(weights[k][i]) < -1e-10) {
        throw std::invalid_argument("weight M_k(i) is not PSD at (k=" +
                                    std::to_string(k) + ", i=" +
                                    std::to_string(i) + ")");
      }
      const double r = MinEigenvalue(cert.P[k][i] - LOperator(next, cl, k, i) -
                                     weights[k][i] / beta);
      if (r < worst) {
        worst = r;
        wk = k;
        wi = i;
      }
    }
  }
  if (worst < -kCertificateTolerance) {
    std::ostringstream os;
    os << "performance inequality violated at (k=" << wk << ", i=" << wi
       << "): min eigenvalue " << worst;
    throw PerformanceInequalityError(os.str());
  }
  const Matrix& p0 = cert.P.at(0).at(i0);
  return beta * x0.dot(p0 * x0);
}

}  // namespace pmjls
