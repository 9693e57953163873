#include "pmjls/synthesis.h"

#include <cmath>
#include <sstream>

#include "pmjls/operators.h"

namespace pmjls {

using sdp::AffineExpr;

namespace {

std::string KI(int k, int i) {
  return "(k=" + std::to_string(k) + ",i=" + std::to_string(i) + ")";
}

void RequirePsd(const Matrix& m, int dim, const std::string& what,
                bool definite) {
  if (m.rows() != dim || m.cols() != dim) {
    throw ModelError(what + " must be " + std::to_string(dim) + "x" +
                     std::to_string(dim));
  }
  if (AsymmetryMax(m) > 1e-9) throw ModelError(what + " is not symmetric");
  const double lo = MinEigenvalue(m);
  if (definite ? !(lo > 0.0) : lo < -1e-10) {
    std::ostringstream os;
    os << what << " is not positive " << (definite ? "definite" : "semidefinite")
       << " (min eigenvalue " << lo << ")";
    throw ModelError(os.str());
  }
}

void RequireUMax(const std::vector<double>& u_max, int n) {
  if (static_cast<int>(u_max.size()) != n) {
    throw ModelError("u_max must have one entry per mode");
  }
  for (double u : u_max) {
    if (!(u > 0.0) || !std::isfinite(u)) throw ModelError("u_max entries must be > 0");
  }
}

void RequireStateBounds(const PeriodicTable<Matrix>& w,
                        const PeriodicMjlsModel& model) {
  if (static_cast<int>(w.size()) != model.period) {
    throw ModelError("W must have T = " + std::to_string(model.period) + " rows");
  }
  for (int k = 0; k < model.period; ++k) {
    if (static_cast<int>(w[k].size()) != model.num_modes) {
      throw ModelError("W[" + std::to_string(k) + "] must have N entries");
    }
    for (int i = 0; i < model.num_modes; ++i) {
      RequirePsd(w[k][i], model.n_x, "W" + KI(k, i), false);
    }
  }
}

AffineExpr Trace(const sdp::SymmetricVar& v) {
  AffineExpr t(1, 1);
  const AffineExpr s = AffineExpr::Of(v);
  for (int r = 0; r < v.dim; ++r) {
    Matrix e = Matrix::Zero(1, v.dim);
    e(0, r) = 1.0;
    t = t + e * s * e.transpose();
  }
  return t;
}

/// Rows sqrt(p_ij) I stacked over j: l_i^T as an (N n) x n matrix.
Matrix StackedRoots(const Matrix& transition, int i, int n) {
  const int modes = static_cast<int>(transition.cols());
  Matrix l = Matrix::Zero(modes * n, n);
  for (int j = 0; j < modes; ++j) {
    l.block(j * n, 0, n, n) = std::sqrt(transition(i, j)) * Matrix::Identity(n, n);
  }
  return l;
}

AffineExpr BlockDiagonal(const std::vector<sdp::SymmetricVar>& vars, int n) {
  const int modes = static_cast<int>(vars.size());
  AffineExpr out(modes * n, modes * n);
  for (int j = 0; j < modes; ++j) {
    Matrix sel = Matrix::Zero(modes * n, n);
    sel.block(j * n, 0, n, n).setIdentity();
    out = out + sel * AffineExpr::Of(vars[j]) * sel.transpose();
  }
  return out;
}

AffineExpr Epsilon(double eps, int n) {
  return AffineExpr::Constant(eps * Matrix::Identity(n, n));
}

/// Declares S_k(i), Y_k(i) for every k, i.
SynthesisVariables DeclareVariables(sdp::SdpProblem& p,
                                    const PeriodicMjlsModel& model) {
  SynthesisVariables v;
  v.S.resize(model.period);
  v.Y.resize(model.period);
  for (int k = 0; k < model.period; ++k) {
    for (int i = 0; i < model.num_modes; ++i) {
      v.S[k].push_back(p.AddSymmetric("S" + KI(k, i), model.n_x));
      v.Y[k].push_back(p.AddMatrix("Y" + KI(k, i), model.n_u, model.n_x));
    }
  }
  return v;
}

/// A_k(i) S_k(i) + B_k(i) Y_k(i).
AffineExpr ClosedLoopImage(const PeriodicMjlsModel& model,
                           const SynthesisVariables& v, int k, int i) {
  return model.A[k][i] * AffineExpr::Of(v.S[k][i]) +
         model.B[k][i] * AffineExpr::Of(v.Y[k][i]);
}

/// Invariance, control-norm and state-bound blocks shared by both problems.
void AddCommonConstraints(sdp::SdpProblem& p, const PeriodicMjlsModel& model,
                          const SynthesisVariables& v,
                          const std::vector<double>& u_max,
                          const PeriodicTable<Matrix>* w, double eps) {
  const int n = model.n_x;
  const int m = model.n_u;
  for (int k = 0; k < model.period; ++k) {
    const int kn = WrapTime(k + 1, model.period);
    for (int i = 0; i < model.num_modes; ++i) {
      const AffineExpr s = AffineExpr::Of(v.S[k][i]);
      const AffineExpr g = ClosedLoopImage(model, v, k, i);
      for (int j = 0; j < model.num_modes; ++j) {
        sdp::BlockLmi inv({n, n});
        inv.Set(0, 0, s);
        inv.Set(1, 0, g);
        inv.Set(1, 1, AffineExpr::Of(v.S[kn][j]));
        p.AddLmi(inv.Assemble() - Epsilon(eps, 2 * n),
                 "invariance " + KI(k, i) + " j=" + std::to_string(j));
      }

      sdp::BlockLmi ctl({m, n});
      ctl.Set(0, 0, AffineExpr::Constant(u_max[i] * u_max[i] * Matrix::Identity(m, m)));
      ctl.Set(1, 0, AffineExpr::Of(v.Y[k][i]).Transpose());
      ctl.Set(1, 1, s);
      p.AddLmi(ctl.Assemble(), "control bound " + KI(k, i));

      if (w) {
        const Matrix h = PsdSqrt((*w)[k][i]);
        p.AddLmi(AffineExpr::Constant(Matrix::Identity(n, n)) - h * s * h.transpose(),
                 "state bound " + KI(k, i));
      }
    }
  }
}

PeriodicTable<Matrix> ReadY(const sdp::SdpSolution& sol,
                            const SynthesisVariables& v) {
  PeriodicTable<Matrix> y(v.Y.size());
  for (std::size_t k = 0; k < v.Y.size(); ++k) {
    for (const auto& var : v.Y[k]) y[k].push_back(sol.Value(var));
  }
  return y;
}

std::vector<ModeIndexedSet> ReadS(const sdp::SdpSolution& sol,
                                  const SynthesisVariables& v) {
  std::vector<ModeIndexedSet> s;
  for (const auto& row : v.S) {
    std::vector<Matrix> entries;
    for (const auto& var : row) entries.push_back(sol.Value(var));
    s.emplace_back(std::move(entries));
  }
  return s;
}

Matrix Inverse(const Matrix& s) {
  return Symmetrize(s.llt().solve(Matrix::Identity(s.rows(), s.cols())));
}

struct CheckInputs {
  const PeriodicMjlsModel* model;
  const std::vector<double>* u_max;
  const PeriodicTable<Matrix>* w;
  const std::vector<Vector>* hull;           // Problem 1
  const SynthesisSpecP1* p1 = nullptr;       // cost weights, Problem 1
  const std::vector<double>* nu = nullptr;   // Problem 2
  double beta = 0.0;
};

void RunChecks(const CheckInputs& in, SynthesisResult& r) {
  const PeriodicMjlsModel& model = *in.model;
  const int period = model.period;
  const int modes = model.num_modes;
  const ClosedLoopSystem cl = CloseLoop(model, r.gains);
  SynthesisChecks& c = r.checks;
  c.schur_min = c.decrease_min = c.invariance_min = c.control_min =
      std::numeric_limits<double>::infinity();

  std::vector<ModeIndexedSet> p;
  for (int k = 0; k < period; ++k) {
    std::vector<Matrix> entries;
    for (int i = 0; i < modes; ++i) entries.push_back(Inverse(r.S[k][i]));
    p.emplace_back(std::move(entries));
  }
  std::vector<ModeIndexedSet> weights;
  if (in.p1) weights = StageCostWeights(*in.p1, r.gains);

  for (int k = 0; k < period; ++k) {
    const int kn = WrapTime(k + 1, period);
    const double nu_k = in.nu ? (*in.nu)[k] : 1.0;
    for (int i = 0; i < modes; ++i) {
      const Matrix& s = r.S[k][i];
      const Matrix& y = r.Y[k][i];
      const Matrix& kk = r.gains.K[k][i];
      c.gain_residual = std::max(
          c.gain_residual, (kk * s - y).cwiseAbs().maxCoeff() /
                               (1.0 + y.cwiseAbs().maxCoeff()));

      // Schur-reduced decrease inequality in S form.
      const Matrix gamma = model.A[k][i] * s + model.B[k][i] * y;
      Matrix reduced = nu_k * s - gamma.transpose() *
                                      Expectation(p[kn], model.transition, i) *
                                      gamma;
      if (in.p1) {
        reduced -= (s * in.p1->Q[i] * s + y.transpose() * in.p1->R[i] * y) / in.beta;
      }
      c.schur_min = std::min(
          c.schur_min,
          MinEigenvalue(reduced) / std::max(1.0, s.cwiseAbs().maxCoeff()));

      Matrix decrease = nu_k * p[k][i] - LOperator(p[kn], cl, k, i);
      if (in.p1) decrease -= weights[k][i] / in.beta;
      c.decrease_min = std::min(c.decrease_min, MinEigenvalue(decrease));

      const Matrix& phi = cl.Phi(k, i);
      for (int j = 0; j < modes; ++j) {
        c.invariance_min = std::min(
            c.invariance_min,
            MinEigenvalue(p[k][i] - phi.transpose() * p[kn][j] * phi));
      }

      const double u2 = (*in.u_max)[i] * (*in.u_max)[i];
      c.control_min = std::min(
          c.control_min,
          MinEigenvalue(u2 * Matrix::Identity(model.n_u, model.n_u) -
                        y * p[k][i] * y.transpose()) / u2);
      if (in.w) {
        const Matrix h = PsdSqrt((*in.w)[k][i]);
        c.state_min = std::min(
            c.state_min,
            MinEigenvalue(Matrix::Identity(model.n_x, model.n_x) - h * s * h.transpose()));
      }
    }
  }
  if (in.hull) {
    for (const auto& x : *in.hull) {
      for (int i = 0; i < modes; ++i) {
        c.hull_min = std::min(c.hull_min, 1.0 - x.dot(p[0][i] * x));
      }
    }
  }

  r.closed_loop_radius = CheckMssPeriodic(cl).spectral_radius;
  r.certificate.P = p;
  r.certificate.epsilon = 0.0;
  if (in.nu) r.certificate.nu = *in.nu;
  r.certificate_check = VerifyCertificate(r.certificate, cl);

  const double tol = kSynthesisCheckTolerance;
  std::ostringstream msg;
  auto require = [&](bool ok, const std::string& what, double value) {
    if (!ok) msg << what << " (" << value << "); ";
  };
  require(c.gain_residual <= 1e-8, "gain residual K S - Y too large", c.gain_residual);
  require(c.schur_min >= -tol, "Schur-reduced decrease inequality violated", c.schur_min);
  require(c.decrease_min >= -tol, "Lyapunov decrease inequality violated", c.decrease_min);
  require(c.invariance_min >= -tol, "invariance inequality violated", c.invariance_min);
  require(c.control_min >= -tol, "control-norm inequality violated", c.control_min);
  require(c.state_min >= -tol, "state-bound inequality violated", c.state_min);
  require(c.hull_min >= -tol, "initial hull not inside the ellipsoid", c.hull_min);
  require(r.closed_loop_radius < 1.0, "closed loop is not mean-square stable",
          r.closed_loop_radius);
  if (!r.certificate_check->valid) msg << r.certificate_check->message;
  c.message = msg.str();
  c.passed = c.message.empty();
  if (c.passed) c.message = "all post-solve checks passed";
}

// The SDP is solved in state units x = c x~, where A is unchanged,
// B~ = B / c, S~ = S / c^2 and Y~ = Y / c. This keeps S~ of order one for
// hulls or state bounds far from the unit ball.
PeriodicMjlsModel ScaledModel(PeriodicMjlsModel model, double c) {
  for (auto& row : model.B) {
    for (auto& b : row) b /= c;
  }
  return model;
}

PeriodicTable<Matrix> ScaledBounds(PeriodicTable<Matrix> w, double c) {
  for (auto& row : w) {
    for (auto& m : row) m *= c * c;
  }
  return w;
}

SynthesisResult Finish(const sdp::SdpProblem& problem,
                       const SynthesisVariables& vars, double c,
                       const CheckInputs& in, double epsilon,
                       sdp::SdpBackend& backend) {
  SynthesisResult r;
  r.num_lmis = static_cast<int>(problem.lmis().size());
  const sdp::SdpSolution sol = sdp::Solve(problem, backend);
  r.solver_iterations = sol.iterations;
  r.solve_seconds = sol.solve_seconds;
  r.max_constraint_violation = sol.max_constraint_violation;
  r.diagnostics = sol.diagnostics;
  if (sol.status == sdp::SolveStatus::kInfeasible) {
    r.status = SynthesisStatus::kInfeasible;
    return r;
  }
  if (sol.status != sdp::SolveStatus::kOptimal) {
    r.status = SynthesisStatus::kNumericalFailure;
    return r;
  }

  r.S = ReadS(sol, vars);
  r.Y = ReadY(sol, vars);
  for (auto& sk : r.S) {
    std::vector<Matrix> entries(sk.begin(), sk.end());
    for (auto& m : entries) m *= c * c;
    sk = ModeIndexedSet(std::move(entries));
  }
  for (auto& yk : r.Y) {
    for (auto& m : yk) m *= c;
  }
  if (vars.beta) r.beta = sol.Value(*vars.beta);
  try {
    r.gains = ExtractGains(r.S, r.Y, 0.5 * epsilon * c * c);
  } catch (const GainExtractionError& e) {
    r.status = SynthesisStatus::kNumericalFailure;
    r.diagnostics += std::string("; ") + e.what();
    return r;
  }
  for (int i = 0; i < in.model->num_modes; ++i) {
    r.ellipsoid_traces.push_back(r.S[0][i].trace());
  }

  CheckInputs with_beta = in;
  if (r.beta) with_beta.beta = *r.beta;
  RunChecks(with_beta, r);
  r.status = r.checks.passed ? SynthesisStatus::kSuccess
                             : SynthesisStatus::kNumericalFailure;
  if (!r.checks.passed) r.diagnostics += "; post-solve checks failed: " + r.checks.message;
  return r;
}

}  // namespace

void ValidateSpec(const PeriodicMjlsModel& model, const SynthesisSpecP1& spec) {
  const int n = model.num_modes;
  if (spec.Q.num_modes() != n || spec.R.num_modes() != n) {
    throw ModelError("Q and R must have one entry per mode");
  }
  for (int i = 0; i < n; ++i) {
    RequirePsd(spec.Q[i], model.n_x, "Q(" + std::to_string(i) + ")", false);
    RequirePsd(spec.R[i], model.n_u, "R(" + std::to_string(i) + ")", true);
  }
  RequireUMax(spec.u_max, n);
  if (spec.W) RequireStateBounds(*spec.W, model);
  if (spec.hull_vertices.empty()) {
    throw ModelError("hull_vertices must contain at least one state");
  }
  for (const auto& x : spec.hull_vertices) {
    if (x.size() != model.n_x) throw ModelError("hull vertex has the wrong dimension");
  }
}

void ValidateSpec(const PeriodicMjlsModel& model, const SynthesisSpecP2& spec) {
  if (static_cast<int>(spec.nu.size()) != model.period) {
    throw ModelError("nu must have T = " + std::to_string(model.period) + " entries");
  }
  double product = 1.0;
  for (double v : spec.nu) {
    if (!(v > 0.0)) throw ModelError("every nu_k must be > 0");
    product *= v;
  }
  if (!(product < 1.0 - 1e-12)) {
    std::ostringstream os;
    os << "product of nu is " << product << "; it must be < 1";
    throw ModelError(os.str());
  }
  RequireUMax(spec.u_max, model.num_modes);
  RequireStateBounds(spec.W, model);
  if (spec.rho.size() != model.num_modes) {
    throw ModelError("rho must have one entry per mode");
  }
  if ((spec.rho.array() < 0.0).any() ||
      std::abs(spec.rho.sum() - 1.0) > kStochasticTolerance) {
    throw ModelError("rho must be a probability vector");
  }
}

AssembledSynthesis BuildP1Sdp(const PeriodicMjlsModel& model,
                              const SynthesisSpecP1& spec, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  ValidateSpec(model, spec);
  AssembledSynthesis a;
  sdp::SdpProblem& p = a.problem;
  const int n = model.n_x;
  const int m = model.n_u;
  const int modes = model.num_modes;

  const sdp::ScalarVar beta = p.AddScalar("beta");
  a.vars = DeclareVariables(p, model);
  a.vars.beta = beta;
  p.AddObjective(AffineExpr::Of(beta));

  for (std::size_t v = 0; v < spec.hull_vertices.size(); ++v) {
    const Vector& x = spec.hull_vertices[v];
    for (int i = 0; i < modes; ++i) {
      sdp::BlockLmi hull({1, n});
      hull.Set(0, 0, AffineExpr::Constant(Matrix::Ones(1, 1)));
      hull.Set(1, 0, AffineExpr::Constant(x));
      hull.Set(1, 1, AffineExpr::Of(a.vars.S[0][i]));
      p.AddLmi(hull.Assemble(),
               "hull vertex " + std::to_string(v) + " i=" + std::to_string(i));
    }
  }

  for (int k = 0; k < model.period; ++k) {
    const int kn = WrapTime(k + 1, model.period);
    for (int i = 0; i < modes; ++i) {
      const AffineExpr s = AffineExpr::Of(a.vars.S[k][i]);
      sdp::BlockLmi cost({n, modes * n, n, m});
      cost.Set(0, 0, s);
      cost.Set(1, 0, StackedRoots(model.transition, i, n) *
                         ClosedLoopImage(model, a.vars, k, i));
      cost.Set(1, 1, BlockDiagonal(a.vars.S[kn], n));
      cost.Set(2, 0, PsdSqrt(spec.Q[i]) * s);
      cost.Set(2, 2, AffineExpr::ScaledIdentity(beta, n));
      cost.Set(3, 0, PsdSqrt(spec.R[i]) * AffineExpr::Of(a.vars.Y[k][i]));
      cost.Set(3, 3, AffineExpr::ScaledIdentity(beta, m));
      p.AddLmi(cost.Assemble() - Epsilon(epsilon, (modes + 2) * n + m),
               "cost decrease " + KI(k, i));
    }
  }
  AddCommonConstraints(p, model, a.vars, spec.u_max,
                       spec.W ? &*spec.W : nullptr, epsilon);
  return a;
}

AssembledSynthesis BuildP2Sdp(const PeriodicMjlsModel& model,
                              const SynthesisSpecP2& spec, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  ValidateSpec(model, spec);
  AssembledSynthesis a;
  sdp::SdpProblem& p = a.problem;
  const int n = model.n_x;
  const int modes = model.num_modes;
  a.vars = DeclareVariables(p, model);

  for (int i = 0; i < modes; ++i) {
    if (spec.rho(i) != 0.0) p.AddObjective(Trace(a.vars.S[0][i]) * -spec.rho(i));
  }
  for (int k = 0; k < model.period; ++k) {
    const int kn = WrapTime(k + 1, model.period);
    for (int i = 0; i < modes; ++i) {
      sdp::BlockLmi dec({n, modes * n});
      dec.Set(0, 0, AffineExpr::Of(a.vars.S[k][i]) * spec.nu[k]);
      dec.Set(1, 0, StackedRoots(model.transition, i, n) *
                        ClosedLoopImage(model, a.vars, k, i));
      dec.Set(1, 1, BlockDiagonal(a.vars.S[kn], n));
      p.AddLmi(dec.Assemble() - Epsilon(epsilon, (modes + 1) * n),
               "relaxed decrease " + KI(k, i));
    }
  }
  AddCommonConstraints(p, model, a.vars, spec.u_max, &spec.W, epsilon);
  return a;
}

ControllerGains ExtractGains(const std::vector<ModeIndexedSet>& S,
                             const PeriodicTable<Matrix>& Y,
                             double min_eigenvalue) {
  if (S.size() != Y.size() || S.empty()) {
    throw std::invalid_argument("S and Y must both have T entries");
  }
  ControllerGains g;
  g.period = static_cast<int>(S.size());
  g.num_modes = S[0].num_modes();
  g.K.resize(g.period);
  for (int k = 0; k < g.period; ++k) {
    if (static_cast<int>(Y[k].size()) != g.num_modes) {
      throw std::invalid_argument("Y[k] must have N entries");
    }
    for (int i = 0; i < g.num_modes; ++i) {
      const Matrix& s = S[k][i];
      const double lo = MinEigenvalue(s);
      if (!(lo >= min_eigenvalue)) {
        std::ostringstream os;
        os << "S" << KI(k, i) << " is near-singular: min eigenvalue " << lo
           << " < " << min_eigenvalue;
        throw GainExtractionError(os.str(), lo);
      }
      // K = Y S^{-1}  <=>  S K^T = Y^T for symmetric S.
      g.K[k].push_back(s.llt().solve(Y[k][i].transpose()).transpose());
    }
  }
  return g;
}

std::string ToString(SynthesisStatus s) {
  switch (s) {
    case SynthesisStatus::kSuccess: return "success";
    case SynthesisStatus::kInfeasible: return "infeasible";
    case SynthesisStatus::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

std::vector<ModeIndexedSet> StageCostWeights(const SynthesisSpecP1& spec,
                                             const ControllerGains& gains) {
  std::vector<ModeIndexedSet> m;
  for (int k = 0; k < gains.period; ++k) {
    std::vector<Matrix> entries;
    for (int i = 0; i < gains.num_modes; ++i) {
      const Matrix& kk = gains.K[k][i];
      entries.push_back(Symmetrize(spec.Q[i] + kk.transpose() * spec.R[i] * kk));
    }
    m.emplace_back(std::move(entries));
  }
  return m;
}

SynthesisResult SynthesizeP1(const PeriodicMjlsModel& model,
                             const SynthesisSpecP1& spec, double epsilon,
                             sdp::SdpBackend& backend) {
  ValidateSpec(model, spec);
  double c = 0.0;
  for (const auto& x : spec.hull_vertices) c = std::max(c, x.cwiseAbs().maxCoeff());
  if (!(c > 0.0)) c = 1.0;
  SynthesisSpecP1 scaled = spec;
  for (auto& x : scaled.hull_vertices) x /= c;
  {
    std::vector<Matrix> q(spec.Q.begin(), spec.Q.end());
    for (auto& m : q) m *= c * c;
    scaled.Q = ModeIndexedSet(std::move(q));
  }
  if (spec.W) scaled.W = ScaledBounds(*spec.W, c);

  AssembledSynthesis a = BuildP1Sdp(ScaledModel(model, c), scaled, epsilon);
  CheckInputs in{&model, &spec.u_max, spec.W ? &*spec.W : nullptr,
                 &spec.hull_vertices};
  in.p1 = &spec;
  SynthesisResult r = Finish(a.problem, a.vars, c, in, epsilon, backend);
  if (r.beta) r.objective = *r.beta;
  if (!r.ellipsoid_traces.empty()) {
    double sum = 0.0;
    for (double t : r.ellipsoid_traces) sum += t;
    r.rho_average_trace = sum / static_cast<double>(r.ellipsoid_traces.size());
  }
  return r;
}

SynthesisResult SynthesizeP2(const PeriodicMjlsModel& model,
                             const SynthesisSpecP2& spec, double epsilon,
                             sdp::SdpBackend& backend) {
  ValidateSpec(model, spec);
  double w_max = 0.0;
  for (const auto& row : spec.W) {
    for (const auto& w : row) w_max = std::max(w_max, -MinEigenvalue(-w));
  }
  const double c = w_max > 0.0 ? 1.0 / std::sqrt(w_max) : 1.0;
  SynthesisSpecP2 scaled = spec;
  scaled.W = ScaledBounds(spec.W, c);

  AssembledSynthesis a = BuildP2Sdp(ScaledModel(model, c), scaled, epsilon);
  CheckInputs in{&model, &spec.u_max, &spec.W, nullptr};
  in.nu = &spec.nu;
  SynthesisResult r = Finish(a.problem, a.vars, c, in, epsilon, backend);
  for (std::size_t i = 0; i < r.ellipsoid_traces.size(); ++i) {
    r.rho_average_trace += spec.rho(static_cast<Eigen::Index>(i)) * r.ellipsoid_traces[i];
  }
  r.objective = -r.rho_average_trace;
  return r;
}

}  // namespace pmjls
