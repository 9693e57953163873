// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cli.h"
#include "json.hpp"
#include "pmjls/clarabel_backend.h"
#include "pmjls/io.h"
#include "pmjls/operators.h"
#include "pmjls/simulate.h"
#include "pmjls/stability.h"
#include "pmjls/synthesis.h"
#include "support.h"

using namespace pmjls;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kOpenLoopRadius = 1.255;
constexpr double kOpenLoopRadiusTol = 0.01;
constexpr double kOpenLoopSeconds = 1.0;
constexpr double kMonodromyNorm1 = 0.23;
constexpr double kMonodromyNorm2 = 0.55;
constexpr double kMonodromyNormTol = 0.005;
constexpr double kClosedLoopRadiusMax = 0.1;
constexpr double kSynthesisSeconds = 30.0;
constexpr int kAuditTrajectories = 1000;
constexpr int kAuditHorizon = 100;
constexpr int kEquivalenceSystems = 200;
constexpr double kEquivalenceGap = 1e-3;
constexpr double kEquivalenceEpsilon = 1e-6;
constexpr int kPropertyDraws = 100;
constexpr double kPropertyTol = 1e-9;
constexpr int kCovarianceTrajectories = 10000;
constexpr double kCovarianceSigmas = 5.0;
constexpr double kCanonicalResidualTol = 1e-6;
constexpr int kCostPoints = 10;
constexpr int kCostTrajectories = 1000;
constexpr std::uint64_t kSeed = 42;

const std::string kData = PMJLS_DATA_DIR;
const std::string kModel = kData + "/actuator_failure.json";
const std::string kSpecP1 = kData + "/p1_spec.json";
const std::string kSpecP2 = kData + "/p2_spec.json";

int failures = 0;

void Report(int id, bool pass, const std::string& detail) {
  std::cout << "AC" << id << (id < 10 ? "  " : " ") << (pass ? "PASS" : "FAIL") << "  "
            << detail << std::endl;
  if (!pass) ++failures;
}

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
  double seconds;
};

CliRun Mjls(std::vector<std::string> args) {
  args.insert(args.begin(), "mjls");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const auto start = std::chrono::steady_clock::now();
  const int code = cli::Run(static_cast<int>(argv.size()), argv.data(), out, err);
  const double s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {code, out.str(), err.str(), s};
}

json ReadJson(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

void OpenLoop() {
  const CliRun r = Mjls({"analyze", kModel});
  if (r.code != 0) {
    Report(1, false, "analyze exited " + std::to_string(r.code) + ": " + r.err);
    return;
  }
  const json j = json::parse(r.out);
  const double rho = j["spectral_radius_GT"].get<double>();
  const bool pass = std::abs(rho - kOpenLoopRadius) <= kOpenLoopRadiusTol &&
                    j["mss"] == false && r.seconds < kOpenLoopSeconds;
  Report(1, pass,
         Fmt("sigma_m(G_T) = %.5f (target %.3f +- %.2f), mss=false, %.4f s (< %.0f s)", rho,
             kOpenLoopRadius, kOpenLoopRadiusTol, r.seconds, kOpenLoopSeconds));
}

void Monodromy() {
  const PeriodicMjlsModel m = ActuatorFailureExample();
  const Matrix phi1 = PerModeMonodromy(m, 0);
  const Matrix phi2 = PerModeMonodromy(m, 1);
  const double n1 = OperatorNorm(phi1), n2 = OperatorNorm(phi2);
  const double r1 = SpectralRadius(phi1), r2 = SpectralRadius(phi2);
  const bool pass = std::abs(n1 - kMonodromyNorm1) <= kMonodromyNormTol &&
                    std::abs(n2 - kMonodromyNorm2) <= kMonodromyNormTol && r1 < 1.0 && r2 < 1.0;
  Report(2, pass,
         Fmt("max singular values %.4f, %.4f (targets %.2f, %.2f +- %.3f); spectral radii "
             "%.4f, %.4f (< 1)",
             n1, n2, kMonodromyNorm1, kMonodromyNorm2, kMonodromyNormTol, r1, r2));
}

void StableModesUnstableJump() {
  const ClosedLoopSystem cl = StableModesUnstableJumpExample();
  const double r1 = SpectralRadius(cl.phi[0][0]);
  const double r2 = SpectralRadius(cl.phi[0][1]);
  const StabilityReport s = CheckMssTimeInvariant(ModeIndexedSet(cl.phi[0]), cl.transition);
  Report(3, r1 < 1.0 && r2 < 1.0 && s.spectral_radius > 1.0,
         Fmt("rho(A1) = %.4f, rho(A2) = %.4f (< 1); sigma_m = %.4f (> 1)", r1, r2,
             s.spectral_radius));
}

// Returns the report of a CLI synthesis or an empty object on failure.
json Synthesize(int id, const std::string& problem, const std::string& spec) {
  const CliRun r = Mjls({"synthesize", problem, "--model", kModel, "--spec", spec});
  const fs::path report_path = problem + "_report.json";
  if (r.code != 0 || !fs::exists(report_path)) {
    Report(id, false, "synthesize " + problem + " exited " + std::to_string(r.code) + ": " + r.err);
    return json::object();
  }
  const json rep = ReadJson(report_path);
  const double radius = rep["closed_loop_radius"].get<double>();
  const double solve = rep["solver"]["solve_seconds"].get<double>();
  bool pass = rep["status"] == "success" && radius < kClosedLoopRadiusMax && radius < 1.0;
  std::string detail = Fmt("%s: status %s, sigma_m(G_T) = %.5f (< %.1f), %d LMIs, solve %.3f s",
                           problem.c_str(), rep["status"].get<std::string>().c_str(), radius,
                           kClosedLoopRadiusMax, rep["num_lmis"].get<int>(), solve);
  if (problem == "p1") {
    pass = pass && solve < kSynthesisSeconds && rep.contains("beta") && rep["beta"].is_number();
    detail += Fmt(" (< %.0f s), beta = %.6g", kSynthesisSeconds,
                  rep.value("beta", json(0.0)).get<double>());
  } else {
    const auto& tr = rep["ellipsoid_traces"];
    detail += Fmt(", tr S_0 = (%.6g, %.6g)", tr[0].get<double>(), tr[1].get<double>());
  }
  Report(id, pass, detail);
  return rep;
}

void Audit(bool have_p1, bool have_p2) {
  if (!have_p1 || !have_p2) {
    Report(6, false, "requires both synthesized controllers");
    return;
  }
  std::string detail;
  bool pass = true;
  for (const std::string problem : {"p1", "p2"}) {
    const std::string out = "audit_" + problem;
    const CliRun r = Mjls({"simulate", "--model", kModel, "--gains", problem + "_gains.json",
                           "--spec", problem == "p1" ? kSpecP1 : kSpecP2, "--certificate",
                           problem + "_certificate.json", "--trajectories",
                           std::to_string(kAuditTrajectories), "--horizon",
                           std::to_string(kAuditHorizon), "--seed", std::to_string(kSeed),
                           "--out", out});
    if (r.code != 0) {
      Report(6, false, "simulate " + problem + " exited " + std::to_string(r.code) + ": " + r.err);
      return;
    }
    const json s = ReadJson(fs::path(out) / "summary.json");
    const long cv = s["control_bound"]["violations"], cc = s["control_bound"]["checked"];
    const long lv = s["lyapunov_monotonicity"]["violations"];
    const long lc = s["lyapunov_monotonicity"]["checked"];
    const long sv = s["state_bound"]["violations"], sc = s["state_bound"]["checked"];
    pass = pass && cv == 0 && lv == 0 && cc > 0 && lc > 0;
    if (problem == "p2") pass = pass && sv == 0 && sc > 0;
    detail += Fmt("%s: control %ld/%ld (max ratio %.4f), lyapunov %ld/%ld", problem.c_str(), cv,
                  cc, s["control_bound"]["max_ratio"].get<double>(), lv, lc);
    if (problem == "p2") {
      detail += Fmt(", state %ld/%ld (max x'Wx %.4f)", sv, sc,
                    s["state_bound"]["max_value"].get<double>());
    }
    detail += problem == "p1" ? "; " : "";
  }
  Report(6, pass, detail + Fmt(" [%d x %d steps]", kAuditTrajectories, kAuditHorizon));
}

void Equivalence() {
  std::mt19937_64 rng(kSeed);
  std::uniform_int_distribution<int> period(1, 3);
  std::uniform_real_distribution<double> log_target(std::log(0.25), std::log(4.0));
  sdp::ClarabelBackend backend;
  int tested = 0, agree = 0, stable = 0;
  std::string first_mismatch;
  while (tested < kEquivalenceSystems) {
    ClosedLoopSystem cl = testing::RandomClosedLoop(rng, 2, 2, period(rng), 1.0);
    const double raw = SpectralRadius(OnePeriodOperator(cl));
    if (!(raw > 0.0)) continue;
    const double scale = std::pow(std::exp(log_target(rng)) / raw, 1.0 / (2.0 * cl.period()));
    for (auto& row : cl.phi) {
      for (auto& p : row) p *= scale;
    }
    const double sigma = SpectralRadius(OnePeriodOperator(cl));
    if (std::abs(sigma - 1.0) < kEquivalenceGap) continue;
    ++tested;
    const bool mss = sigma < 1.0;
    stable += mss;
    const FeasibilityResult f = LyapunovFeasibility(cl, kEquivalenceEpsilon, backend);
    const bool feasible = f.status == FeasibilityStatus::kFeasible;
    if (feasible == mss) {
      ++agree;
    } else if (first_mismatch.empty()) {
      first_mismatch = Fmt(" first mismatch: sigma_m = %.6f, status %s", sigma,
                           ToString(f.status).c_str());
    }
  }
  Report(7, agree == tested,
         Fmt("%d/%d agree (%d MSS, %d not; |sigma_m - 1| >= %.0e, T <= 3)", agree, tested, stable,
             tested - stable, kEquivalenceGap) +
             first_mismatch);
}

double InnerProduct(const ModeIndexedSet& a, const ModeIndexedSet& b) {
  double s = 0.0;
  for (int i = 0; i < a.num_modes(); ++i) s += (a[i] * b[i]).trace();
  return s;
}

void Properties() {
  std::mt19937_64 rng(kSeed + 1);
  std::uniform_int_distribution<int> period(1, 4);
  double adjoint = 0.0, lifting = 0.0, spectra = 0.0, psd = 0.0;
  for (int d = 0; d < kPropertyDraws; ++d) {
    const ClosedLoopSystem cl = testing::RandomClosedLoop(rng, 3, 2, period(rng), 0.8);
    const ModeIndexedSet v = testing::RandomSymmetricSet(rng, 3, 2);
    const ModeIndexedSet u = testing::RandomSymmetricSet(rng, 3, 2);
    const double lhs = InnerProduct(TStep(v, cl, 0), u);
    const double rhs = InnerProduct(v, LStep(u, cl, 0));
    adjoint = std::max(adjoint, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
  }
  for (int d = 0; d < kPropertyDraws; ++d) {
    const ClosedLoopSystem cl = testing::RandomClosedLoop(rng, 3, 2, period(rng), 0.8);
    ModeIndexedSet v = testing::RandomSymmetricSet(rng, 3, 2);
    const Vector lifted = OnePeriodOperator(cl) * StackVec(v);
    for (int k = 0; k < cl.period(); ++k) v = TStep(v, cl, k);
    lifting = std::max(lifting, (lifted - StackVec(v)).norm() / (1.0 + lifted.norm()));
  }
  for (int d = 0; d < kPropertyDraws; ++d) {
    const ClosedLoopSystem cl = testing::RandomClosedLoop(rng, 3, 2, period(rng), 0.8);
    const double g = SpectralRadius(OnePeriodOperator(cl));
    const double f = SpectralRadius(FPeriodOperator(cl));
    spectra = std::max(spectra, std::abs(g - f) / (1.0 + g));
  }
  for (int d = 0; d < kPropertyDraws; ++d) {
    const ClosedLoopSystem cl = testing::RandomClosedLoop(rng, 3, 2, period(rng), 0.8);
    const ModeIndexedSet v = testing::RandomPsdSet(rng, 3, 2);
    for (int k = 0; k < cl.period(); ++k) {
      const ModeIndexedSet t = TStep(v, cl, k);
      const ModeIndexedSet l = LStep(v, cl, k);
      for (int i = 0; i < 3; ++i) {
        psd = std::max(psd, -MinEigenvalue(t[i]) / (1.0 + t[i].norm()));
        psd = std::max(psd, -MinEigenvalue(l[i]) / (1.0 + l[i].norm()));
      }
    }
  }
  const bool pass = adjoint <= kPropertyTol && lifting <= kPropertyTol &&
                    spectra <= kPropertyTol && psd <= kPropertyTol;
  Report(8, pass,
         Fmt("max rel. errors over %d draws each: adjoint %.1e, lifting %.1e, "
             "sigma(F_T)-sigma(G_T) %.1e, PSD loss %.1e (tol %.0e)",
             kPropertyDraws, adjoint, lifting, spectra, psd, kPropertyTol));
}

void Covariance(const std::optional<SynthesisResult>& p1) {
  if (!p1 || p1->status != SynthesisStatus::kSuccess) {
    Report(9, false, "requires the cost synthesis");
    return;
  }
  const PeriodicMjlsModel model = ActuatorFailureExample();
  const ClosedLoopSystem cl = CloseLoop(model, p1->gains);
  SimulationConfig c;
  c.horizon = kAuditHorizon;
  c.n_trajectories = kCovarianceTrajectories;
  c.seed = kSeed;
  c.initial = HullInitialStates{testing::ExampleSpecP1().hull_vertices};
  c.rho = Vector::Constant(2, 0.5);
  const MonteCarloResult mc = MonteCarlo(cl, p1->gains, c, {});
  const CovarianceSeries cov =
      PropagateCovariance(cl, InitialSecondMoment(c.initial, c.rho, model.n_x), c.horizon);
  double worst = 0.0;
  for (int k : {0, 1, 2, 3, 5, 10, 20, 50, 100}) {
    const double se = std::sqrt(mc.var_state_norm_sq[k] / c.n_trajectories);
    const double diff = std::abs(cov.aggregate[k].trace() - mc.mean_state_norm_sq[k]);
    worst = std::max(worst, se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : 1e300));
  }
  double residual = 0.0;
  try {
    const LyapunovCertificate canon = CanonicalLyapunov(cl);
    for (int k = 0; k < model.period; ++k) {
      const ModeIndexedSet next = LStep(canon.P[(k + 1) % model.period], cl, k);
      for (int i = 0; i < model.num_modes; ++i) {
        residual = std::max(residual, (canon.P[k][i] - next[i] - Matrix::Identity(2, 2))
                                          .cwiseAbs()
                                          .maxCoeff());
      }
    }
  } catch (const std::exception& e) {
    Report(9, false, std::string("canonical Lyapunov failed: ") + e.what());
    return;
  }
  Report(9, worst <= kCovarianceSigmas && residual <= kCanonicalResidualTol,
         Fmt("max |tr X_k - E||x_k||^2| = %.2f standard errors (<= %.0f, %d trajectories); "
             "canonical residual - I = %.1e (<= %.0e)",
             worst, kCovarianceSigmas, kCovarianceTrajectories, residual, kCanonicalResidualTol));
}

void CostBound(const std::optional<SynthesisResult>& p1) {
  if (!p1 || p1->status != SynthesisStatus::kSuccess || !p1->beta) {
    Report(10, false, "requires the cost synthesis");
    return;
  }
  const PeriodicMjlsModel model = ActuatorFailureExample();
  const SynthesisSpecP1 spec = testing::ExampleSpecP1();
  const ClosedLoopSystem cl = CloseLoop(model, p1->gains);
  const auto weights = StageCostWeights(spec, p1->gains);
  const HullInitialStates hull{spec.hull_vertices};
  auto rng = Substream(kSeed, 1u << 20);
  ConstraintAudit audit;
  audit.Q = spec.Q;
  audit.R = spec.R;
  double worst = 0.0;
  try {
    for (int p = 0; p < kCostPoints; ++p) {
      const int i0 = static_cast<int>(rng() % 2);
      const Vector x0 = SampleInitialState(hull, i0, rng);
      const double bound = PerformanceBound(p1->certificate, cl, weights, *p1->beta, x0, i0);
      SimulationConfig c;
      c.horizon = kAuditHorizon;
      c.n_trajectories = kCostTrajectories;
      c.seed = kSeed + p;
      c.initial = FixedInitialState{x0};
      c.rho = Vector::Zero(2);
      c.rho(i0) = 1.0;
      const MonteCarloResult mc = MonteCarlo(cl, p1->gains, c, audit);
      worst = std::max(worst, *mc.cost_mean / bound);
    }
  } catch (const std::exception& e) {
    Report(10, false, std::string("cost bound failed: ") + e.what());
    return;
  }
  Report(10, worst <= 1.0,
         Fmt("max empirical cost / (beta x0'P_0(i0)x0) = %.4f over %d hull points x %d "
             "trajectories (<= 1)",
             worst, kCostPoints, kCostTrajectories));
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / ("pmjls_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::current_path(dir);

  OpenLoop();
  Monodromy();
  StableModesUnstableJump();
  const json r1 = Synthesize(4, "p1", kSpecP1);
  const json r2 = Synthesize(5, "p2", kSpecP2);
  Audit(!r1.empty(), !r2.empty());
  Equivalence();
  Properties();

  std::optional<SynthesisResult> p1;
  {
    sdp::ClarabelBackend backend;
    p1 = SynthesizeP1(ActuatorFailureExample(), testing::ExampleSpecP1(),
                      kDefaultSynthesisEpsilon, backend);
  }
  Covariance(p1);
  CostBound(p1);

  fs::current_path(dir.parent_path());
  fs::remove_all(dir);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
