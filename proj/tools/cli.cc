#include "cli.h"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pmjls/clarabel_backend.h"
#include "pmjls/io.h"
#include "pmjls/operators.h"
#include "pmjls/simulate.h"
#include "pmjls/stability.h"
#include "pmjls/synthesis.h"

#ifndef PMJLS_VERSION
#define PMJLS_VERSION "unknown"
#endif

namespace pmjls::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json MatrixJson(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json VectorJson(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

// Non-finite doubles are not valid JSON numbers.
json Real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string ManifestPathFor(const std::string& output) {
  fs::path p(output);
  return (p.parent_path() / (p.stem().string() + ".manifest.json")).string();
}

struct Manifest {
  json j;

  Manifest(const std::string& command, int argc, const char* const* argv) {
    j["command"] = command;
    j["tool"] = "mjls";
    j["tool_version"] = PMJLS_VERSION;
    json args = json::array();
    for (int a = 0; a < argc; ++a) args.push_back(argv[a]);
    j["argv"] = std::move(args);
    j["inputs"] = json::object();
    j["parameters"] = json::object();
    j["outputs"] = json::array();
  }

  void Input(const std::string& key, const std::string& path) {
    if (!path.empty()) j["inputs"][key] = path;
  }
  void Output(const std::string& path) { j["outputs"].push_back(path); }

  void Write(const std::string& path, int exit_code) {
    j["exit_code"] = exit_code;
    io::WriteTextFile(path, j.dump(2) + "\n");
  }
};

ClosedLoopSystem LoadClosedLoop(const PeriodicMjlsModel& model,
                                const std::string& gains_path) {
  return CloseLoop(model, gains_path.empty() ? ControllerGains::Zero(model)
                                             : io::LoadGains(gains_path, model));
}

json StabilityJson(const StabilityReport& r) {
  json j;
  j["mss"] = r.mss;
  j["spectral_radius_GT"] = Real(r.spectral_radius);
  j["method"] = r.method;
  json modes = json::array();
  for (std::size_t i = 0; i < r.per_mode_radii.size(); ++i) {
    modes.push_back({{"mode", i},
                     {"monodromy_spectral_radius", Real(r.per_mode_radii[i])},
                     {"monodromy_norm", Real(r.per_mode_norms[i])}});
  }
  j["per_mode"] = std::move(modes);
  return j;
}

json CertificateCheckJson(const LyapunovCertificate& cert,
                          const CertificateCheck& c) {
  json j;
  j["valid"] = c.valid;
  j["min_residual"] = Real(c.min_residual);
  j["worst"] = {{"k", c.worst_k}, {"i", c.worst_i}};
  j["min_eigenvalue_P"] = Real(c.min_positivity);
  j["max_asymmetry"] = Real(c.max_asymmetry);
  if (cert.nu) j["nu_product"] = c.nu_product;
  j["epsilon"] = cert.epsilon;
  json res = json::array();
  for (std::size_t k = 0; k < cert.residuals.size(); ++k) {
    for (std::size_t i = 0; i < cert.residuals[k].size(); ++i) {
      res.push_back({{"k", k}, {"i", i}, {"min_eigenvalue", Real(cert.residuals[k][i])}});
    }
  }
  j["residuals"] = std::move(res);
  j["message"] = c.message;
  return j;
}

// --- analyze -----------------------------------------------------------------

struct AnalyzeArgs {
  std::string model;
  std::string gains;
};

int Analyze(const AnalyzeArgs& a, Manifest& m, std::ostream& out) {
  m.Input("model", a.model);
  m.Input("gains", a.gains);
  const auto start = std::chrono::steady_clock::now();
  const PeriodicMjlsModel model = io::LoadModel(a.model);
  const ClosedLoopSystem cl = LoadClosedLoop(model, a.gains);
  const StabilityReport r = CheckMssPeriodic(cl);
  json j = StabilityJson(r);
  j["closed_loop"] = !a.gains.empty();
  j["spectral_radius_FT"] = Real(SpectralRadius(FPeriodOperator(cl)));
  j["period"] = model.period;
  j["num_modes"] = model.num_modes;
  j["wall_seconds"] = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start).count();
  out << j.dump(2) << "\n";
  return kExitOk;
}

// --- synthesize ----------------------------------------------------------------

struct SynthesizeArgs {
  std::string problem;
  std::string model;
  std::string spec;
  double eps = kDefaultSynthesisEpsilon;
  std::string out_gains;
  std::string out_report;
  std::string out_certificate;
  std::string dump_sdp;
};

json SynthesisJson(const SynthesisResult& r, const std::string& problem,
                   double eps) {
  json j;
  j["problem"] = problem;
  j["status"] = ToString(r.status);
  j["epsilon"] = eps;
  j["num_lmis"] = r.num_lmis;
  j["solver"] = {{"name", "clarabel"},
                 {"iterations", r.solver_iterations},
                 {"solve_seconds", r.solve_seconds},
                 {"max_constraint_violation", Real(r.max_constraint_violation)}};
  j["diagnostics"] = r.diagnostics;
  if (r.status != SynthesisStatus::kInfeasible && !r.S.empty()) {
    j["objective"] = Real(r.objective);
    if (r.beta) j["beta"] = Real(*r.beta);
    j["closed_loop_radius"] = Real(r.closed_loop_radius);
    j["ellipsoid_traces"] = r.ellipsoid_traces;
    j["rho_average_trace"] = Real(r.rho_average_trace);
    const SynthesisChecks& c = r.checks;
    j["checks"] = {{"passed", c.passed},
                   {"gain_residual", Real(c.gain_residual)},
                   {"schur_min", Real(c.schur_min)},
                   {"decrease_min", Real(c.decrease_min)},
                   {"invariance_min", Real(c.invariance_min)},
                   {"control_min", Real(c.control_min)},
                   {"state_min", Real(c.state_min)},
                   {"hull_min", Real(c.hull_min)},
                   {"message", c.message}};
    if (r.certificate_check) {
      j["certificate"] = CertificateCheckJson(r.certificate, *r.certificate_check);
    }
    json ellipsoids = json::array();
    for (int i = 0; i < r.S[0].num_modes(); ++i) {
      ellipsoids.push_back({{"mode", i}, {"S0", MatrixJson(r.S[0][i])}});
    }
    j["region_of_attraction"] = std::move(ellipsoids);
  }
  return j;
}

int Synthesize(const SynthesizeArgs& a, Manifest& m, std::ostream& out,
               std::ostream& err) {
  m.Input("model", a.model);
  m.Input("spec", a.spec);
  m.j["parameters"]["problem"] = a.problem;
  m.j["parameters"]["epsilon"] = a.eps;
  if (!(a.eps > 0.0)) throw std::invalid_argument("--eps must be > 0");

  const PeriodicMjlsModel model = io::LoadModel(a.model);
  const auto start = std::chrono::steady_clock::now();
  sdp::ClarabelBackend backend;
  SynthesisResult r;
  if (a.problem == "p1") {
    const SynthesisSpecP1 spec = io::LoadSpecP1(a.spec, model);
    if (!a.dump_sdp.empty()) {
      std::ostringstream os;
      BuildP1Sdp(model, spec, a.eps).problem.WriteSparseDump(os);
      io::WriteTextFile(a.dump_sdp, os.str());
      m.Output(a.dump_sdp);
    }
    r = SynthesizeP1(model, spec, a.eps, backend);
  } else {
    const SynthesisSpecP2 spec = io::LoadSpecP2(a.spec, model);
    if (!a.dump_sdp.empty()) {
      std::ostringstream os;
      BuildP2Sdp(model, spec, a.eps).problem.WriteSparseDump(os);
      io::WriteTextFile(a.dump_sdp, os.str());
      m.Output(a.dump_sdp);
    }
    r = SynthesizeP2(model, spec, a.eps, backend);
  }
  const double wall = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start).count();

  json report = SynthesisJson(r, a.problem, a.eps);
  report["wall_seconds"] = wall;
  if (r.status == SynthesisStatus::kSuccess) {
    io::WriteTextFile(a.out_gains, io::SerializeGains(r.gains));
    m.Output(a.out_gains);
    io::WriteTextFile(a.out_certificate, io::SerializeCertificate(r.certificate));
    m.Output(a.out_certificate);
    report["gains_file"] = a.out_gains;
    report["certificate_file"] = a.out_certificate;
  }
  io::WriteTextFile(a.out_report, report.dump(2) + "\n");
  m.Output(a.out_report);
  out << report.dump(2) << "\n";

  switch (r.status) {
    case SynthesisStatus::kSuccess:
      return kExitOk;
    case SynthesisStatus::kInfeasible:
      err << "synthesis infeasible: " << r.diagnostics << "\n";
      return kExitUncertified;
    case SynthesisStatus::kNumericalFailure:
      err << "numerical failure: " << r.diagnostics << "\n";
      return kExitNumericalFailure;
  }
  return kExitNumericalFailure;
}

// --- simulate ------------------------------------------------------------------

struct SimulateArgs {
  std::string model;
  std::string gains;
  std::string spec;
  std::string certificate;
  std::string out = ".";
  int trajectories = 1000;
  int horizon = 100;
  std::uint64_t seed = 42;
  int threads = 0;
  std::vector<double> x0;
  std::vector<double> rho;
};

// Which synthesis problem a spec file describes, judged by its keys.
std::string SpecKind(const std::string& path) {
  json j;
  try {
    j = json::parse(io::ReadTextFile(path));
  } catch (const json::parse_error& e) {
    throw io::InputError(path + ": invalid JSON: " + e.what());
  }
  if (j.is_object() && j.contains("hull_vertices")) return "p1";
  if (j.is_object() && j.contains("nu")) return "p2";
  throw io::InputError(path + ": not a p1 (hull_vertices) or p2 (nu) spec");
}

int Simulate(const SimulateArgs& a, Manifest& m, std::ostream& out) {
  m.Input("model", a.model);
  m.Input("gains", a.gains);
  m.Input("spec", a.spec);
  m.Input("certificate", a.certificate);
  auto& params = m.j["parameters"];
  params["trajectories"] = a.trajectories;
  params["horizon"] = a.horizon;
  params["seed"] = a.seed;

  const PeriodicMjlsModel model = io::LoadModel(a.model);
  const ControllerGains gains = io::LoadGains(a.gains, model);
  const ClosedLoopSystem cl = CloseLoop(model, gains);

  SimulationConfig config;
  config.horizon = a.horizon;
  config.n_trajectories = a.trajectories;
  config.seed = a.seed;
  config.threads = a.threads;
  config.rho = Vector::Constant(model.num_modes, 1.0 / model.num_modes);

  ConstraintAudit audit;
  std::optional<LyapunovCertificate> cert;
  if (!a.certificate.empty()) {
    cert = io::LoadCertificate(a.certificate, model);
    audit.lyapunov = cert->P;
  }
  std::optional<InitialSampler> sampler;
  std::string sampler_name;
  if (!a.spec.empty()) {
    if (SpecKind(a.spec) == "p1") {
      const SynthesisSpecP1 s = io::LoadSpecP1(a.spec, model);
      audit.u_max = s.u_max;
      audit.W = s.W;
      audit.Q = s.Q;
      audit.R = s.R;
      sampler = HullInitialStates{s.hull_vertices};
      sampler_name = "hull";
    } else {
      const SynthesisSpecP2 s = io::LoadSpecP2(a.spec, model);
      audit.u_max = s.u_max;
      audit.W = s.W;
      config.rho = s.rho;
      if (cert) {
        std::vector<Matrix> shapes;
        for (const auto& p : cert->P[0]) {
          shapes.push_back(Symmetrize(p.llt().solve(Matrix::Identity(p.rows(), p.cols()))));
        }
        sampler = EllipsoidInitialStates{ModeIndexedSet(std::move(shapes))};
        sampler_name = "ellipsoid";
      }
    }
  }
  if (!a.x0.empty()) {
    if (static_cast<int>(a.x0.size()) != model.n_x) {
      throw std::invalid_argument("--x0 must have n_x = " + std::to_string(model.n_x) +
                                  " entries");
    }
    sampler = FixedInitialState{Eigen::Map<const Vector>(a.x0.data(), model.n_x)};
    sampler_name = "fixed";
  }
  if (!sampler) {
    throw std::invalid_argument(
        "no initial states: pass --x0, a p1 spec, or a p2 spec with --certificate");
  }
  config.initial = *sampler;
  if (!a.rho.empty()) {
    if (static_cast<int>(a.rho.size()) != model.num_modes) {
      throw std::invalid_argument("--rho must have one entry per mode");
    }
    config.rho = Eigen::Map<const Vector>(a.rho.data(), model.num_modes);
  }
  ValidateConfig(config, model.num_modes, model.n_x);
  params["initial_states"] = sampler_name;
  params["rho"] = VectorJson(config.rho);

  fs::create_directories(a.out);
  const std::string traj_path = (fs::path(a.out) / "trajectories.csv").string();
  const std::string cov_path = (fs::path(a.out) / "covariance.csv").string();
  const std::string summary_path = (fs::path(a.out) / "summary.json").string();

  MonteCarloResult mc;
  {
    std::ofstream csv(traj_path, std::ios::binary);
    if (!csv) throw io::InputError(traj_path + ": cannot open file for writing");
    mc = MonteCarlo(cl, gains, config, audit, &csv);
  }
  m.Output(traj_path);
  const CovarianceSeries cov = PropagateCovariance(
      cl, InitialSecondMoment(config.initial, config.rho, model.n_x), a.horizon);
  {
    std::ofstream csv(cov_path, std::ios::binary);
    if (!csv) throw io::InputError(cov_path + ": cannot open file for writing");
    WriteCovarianceCsv(cov, csv);
  }
  m.Output(cov_path);

  json s;
  s["trajectories"] = mc.n_trajectories;
  s["horizon"] = mc.horizon;
  s["seed"] = a.seed;
  s["initial_states"] = sampler_name;
  s["control_bound"] = {{"checked", mc.control_checks},
                        {"violations", mc.control_violations},
                        {"max_ratio", mc.max_control_ratio}};
  s["state_bound"] = {{"checked", mc.state_checks},
                      {"violations", mc.state_violations},
                      {"max_value", mc.max_state_value}};
  s["lyapunov_monotonicity"] = {{"checked", mc.lyapunov_checks},
                                {"violations", mc.lyapunov_violations},
                                {"max_ratio", mc.max_lyapunov_ratio}};
  if (mc.cost_mean) {
    s["cost"] = {{"mean", *mc.cost_mean}, {"std_error", *mc.cost_std_error}};
  }
  std::vector<double> analytic;
  for (const auto& x : cov.aggregate) analytic.push_back(x.trace());
  if (a.horizon >= 4 * model.period) {
    const DecayEstimate emp = DecayRatio(mc.mean_state_norm_sq, model.period);
    const DecayEstimate ana = DecayRatio(analytic, model.period);
    s["decay_ratio_empirical"] = Real(emp.ratio);
    s["decay_ratio_analytic"] = Real(ana.ratio);
  } else {
    s["decay_ratio_empirical"] = nullptr;
    s["decay_ratio_analytic"] = nullptr;
  }
  s["mean_state_norm_sq_final"] = mc.mean_state_norm_sq.back();
  s["analytic_trace_X_final"] = analytic.back();
  s["outputs"] = {traj_path, cov_path, summary_path};
  io::WriteTextFile(summary_path, s.dump(2) + "\n");
  m.Output(summary_path);
  out << s.dump(2) << "\n";
  return kExitOk;
}

// --- verify --------------------------------------------------------------------

struct VerifyArgs {
  std::string model;
  std::string gains;
  std::string certificate;
  std::string out_certificate;
  double eps = 1e-6;
  std::vector<double> nu;
};

int Verify(const VerifyArgs& a, Manifest& m, std::ostream& out,
           std::ostream& err) {
  m.Input("model", a.model);
  m.Input("gains", a.gains);
  m.Input("certificate", a.certificate);
  m.j["parameters"]["epsilon"] = a.eps;
  if (!a.nu.empty()) m.j["parameters"]["nu"] = a.nu;

  const PeriodicMjlsModel model = io::LoadModel(a.model);
  const ClosedLoopSystem cl = LoadClosedLoop(model, a.gains);
  json j;
  j["closed_loop"] = !a.gains.empty();

  if (!a.certificate.empty()) {
    LyapunovCertificate cert = io::LoadCertificate(a.certificate, model);
    const CertificateCheck c = VerifyCertificate(cert, cl);
    j["mode"] = "check-certificate";
    j["certified"] = c.valid;
    j["certificate"] = CertificateCheckJson(cert, c);
    out << j.dump(2) << "\n";
    if (!c.valid) err << "certificate rejected: " << c.message << "\n";
    return c.valid ? kExitOk : kExitUncertified;
  }

  if (!(a.eps > 0.0)) throw std::invalid_argument("--eps must be > 0");
  sdp::ClarabelBackend backend;
  const FeasibilityResult f =
      a.nu.empty() ? LyapunovFeasibility(cl, a.eps, backend)
                   : RelaxedLyapunovFeasibility(cl, a.nu, a.eps, backend);
  j["mode"] = a.nu.empty() ? "lyapunov-feasibility" : "relaxed-lyapunov-feasibility";
  j["status"] = ToString(f.status);
  j["certified"] = f.status == FeasibilityStatus::kFeasible;
  j["diagnostics"] = f.diagnostics;
  if (f.certificate && f.check) {
    j["certificate"] = CertificateCheckJson(*f.certificate, *f.check);
  }
  if (f.status == FeasibilityStatus::kFeasible && !a.out_certificate.empty()) {
    io::WriteTextFile(a.out_certificate, io::SerializeCertificate(*f.certificate));
    m.Output(a.out_certificate);
  }
  out << j.dump(2) << "\n";
  switch (f.status) {
    case FeasibilityStatus::kFeasible:
      return kExitOk;
    case FeasibilityStatus::kInfeasible:
      err << "no Lyapunov certificate exists: " << f.diagnostics << "\n";
      return kExitUncertified;
    case FeasibilityStatus::kSolverFailure:
      err << "solver failure: " << f.diagnostics << "\n";
      return kExitNumericalFailure;
  }
  return kExitNumericalFailure;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mean-square stability analysis and LMI controller synthesis for "
               "periodic Markov jump linear systems",
               "mjls"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", PMJLS_VERSION);
  std::string manifest;
  app.add_option("--manifest", manifest,
                 "Run manifest path (default: next to the primary output)");

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Mean-square stability report (JSON on stdout)");
  analyze->add_option("model,--model", an.model, "Model JSON file")->required();
  analyze->add_option("--gains", an.gains, "Gains JSON file; analyze the closed loop");

  SynthesizeArgs sy;
  auto* synth = app.add_subcommand("synthesize", "Solve the p1 (cost) or p2 (region) synthesis SDP");
  synth->add_option("problem", sy.problem, "p1 or p2")
      ->required()
      ->check(CLI::IsMember({"p1", "p2"}));
  synth->add_option("--model", sy.model, "Model JSON file")->required();
  synth->add_option("--spec", sy.spec, "Synthesis spec JSON file")->required();
  synth->add_option("--eps", sy.eps, "Margin on strict LMIs");
  synth->add_option("--out-gains", sy.out_gains, "Gains output (default: <problem>_gains.json)");
  synth->add_option("--out-report", sy.out_report, "Report output (default: <problem>_report.json)");
  synth->add_option("--out-certificate", sy.out_certificate,
                    "Certificate output (default: <problem>_certificate.json)");
  synth->add_option("--dump-sdp", sy.dump_sdp, "Write the assembled LMIs as a sparse text dump");

  SimulateArgs si;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo trajectories and analytic covariance");
  sim->add_option("--model", si.model, "Model JSON file")->required();
  sim->add_option("--gains", si.gains, "Gains JSON file")->required();
  sim->add_option("--spec", si.spec, "p1/p2 spec: constraints to audit and initial states");
  sim->add_option("--certificate", si.certificate,
                  "Certificate JSON: enables the Lyapunov monotonicity audit");
  sim->add_option("--trajectories", si.trajectories, "Number of trajectories")
      ->check(CLI::PositiveNumber);
  sim->add_option("--horizon", si.horizon, "Steps per trajectory")->check(CLI::PositiveNumber);
  sim->add_option("--seed", si.seed, "Random seed")->envname("MJLS_SEED");
  sim->add_option("--threads", si.threads, "Worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  sim->add_option("--x0", si.x0, "Fixed initial state, comma separated")->delimiter(',');
  sim->add_option("--rho", si.rho, "Initial mode distribution, comma separated")
      ->delimiter(',');
  sim->add_option("--out", si.out, "Output directory");

  VerifyArgs ve;
  auto* verify = app.add_subcommand("verify", "Find or check a Lyapunov certificate");
  verify->add_option("--model", ve.model, "Model JSON file")->required();
  verify->add_option("--gains", ve.gains, "Gains JSON file (omit for the open loop)");
  verify->add_option("--certificate", ve.certificate, "Certificate JSON to check");
  verify->add_option("--eps", ve.eps, "Margin on strict LMIs");
  verify->add_option("--nu", ve.nu, "Relaxation sequence nu_0..nu_{T-1}")->delimiter(',');
  verify->add_option("--out-certificate", ve.out_certificate,
                     "Write the certificate found by the SDP");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  std::string command;
  std::string default_manifest;
  if (analyze->parsed()) {
    command = "analyze";
    default_manifest = "mjls-analyze.manifest.json";
  } else if (synth->parsed()) {
    command = "synthesize";
    if (sy.out_gains.empty()) sy.out_gains = sy.problem + "_gains.json";
    if (sy.out_report.empty()) sy.out_report = sy.problem + "_report.json";
    if (sy.out_certificate.empty()) sy.out_certificate = sy.problem + "_certificate.json";
    default_manifest = ManifestPathFor(sy.out_report);
  } else if (sim->parsed()) {
    command = "simulate";
    default_manifest = (fs::path(si.out) / "manifest.json").string();
  } else {
    command = "verify";
    default_manifest = ve.out_certificate.empty() ? "mjls-verify.manifest.json"
                                                  : ManifestPathFor(ve.out_certificate);
  }
  if (manifest.empty()) manifest = default_manifest;

  Manifest m(command, argc, argv);
  int code = kExitOk;
  try {
    if (command == "analyze") {
      code = Analyze(an, m, out);
    } else if (command == "synthesize") {
      code = Synthesize(sy, m, out, err);
    } else if (command == "simulate") {
      code = Simulate(si, m, out);
    } else {
      code = Verify(ve, m, out, err);
    }
  } catch (const io::InputError& e) {
    err << "input error: " << e.what() << "\n";
    code = kExitInputError;
  } catch (const ModelError& e) {
    err << "input error: " << e.what() << "\n";
    code = kExitInputError;
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << "\n";
    code = kExitInputError;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    code = kExitNumericalFailure;
  }
  try {
    m.Write(manifest, code);
  } catch (const std::exception& e) {
    err << "could not write manifest: " << e.what() << "\n";
    if (code == kExitOk) code = kExitInputError;
  }
  return code;
}

}  // namespace pmjls::cli
