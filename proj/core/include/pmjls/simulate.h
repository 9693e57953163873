#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <variant>
#include <vector>

#include "pmjls/model.h"

namespace pmjls {

/// Independent generator for trajectory `index` of a run seeded with `seed`.
/// Seeds are mixed with SplitMix64 so that substreams do not overlap in
/// practice and results do not depend on scheduling.
std::mt19937_64 Substream(std::uint64_t seed, std::uint64_t index);

/// omega_0 ~ rho, omega_{k+1} ~ row omega_k of the transition matrix.
/// Returns horizon + 1 modes.
std::vector<int> SampleModeChain(const Matrix& transition, const Vector& rho,
                                 int horizon, std::mt19937_64& rng);

struct TrajectoryRecord {
  std::vector<int> modes;       // omega_0 .. omega_H
  std::vector<Vector> states;   // x_0 .. x_H
  std::vector<Vector> controls; // u_0 .. u_{H-1}
  std::optional<std::vector<double>> lyapunov_values;  // V_0 .. V_H
};

/// Propagates x_{k+1} = phi_k(omega_k) x_k along the given mode history and
/// records u_k = K_k(omega_k) x_k. When `lyapunov` (a T-sequence P_k) is
/// given, V_k = x_k^T P_k(omega_k) x_k is recorded too.
TrajectoryRecord SimulateTrajectory(
    const ClosedLoopSystem& cl, const ControllerGains& gains, const Vector& x0,
    const std::vector<int>& modes,
    const std::vector<ModeIndexedSet>* lyapunov = nullptr);

/// Initial states.
struct FixedInitialState {
  Vector x0;
};
/// Uniform Dirichlet(1, ..., 1) combinations of the vertices.
struct HullInitialStates {
  std::vector<Vector> vertices;
};
/// Uniform in {x : x^T S(i)^{-1} x <= 1} for the sampled initial mode i.
struct EllipsoidInitialStates {
  ModeIndexedSet shape;
};
using InitialSampler =
    std::variant<FixedInitialState, HullInitialStates, EllipsoidInitialStates>;

/// Draws the initial state given the already sampled initial mode.
Vector SampleInitialState(const InitialSampler& sampler, int mode,
                          std::mt19937_64& rng);

/// E[x_0 x_0^T 1{omega_0 = i}] for the sampler and initial distribution.
ModeIndexedSet InitialSecondMoment(const InitialSampler& sampler,
                                   const Vector& rho, int state_dim);

/// rho_i x0 x0^T.
ModeIndexedSet InitialCovariance(const Vector& x0, const Vector& rho);

struct SimulationConfig {
  int horizon = 100;
  int n_trajectories = 1000;
  std::uint64_t seed = 42;
  InitialSampler initial = FixedInitialState{};
  Vector rho;
  /// 0 selects std::thread::hardware_concurrency().
  int threads = 0;
};

void ValidateConfig(const SimulationConfig& config, int num_modes,
                    int state_dim);

/// Constraints audited along every trajectory. Absent members are skipped.
struct ConstraintAudit {
  std::optional<std::vector<double>> u_max;         // per mode
  std::optional<PeriodicTable<Matrix>> W;           // [T][N]
  std::optional<std::vector<ModeIndexedSet>> lyapunov;  // P_k, T-sequence
  std::optional<ModeIndexedSet> Q;                  // cost weights
  std::optional<ModeIndexedSet> R;
};

inline constexpr double kControlBoundTolerance = 1e-6;
inline constexpr double kStateBoundTolerance = 1e-6;
inline constexpr double kLyapunovIncreaseTolerance = 1e-9;

struct StepQuantiles {
  double q05 = 0.0;
  double median = 0.0;
  double q95 = 0.0;
  double max = 0.0;
};

struct MonteCarloResult {
  int n_trajectories = 0;
  int horizon = 0;
  std::vector<double> mean_state_norm_sq;  // E ||x_k||^2, k = 0..H
  std::vector<double> var_state_norm_sq;   // sample variance of ||x_k||^2
  std::vector<StepQuantiles> state_norm;   // ||x_k||, k = 0..H
  std::vector<StepQuantiles> control_norm; // ||u_k||, k = 0..H-1
  long control_checks = 0;
  long control_violations = 0;
  double max_control_ratio = 0.0;          // max ||u|| / u_max(i)
  long state_checks = 0;
  long state_violations = 0;
  double max_state_value = 0.0;            // max x^T W x
  long lyapunov_checks = 0;
  long lyapunov_violations = 0;
  double max_lyapunov_ratio = 0.0;         // max V_{k+1} / V_k
  std::optional<double> cost_mean;         // sum_k x^T Q x + u^T R u
  std::optional<double> cost_std_error;
};

/// Runs n_trajectories independent trajectories in parallel. Trajectory t
/// draws from Substream(seed, t), so results are identical for any thread
/// count. If `csv` is non-null every (trajectory, step) row is written in
/// trajectory order.
MonteCarloResult MonteCarlo(const ClosedLoopSystem& cl,
                            const ControllerGains& gains,
                            const SimulationConfig& config,
                            const ConstraintAudit& audit,
                            std::ostream* csv = nullptr);

/// Header line of the trajectory CSV, newline included.
std::string TrajectoryCsvHeader(int state_dim);

struct CovarianceSeries {
  std::vector<ModeIndexedSet> per_mode;  // X_k(i), k = 0..H
  std::vector<Matrix> aggregate;         // X_k = sum_i X_k(i)
  std::vector<Vector> sigma_envelope;    // 3 sqrt(diag X_k)
};

/// X_{k+1} = T_k(X_k) for k = 0..horizon-1.
CovarianceSeries PropagateCovariance(const ClosedLoopSystem& cl,
                                     const ModeIndexedSet& x0, int horizon);

/// Writes `k,trace_X,sigma3_0..`.
void WriteCovarianceCsv(const CovarianceSeries& series, std::ostream& os);

struct DecayEstimate {
  double ratio = 0.0;  // per-period factor of E ||x_k||^2
  bool decaying = false;
};

/// Estimates the per-period decay of the empirical E ||x_k||^2 over the
/// last half of the horizon by comparing equal phases one or more whole
/// periods apart. Throws std::invalid_argument if horizon < 4 T.
DecayEstimate MssEmpiricalCheck(const ClosedLoopSystem& cl,
                                const SimulationConfig& config);

/// Same estimate from an existing per-step E ||x_k||^2 series.
DecayEstimate DecayRatio(const std::vector<double>& mean_norm_sq, int period);

}  // namespace pmjls
