#include "pmjls/simulate.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pmjls/operators.h"

namespace pmjls {

namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform on [0, 1) from the top 53 bits.
double Uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int SampleCategorical(const Eigen::Ref<const Vector>& p, std::mt19937_64& rng) {
  const double u = Uniform(rng);
  double cum = 0.0;
  int last = 0;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    if (p(j) <= 0.0) continue;
    last = static_cast<int>(j);
    cum += p(j);
    if (u < cum) return last;
  }
  return last;  // rounding in the cumulative sum
}

void AppendNumber(std::string& out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, end);
}

StepQuantiles Quantiles(std::vector<double>& v) {
  StepQuantiles q;
  if (v.empty()) return q;
  std::sort(v.begin(), v.end());
  auto at = [&](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  q.q05 = at(0.05);
  q.median = at(0.5);
  q.q95 = at(0.95);
  q.max = v.back();
  return q;
}

// Everything MonteCarlo keeps from one trajectory.
struct TrajectorySummary {
  std::vector<double> state_norms;
  std::vector<double> control_norms;
  long control_checks = 0, control_violations = 0;
  double max_control_ratio = 0.0;
  long state_checks = 0, state_violations = 0;
  double max_state_value = 0.0;
  long lyapunov_checks = 0, lyapunov_violations = 0;
  double max_lyapunov_ratio = 0.0;
  double cost = 0.0;
  std::string csv;
};

TrajectorySummary RunOne(const ClosedLoopSystem& cl, const ControllerGains& gains,
                         const SimulationConfig& config,
                         const ConstraintAudit& audit, std::uint64_t index,
                         bool want_csv) {
  std::mt19937_64 rng = Substream(config.seed, index);
  const std::vector<int> modes =
      SampleModeChain(cl.transition, config.rho, config.horizon, rng);
  const Vector x0 = SampleInitialState(config.initial, modes[0], rng);
  const TrajectoryRecord rec = SimulateTrajectory(
      cl, gains, x0, modes, audit.lyapunov ? &*audit.lyapunov : nullptr);

  TrajectorySummary s;
  const int h = config.horizon;
  const int period = cl.period();
  s.state_norms.reserve(h + 1);
  s.control_norms.reserve(h);
  for (int k = 0; k <= h; ++k) {
    const Vector& x = rec.states[k];
    const int i = modes[k];
    s.state_norms.push_back(x.norm());
    if (audit.W) {
      const double v = x.dot((*audit.W)[WrapTime(k, period)][i] * x);
      ++s.state_checks;
      s.max_state_value = std::max(s.max_state_value, v);
      if (v > 1.0 + kStateBoundTolerance) ++s.state_violations;
    }
    if (k < h) {
      const Vector& u = rec.controls[k];
      const double un = u.norm();
      s.control_norms.push_back(un);
      if (audit.u_max) {
        const double um = (*audit.u_max)[i];
        ++s.control_checks;
        s.max_control_ratio = std::max(s.max_control_ratio, un / um);
        if (un > um * (1.0 + kControlBoundTolerance)) ++s.control_violations;
      }
      if (audit.Q && audit.R) {
        s.cost += x.dot((*audit.Q)[i] * x) + u.dot((*audit.R)[i] * u);
      }
    }
    if (rec.lyapunov_values && k < h) {
      const double v0 = (*rec.lyapunov_values)[k];
      const double v1 = (*rec.lyapunov_values)[k + 1];
      ++s.lyapunov_checks;
      if (v0 > 0.0) s.max_lyapunov_ratio = std::max(s.max_lyapunov_ratio, v1 / v0);
      if (v1 > v0 * (1.0 + kLyapunovIncreaseTolerance) +
                   std::numeric_limits<double>::min()) {
        ++s.lyapunov_violations;
      }
    }
  }

  if (want_csv) {
    std::string& out = s.csv;
    out.reserve(static_cast<std::size_t>(h + 1) * 64);
    for (int k = 0; k <= h; ++k) {
      out += std::to_string(index);
      out += ',';
      out += std::to_string(k);
      out += ',';
      out += std::to_string(modes[k]);
      for (Eigen::Index c = 0; c < rec.states[k].size(); ++c) {
        out += ',';
        AppendNumber(out, rec.states[k](c));
      }
      out += ',';
      if (k < h) AppendNumber(out, s.control_norms[k]);
      out += ',';
      if (rec.lyapunov_values) AppendNumber(out, (*rec.lyapunov_values)[k]);
      out += '\n';
    }
  }
  return s;
}

}  // namespace

std::mt19937_64 Substream(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t base = SplitMix64(seed);
  return std::mt19937_64(SplitMix64(base ^ SplitMix64(index + 0x632BE59BD9B4E019ULL)));
}

std::vector<int> SampleModeChain(const Matrix& transition, const Vector& rho,
                                 int horizon, std::mt19937_64& rng) {
  std::vector<int> modes;
  modes.reserve(horizon + 1);
  modes.push_back(SampleCategorical(rho, rng));
  for (int k = 0; k < horizon; ++k) {
    modes.push_back(SampleCategorical(transition.row(modes.back()).transpose(), rng));
  }
  return modes;
}

TrajectoryRecord SimulateTrajectory(const ClosedLoopSystem& cl,
                                    const ControllerGains& gains,
                                    const Vector& x0,
                                    const std::vector<int>& modes,
                                    const std::vector<ModeIndexedSet>* lyapunov) {
  if (modes.empty()) throw std::invalid_argument("mode history is empty");
  if (x0.size() != cl.state_dim()) {
    throw std::invalid_argument("x0 has the wrong dimension");
  }
  const int h = static_cast<int>(modes.size()) - 1;
  TrajectoryRecord rec;
  rec.modes = modes;
  rec.states.reserve(h + 1);
  rec.controls.reserve(h);
  rec.states.push_back(x0);
  for (int k = 0; k < h; ++k) {
    const int i = modes[k];
    const Vector& x = rec.states.back();
    rec.controls.push_back(gains.Gain(k, i) * x);
    rec.states.push_back(cl.Phi(k, i) * x);
  }
  if (lyapunov) {
    const int period = static_cast<int>(lyapunov->size());
    std::vector<double> v;
    v.reserve(h + 1);
    for (int k = 0; k <= h; ++k) {
      const Vector& x = rec.states[k];
      v.push_back(x.dot((*lyapunov)[WrapTime(k, period)][modes[k]] * x));
    }
    rec.lyapunov_values = std::move(v);
  }
  return rec;
}

Vector SampleInitialState(const InitialSampler& sampler, int mode,
                          std::mt19937_64& rng) {
  if (const auto* f = std::get_if<FixedInitialState>(&sampler)) return f->x0;
  if (const auto* h = std::get_if<HullInitialStates>(&sampler)) {
    const std::size_t l = h->vertices.size();
    std::vector<double> w(l);
    double sum = 0.0;
    for (auto& e : w) {
      e = -std::log1p(-Uniform(rng));
      sum += e;
    }
    Vector x = Vector::Zero(h->vertices.front().size());
    for (std::size_t v = 0; v < l; ++v) x += (w[v] / sum) * h->vertices[v];
    return x;
  }
  const auto& e = std::get<EllipsoidInitialStates>(sampler);
  const Matrix& s = e.shape[mode];
  const int n = static_cast<int>(s.rows());
  std::normal_distribution<double> normal;
  Vector g(n);
  do {
    for (int c = 0; c < n; ++c) g(c) = normal(rng);
  } while (g.norm() == 0.0);
  const double r = std::pow(Uniform(rng), 1.0 / n);
  const Matrix l = s.llt().matrixL();
  return l * (r / g.norm() * g);
}

ModeIndexedSet InitialSecondMoment(const InitialSampler& sampler,
                                   const Vector& rho, int state_dim) {
  const int modes = static_cast<int>(rho.size());
  Matrix common = Matrix::Zero(state_dim, state_dim);
  if (const auto* f = std::get_if<FixedInitialState>(&sampler)) {
    common = f->x0 * f->x0.transpose();
  } else if (const auto* h = std::get_if<HullInitialStates>(&sampler)) {
    // Dirichlet(1): E[a_v a_w] = (1 + [v = w]) / (l (l + 1)).
    const double l = static_cast<double>(h->vertices.size());
    Vector sum = Vector::Zero(state_dim);
    for (const auto& x : h->vertices) {
      sum += x;
      common += x * x.transpose();
    }
    common = (common + sum * sum.transpose()) / (l * (l + 1.0));
  } else {
    const auto& e = std::get<EllipsoidInitialStates>(sampler);
    std::vector<Matrix> entries;
    for (int i = 0; i < modes; ++i) {
      entries.push_back(rho(i) * e.shape[i] / (state_dim + 2.0));
    }
    return ModeIndexedSet(std::move(entries));
  }
  std::vector<Matrix> entries;
  for (int i = 0; i < modes; ++i) entries.push_back(rho(i) * common);
  return ModeIndexedSet(std::move(entries));
}

ModeIndexedSet InitialCovariance(const Vector& x0, const Vector& rho) {
  return InitialSecondMoment(FixedInitialState{x0}, rho,
                             static_cast<int>(x0.size()));
}

void ValidateConfig(const SimulationConfig& config, int num_modes,
                    int state_dim) {
  if (config.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (config.n_trajectories < 1) {
    throw std::invalid_argument("n_trajectories must be >= 1");
  }
  if (config.rho.size() != num_modes || (config.rho.array() < 0.0).any() ||
      std::abs(config.rho.sum() - 1.0) > kStochasticTolerance) {
    throw std::invalid_argument("rho must be a probability vector over the modes");
  }
  if (const auto* f = std::get_if<FixedInitialState>(&config.initial)) {
    if (f->x0.size() != state_dim) throw std::invalid_argument("x0 has the wrong dimension");
  } else if (const auto* h = std::get_if<HullInitialStates>(&config.initial)) {
    if (h->vertices.empty()) throw std::invalid_argument("hull has no vertices");
    for (const auto& v : h->vertices) {
      if (v.size() != state_dim) {
        throw std::invalid_argument("hull vertex has the wrong dimension");
      }
    }
  } else {
    const auto& e = std::get<EllipsoidInitialStates>(config.initial);
    if (e.shape.num_modes() != num_modes || e.shape.dim() != state_dim) {
      throw std::invalid_argument("ellipsoid shapes do not match the system");
    }
    for (const auto& s : e.shape) {
      if (s.llt().info() != Eigen::Success) {
        throw std::invalid_argument("ellipsoid shape is not positive definite");
      }
    }
  }
}

std::string TrajectoryCsvHeader(int state_dim) {
  std::string h = "traj_id,k,mode";
  for (int c = 0; c < state_dim; ++c) h += ",x_" + std::to_string(c);
  h += ",u_norm,lyap_value\n";
  return h;
}

MonteCarloResult MonteCarlo(const ClosedLoopSystem& cl,
                            const ControllerGains& gains,
                            const SimulationConfig& config,
                            const ConstraintAudit& audit, std::ostream* csv) {
  ValidateConfig(config, cl.num_modes(), cl.state_dim());
  const int h = config.horizon;
  const int n = config.n_trajectories;
  int threads = config.threads > 0
                    ? config.threads
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);

  MonteCarloResult r;
  r.n_trajectories = n;
  r.horizon = h;
  std::vector<std::vector<double>> state_norms(h + 1), control_norms(h);
  std::vector<double> costs;
  costs.reserve(n);
  if (csv) *csv << TrajectoryCsvHeader(cl.state_dim());

  const int batch = std::max(256, 16 * threads);
  std::vector<TrajectorySummary> summaries;
  for (int start = 0; start < n; start += batch) {
    const int count = std::min(batch, n - start);
    summaries.assign(count, {});
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int t = next++; t < count; t = next++) {
        summaries[t] = RunOne(cl, gains, config, audit,
                              static_cast<std::uint64_t>(start + t), csv != nullptr);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < threads; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    // Merge in trajectory order so every statistic is schedule-independent.
    for (auto& s : summaries) {
      for (int k = 0; k <= h; ++k) state_norms[k].push_back(s.state_norms[k]);
      for (int k = 0; k < h; ++k) control_norms[k].push_back(s.control_norms[k]);
      r.control_checks += s.control_checks;
      r.control_violations += s.control_violations;
      r.max_control_ratio = std::max(r.max_control_ratio, s.max_control_ratio);
      r.state_checks += s.state_checks;
      r.state_violations += s.state_violations;
      r.max_state_value = std::max(r.max_state_value, s.max_state_value);
      r.lyapunov_checks += s.lyapunov_checks;
      r.lyapunov_violations += s.lyapunov_violations;
      r.max_lyapunov_ratio = std::max(r.max_lyapunov_ratio, s.max_lyapunov_ratio);
      costs.push_back(s.cost);
      if (csv) *csv << s.csv;
    }
  }

  r.mean_state_norm_sq.resize(h + 1);
  r.var_state_norm_sq.resize(h + 1);
  for (int k = 0; k <= h; ++k) {
    double sum = 0.0;
    for (double v : state_norms[k]) sum += v * v;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : state_norms[k]) ss += (v * v - mean) * (v * v - mean);
    r.mean_state_norm_sq[k] = mean;
    r.var_state_norm_sq[k] = n > 1 ? ss / (n - 1) : 0.0;
    r.state_norm.push_back(Quantiles(state_norms[k]));
  }
  for (int k = 0; k < h; ++k) r.control_norm.push_back(Quantiles(control_norms[k]));
  if (audit.Q && audit.R) {
    double sum = 0.0;
    for (double c : costs) sum += c;
    const double mean = sum / n;
    double ss = 0.0;
    for (double c : costs) ss += (c - mean) * (c - mean);
    r.cost_mean = mean;
    r.cost_std_error = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
  }
  return r;
}

CovarianceSeries PropagateCovariance(const ClosedLoopSystem& cl,
                                     const ModeIndexedSet& x0, int horizon) {
  if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
  if (x0.num_modes() != cl.num_modes() || x0.dim() != cl.state_dim()) {
    throw std::invalid_argument("initial covariance does not match the system");
  }
  CovarianceSeries s;
  s.per_mode.reserve(horizon + 1);
  s.per_mode.push_back(x0);
  for (int k = 0; k < horizon; ++k) s.per_mode.push_back(TStep(s.per_mode.back(), cl, k));
  for (const auto& xk : s.per_mode) {
    Matrix agg = Matrix::Zero(xk.dim(), xk.dim());
    for (const auto& m : xk) agg += m;
    s.sigma_envelope.push_back(3.0 * agg.diagonal().cwiseMax(0.0).cwiseSqrt());
    s.aggregate.push_back(std::move(agg));
  }
  return s;
}

void WriteCovarianceCsv(const CovarianceSeries& series, std::ostream& os) {
  const int n = series.aggregate.empty() ? 0 : static_cast<int>(series.aggregate[0].rows());
  std::string out = "k,trace_X";
  for (int c = 0; c < n; ++c) out += ",sigma3_" + std::to_string(c);
  out += '\n';
  for (std::size_t k = 0; k < series.aggregate.size(); ++k) {
    out += std::to_string(k);
    out += ',';
    AppendNumber(out, series.aggregate[k].trace());
    for (int c = 0; c < n; ++c) {
      out += ',';
      AppendNumber(out, series.sigma_envelope[k](c));
    }
    out += '\n';
  }
  os << out;
}

DecayEstimate DecayRatio(const std::vector<double>& m, int period) {
  const int h = static_cast<int>(m.size()) - 1;
  if (period < 1 || h < 4 * period) {
    throw std::invalid_argument("horizon must be at least 4 periods for a decay estimate");
  }
  const int span = ((h - h / 2) / period) * period;
  double log_sum = 0.0;
  DecayEstimate d;
  for (int k = h - period + 1; k <= h; ++k) {
    const double a = m[k - span];
    const double b = m[k];
    if (b == 0.0) {
      d.ratio = 0.0;
      d.decaying = true;
      return d;
    }
    if (a == 0.0) {
      d.ratio = std::numeric_limits<double>::infinity();
      return d;
    }
    log_sum += std::log(b / a) * period / span;
  }
  d.ratio = std::exp(log_sum / period);
  d.decaying = d.ratio < 1.0;
  return d;
}

DecayEstimate MssEmpiricalCheck(const ClosedLoopSystem& cl,
                                const SimulationConfig& config) {
  if (config.horizon < 4 * cl.period()) {
    throw std::invalid_argument("horizon " + std::to_string(config.horizon) +
                                " is shorter than 4 periods");
  }
  ControllerGains none;
  none.period = cl.period();
  none.num_modes = cl.num_modes();
  none.K.assign(cl.period(), std::vector<Matrix>(cl.num_modes(),
                                                 Matrix::Zero(1, cl.state_dim())));
  const MonteCarloResult r = MonteCarlo(cl, none, config, {});
  return DecayRatio(r.mean_state_norm_sq, cl.period());
}

}  // namespace pmjls
