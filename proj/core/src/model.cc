#include "pmjls/model.h"

#include <cmath>
#include <numbers>
#include <sstream>

namespace pmjls {

namespace {

std::string Shape(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace

int WrapTime(long k, int period) {
  if (period < 1) throw ModelError("period must be >= 1");
  long r = k % period;
  if (r < 0) r += period;
  return static_cast<int>(r);
}

ModeIndexedSet::ModeIndexedSet(int num_modes, int dim)
    : entries_(num_modes, Matrix::Zero(dim, dim)), dim_(dim) {}

ModeIndexedSet::ModeIndexedSet(std::vector<Matrix> entries)
    : entries_(std::move(entries)) {
  dim_ = entries_.empty() ? 0 : static_cast<int>(entries_[0].rows());
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].rows() != dim_ || entries_[i].cols() != dim_) {
      throw ModelError("ModeIndexedSet: entry " + std::to_string(i) + " is " +
                       Shape(entries_[i]) + ", expected " +
                       std::to_string(dim_) + "x" + std::to_string(dim_));
    }
  }
}

ModeIndexedSet ModeIndexedSet::Identity(int num_modes, int dim) {
  return Constant(num_modes, Matrix::Identity(dim, dim));
}

ModeIndexedSet ModeIndexedSet::Constant(int num_modes, const Matrix& value) {
  return ModeIndexedSet(std::vector<Matrix>(num_modes, value));
}

const Matrix& ModeIndexedSet::at(int i) const {
  if (i < 0 || i >= num_modes()) {
    throw ModelError("mode index " + std::to_string(i) + " out of range [0, " +
                     std::to_string(num_modes()) + ")");
  }
  return entries_[i];
}

void ModeIndexedSet::Set(int i, Matrix value) {
  at(i);
  if (value.rows() != dim_ || value.cols() != dim_) {
    throw ModelError("ModeIndexedSet::Set: shape " + Shape(value) +
                     " does not match dimension " + std::to_string(dim_));
  }
  entries_[i] = std::move(value);
}

bool ModeIndexedSet::IsSymmetric(double tol) const {
  for (const auto& e : entries_) {
    if (AsymmetryMax(e) > tol) return false;
  }
  return true;
}

void ModeIndexedSet::RequireSymmetric(double tol) const {
  for (int i = 0; i < num_modes(); ++i) {
    const double a = AsymmetryMax(entries_[i]);
    if (a > tol) {
      std::ostringstream os;
      os << "entry " << i << " is not symmetric (max asymmetry " << a << ")";
      throw ModelError(os.str());
    }
  }
}

ControllerGains ControllerGains::Zero(const PeriodicMjlsModel& model) {
  ControllerGains g;
  g.period = model.period;
  g.num_modes = model.num_modes;
  g.K.assign(model.period, std::vector<Matrix>(model.num_modes,
                                               Matrix::Zero(model.n_u, model.n_x)));
  return g;
}

ClosedLoopSystem ClosedLoopSystem::TimeInvariant(const ModeIndexedSet& modes,
                                                 const Matrix& transition) {
  ValidateTransitionMatrix(transition);
  if (transition.rows() != modes.num_modes()) {
    throw ModelError("transition matrix size does not match mode count");
  }
  ClosedLoopSystem cl;
  cl.phi.assign(1, std::vector<Matrix>(modes.begin(), modes.end()));
  cl.transition = transition;
  return cl;
}

void ValidateTransitionMatrix(const Matrix& p) {
  if (p.rows() != p.cols() || p.rows() == 0) {
    throw ModelError("transition matrix must be square and non-empty, got " +
                     Shape(p));
  }
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      if (!(p(i, j) >= 0.0 && p(i, j) <= 1.0)) {
        std::ostringstream os;
        os << "transition probability p(" << i << "," << j << ") = " << p(i, j)
           << " is outside [0, 1]";
        throw ModelError(os.str());
      }
    }
    const double sum = p.row(i).sum();
    if (std::abs(sum - 1.0) > kStochasticTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "transition matrix row " << i << " sums to " << sum
         << " (must be 1 within " << kStochasticTolerance << ")";
      throw ModelError(os.str());
    }
  }
}

PeriodicMjlsModel ValidateModel(PeriodicMjlsModel model) {
  if (model.n_x < 1 || model.n_u < 0 || model.num_modes < 1 ||
      model.period < 1) {
    throw ModelError("model sizes must satisfy n_x >= 1, n_u >= 0, N >= 1, T >= 1");
  }
  if (static_cast<int>(model.A.size()) != model.period ||
      static_cast<int>(model.B.size()) != model.period) {
    throw ModelError("A and B must have exactly T = " +
                     std::to_string(model.period) + " time entries");
  }
  for (int k = 0; k < model.period; ++k) {
    if (static_cast<int>(model.A[k].size()) != model.num_modes ||
        static_cast<int>(model.B[k].size()) != model.num_modes) {
      throw ModelError("A and B at k = " + std::to_string(k) +
                       " must have exactly N = " +
                       std::to_string(model.num_modes) + " mode entries");
    }
    for (int i = 0; i < model.num_modes; ++i) {
      const Matrix& a = model.A[k][i];
      const Matrix& b = model.B[k][i];
      if (a.rows() != model.n_x || a.cols() != model.n_x) {
        throw ModelError("A at (k=" + std::to_string(k) + ", i=" +
                         std::to_string(i) + ") is " + Shape(a) +
                         ", expected " + std::to_string(model.n_x) + "x" +
                         std::to_string(model.n_x));
      }
      if (b.rows() != model.n_x || b.cols() != model.n_u) {
        throw ModelError("B at (k=" + std::to_string(k) + ", i=" +
                         std::to_string(i) + ") is " + Shape(b) +
                         ", expected " + std::to_string(model.n_x) + "x" +
                         std::to_string(model.n_u));
      }
      if (!a.allFinite() || !b.allFinite()) {
        throw ModelError("non-finite entry in A or B at (k=" +
                         std::to_string(k) + ", i=" + std::to_string(i) + ")");
      }
    }
  }
  if (model.transition.rows() != model.num_modes) {
    throw ModelError("transition matrix is " + Shape(model.transition) +
                     ", expected " + std::to_string(model.num_modes) + "x" +
                     std::to_string(model.num_modes));
  }
  ValidateTransitionMatrix(model.transition);
  return model;
}

void ValidateGains(const PeriodicMjlsModel& model, const ControllerGains& gains) {
  if (gains.period != model.period || gains.num_modes != model.num_modes ||
      static_cast<int>(gains.K.size()) != model.period) {
    throw ModelError("gains period/mode count do not match the model");
  }
  for (int k = 0; k < model.period; ++k) {
    if (static_cast<int>(gains.K[k].size()) != model.num_modes) {
      throw ModelError("gains at k = " + std::to_string(k) +
                       " have the wrong number of modes");
    }
    for (int i = 0; i < model.num_modes; ++i) {
      const Matrix& kk = gains.K[k][i];
      if (kk.rows() != model.n_u || kk.cols() != model.n_x) {
        throw ModelError("K at (k=" + std::to_string(k) + ", i=" +
                         std::to_string(i) + ") is " + Shape(kk) +
                         ", expected " + std::to_string(model.n_u) + "x" +
                         std::to_string(model.n_x));
      }
    }
  }
}

ClosedLoopSystem CloseLoop(const PeriodicMjlsModel& model,
                           const ControllerGains& gains) {
  ValidateGains(model, gains);
  ClosedLoopSystem cl;
  cl.transition = model.transition;
  cl.phi.resize(model.period);
  for (int k = 0; k < model.period; ++k) {
    cl.phi[k].reserve(model.num_modes);
    for (int i = 0; i < model.num_modes; ++i) {
      cl.phi[k].push_back(model.A[k][i] + model.B[k][i] * gains.K[k][i]);
    }
  }
  return cl;
}

PeriodicMjlsModel ActuatorFailureExample() {
  constexpr int kPeriod = 10;
  PeriodicMjlsModel m;
  m.n_x = 2;
  m.n_u = 1;
  m.num_modes = 2;
  m.period = kPeriod;
  m.A.resize(kPeriod);
  m.B.resize(kPeriod);
  const double w = 0.2 * std::numbers::pi;
  for (int k = 0; k < kPeriod; ++k) {
    Matrix a1(2, 2), a2(2, 2);
    a1 << -0.5, 2.0, -0.4, 0.8 * std::sin(w * k);
    a2 << 0.5 * std::cos(w * k), 0.5, 0.8, 0.5;
    m.A[k] = {a1, a2};
    m.B[k] = {Matrix::Ones(2, 1), Matrix::Zero(2, 1)};
  }
  m.transition.resize(2, 2);
  m.transition << 0.8, 0.2, 0.9, 0.1;
  return ValidateModel(std::move(m));
}

ClosedLoopSystem StableModesUnstableJumpExample() {
  Matrix a1(2, 2), a2(2, 2), p(2, 2);
  a1 << -0.5, 2.0, -0.5, 0.5;
  a2 << -0.5, 0.1, 1.0, 0.3;
  p << 0.6, 0.4, 0.5, 0.5;
  return ClosedLoopSystem::TimeInvariant(ModeIndexedSet({a1, a2}), p);
}

}  // namespace pmjls
