#pragma once

#include <random>

#include "pmjls/model.h"
#include "pmjls/synthesis.h"

namespace pmjls::testing {

inline Matrix RandomMatrix(std::mt19937_64& rng, int rows, int cols,
                           double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) m(r, c) = g(rng);
  }
  return m;
}

inline Matrix RandomSymmetric(std::mt19937_64& rng, int n) {
  const Matrix a = RandomMatrix(rng, n, n);
  return (a + a.transpose()) / 2.0;
}

inline Matrix RandomPsd(std::mt19937_64& rng, int n) {
  const Matrix a = RandomMatrix(rng, n, n);
  return a * a.transpose();
}

inline Matrix RandomStochastic(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Matrix p(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) p(r, c) = u(rng);
    p.row(r) /= p.row(r).sum();
    p(r, n - 1) = 1.0 - p.row(r).head(n - 1).sum();
  }
  return p;
}

inline ModeIndexedSet RandomSymmetricSet(std::mt19937_64& rng, int num_modes, int n) {
  std::vector<Matrix> v;
  for (int i = 0; i < num_modes; ++i) v.push_back(RandomSymmetric(rng, n));
  return ModeIndexedSet(std::move(v));
}

inline ModeIndexedSet RandomPsdSet(std::mt19937_64& rng, int num_modes, int n) {
  std::vector<Matrix> v;
  for (int i = 0; i < num_modes; ++i) v.push_back(RandomPsd(rng, n));
  return ModeIndexedSet(std::move(v));
}

inline ClosedLoopSystem RandomClosedLoop(std::mt19937_64& rng, int num_modes,
                                         int n, int period, double scale) {
  ClosedLoopSystem cl;
  cl.transition = RandomStochastic(rng, num_modes);
  cl.phi.resize(period);
  for (auto& row : cl.phi) {
    for (int i = 0; i < num_modes; ++i) row.push_back(RandomMatrix(rng, n, n, scale));
  }
  return cl;
}

inline PeriodicMjlsModel RandomModel(std::mt19937_64& rng, int num_modes, int n_x,
                                     int n_u, int period, double scale) {
  PeriodicMjlsModel m;
  m.n_x = n_x;
  m.n_u = n_u;
  m.num_modes = num_modes;
  m.period = period;
  m.transition = RandomStochastic(rng, num_modes);
  m.A.resize(period);
  m.B.resize(period);
  for (int k = 0; k < period; ++k) {
    for (int i = 0; i < num_modes; ++i) {
      m.A[k].push_back(RandomMatrix(rng, n_x, n_x, scale));
      m.B[k].push_back(RandomMatrix(rng, n_x, n_u));
    }
  }
  return m;
}

inline SynthesisSpecP1 ExampleSpecP1() {
  SynthesisSpecP1 s;
  s.Q = ModeIndexedSet(2, 2);
  s.R = ModeIndexedSet::Identity(2, 1);
  s.u_max = {125.0, 125.0};
  for (double a : {100.0, -100.0}) {
    for (double b : {100.0, -100.0}) s.hull_vertices.push_back(Vector{{a, b}});
  }
  return s;
}

inline SynthesisSpecP2 ExampleSpecP2() {
  SynthesisSpecP2 s;
  s.nu.assign(10, 1.0);
  s.nu[4] = 0.9;
  s.u_max = {125.0, 125.0};
  s.W.assign(10, std::vector<Matrix>(2, Matrix::Identity(2, 2) / (250.0 * 250.0)));
  s.rho = Vector::Constant(2, 0.5);
  return s;
}

}  // namespace pmjls::testing
