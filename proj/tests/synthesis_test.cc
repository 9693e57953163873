#include "doctest.h"
#include "pmjls/clarabel_backend.h"
#include "pmjls/operators.h"
#include "pmjls/synthesis.h"
#include "support.h"

using namespace pmjls;

namespace {

struct Solved {
  PeriodicMjlsModel model = ActuatorFailureExample();
  SynthesisResult p1;
  SynthesisResult p2;
  Solved() {
    sdp::ClarabelBackend backend;
    p1 = SynthesizeP1(model, testing::ExampleSpecP1(), kDefaultSynthesisEpsilon, backend);
    p2 = SynthesizeP2(model, testing::ExampleSpecP2(), kDefaultSynthesisEpsilon, backend);
  }
};

const Solved& Example() {
  static const Solved s;
  return s;
}

// Largest ||K_k(i) x|| over the ellipsoid x^T S_k(i)^{-1} x <= 1, relative to u_max.
double WorstControlRatio(const SynthesisResult& r, const std::vector<double>& u_max) {
  double worst = 0.0;
  for (std::size_t k = 0; k < r.S.size(); ++k) {
    for (int i = 0; i < r.S[k].num_modes(); ++i) {
      const double n = OperatorNorm(r.gains.K[k][i] * PsdSqrt(r.S[k][i]));
      worst = std::max(worst, n / u_max[i]);
    }
  }
  return worst;
}

// Largest x^T phi^T P_{k+1}(j) phi x over x^T P_k(i) x <= 1.
double WorstInvariance(const SynthesisResult& r, const ClosedLoopSystem& cl) {
  const int period = cl.period();
  double worst = 0.0;
  for (int k = 0; k < period; ++k) {
    for (int i = 0; i < cl.num_modes(); ++i) {
      const Matrix root = PsdSqrt(r.S[k][i]);
      for (int j = 0; j < cl.num_modes(); ++j) {
        const Matrix p_next = r.S[(k + 1) % period][j].inverse();
        const Matrix m = root * cl.phi[k][i].transpose() * p_next * cl.phi[k][i] * root;
        worst = std::max(worst, -MinEigenvalue(-m));
      }
    }
  }
  return worst;
}

}  // namespace

TEST_SUITE("synthesis") {
  TEST_CASE("spec validation") {
    const PeriodicMjlsModel m = ActuatorFailureExample();
    SynthesisSpecP1 s1 = testing::ExampleSpecP1();
    CHECK_NOTHROW(ValidateSpec(m, s1));
    s1.u_max[1] = 0.0;
    CHECK_THROWS_AS(ValidateSpec(m, s1), ModelError);
    s1 = testing::ExampleSpecP1();
    s1.R = ModeIndexedSet(2, 1);
    CHECK_THROWS_AS(ValidateSpec(m, s1), ModelError);
    s1 = testing::ExampleSpecP1();
    s1.hull_vertices.push_back(Vector::Zero(3));
    CHECK_THROWS_AS(ValidateSpec(m, s1), ModelError);
    s1 = testing::ExampleSpecP1();
    s1.hull_vertices.clear();
    CHECK_THROWS_AS(ValidateSpec(m, s1), ModelError);

    SynthesisSpecP2 s2 = testing::ExampleSpecP2();
    CHECK_NOTHROW(ValidateSpec(m, s2));
    s2.nu[4] = 1.0;
    CHECK_THROWS_AS(ValidateSpec(m, s2), ModelError);
    s2 = testing::ExampleSpecP2();
    s2.rho = Vector{{0.7, 0.7}};
    CHECK_THROWS_AS(ValidateSpec(m, s2), ModelError);
    s2 = testing::ExampleSpecP2();
    s2.W[2][1] = -Matrix::Identity(2, 2);
    CHECK_THROWS_AS(ValidateSpec(m, s2), ModelError);
    s2 = testing::ExampleSpecP2();
    s2.nu.pop_back();
    CHECK_THROWS_AS(ValidateSpec(m, s2), ModelError);
  }

  TEST_CASE("assembled problems have the expected LMI count and sizes") {
    const PeriodicMjlsModel m = ActuatorFailureExample();
    const AssembledSynthesis a = BuildP1Sdp(m, testing::ExampleSpecP1());
    // hull (N l) + decrease (T N) + invariance (T N N) + control (T N)
    CHECK(a.problem.lmis().size() == 2u * 4 + 20 + 40 + 20);
    REQUIRE(a.vars.beta);
    CHECK(a.vars.S.size() == 10u);
    int decrease_dim = 0;
    for (const auto& lmi : a.problem.lmis()) decrease_dim = std::max(decrease_dim, lmi.expr.rows());
    CHECK(decrease_dim == 2 + 2 * 2 + 2 + 1);

    const AssembledSynthesis b = BuildP2Sdp(m, testing::ExampleSpecP2());
    // decrease + invariance + control + state bound
    CHECK(b.problem.lmis().size() == 20u + 40 + 20 + 20);
    CHECK_FALSE(b.vars.beta);

    SynthesisSpecP1 with_w = testing::ExampleSpecP1();
    with_w.W = PeriodicTable<Matrix>(10, std::vector<Matrix>(2, Matrix::Identity(2, 2) * 1e-6));
    CHECK(BuildP1Sdp(m, with_w).problem.lmis().size() == 108u);
  }

  TEST_CASE("gain extraction") {
    std::vector<ModeIndexedSet> s{ModeIndexedSet(std::vector<Matrix>{Matrix{{2.0, 0.0}, {0.0, 4.0}}})};
    PeriodicTable<Matrix> y{{Matrix{{2.0, 4.0}}}};
    const ControllerGains g = ExtractGains(s, y, 1e-9);
    CHECK((g.K[0][0] - Matrix{{1.0, 1.0}}).norm() <= 1e-14);
    std::vector<ModeIndexedSet> singular{ModeIndexedSet(std::vector<Matrix>{Matrix{{1.0, 0.0}, {0.0, 1e-12}}})};
    try {
      ExtractGains(singular, y, 1e-9);
      FAIL("expected GainExtractionError");
    } catch (const GainExtractionError& e) {
      CHECK(e.min_eigenvalue() == doctest::Approx(1e-12));
    }
  }

  TEST_CASE("stage cost weights") {
    SynthesisSpecP1 s = testing::ExampleSpecP1();
    s.Q = ModeIndexedSet::Identity(2, 2);
    ControllerGains g;
    g.period = 1;
    g.num_modes = 2;
    g.K = {{Matrix{{1.0, 2.0}}, Matrix{{0.0, 0.0}}}};
    const auto m = StageCostWeights(s, g);
    CHECK((m[0][0] - Matrix{{2.0, 2.0}, {2.0, 5.0}}).norm() <= 1e-14);
    CHECK(m[0][1] == Matrix::Identity(2, 2));
  }

  TEST_CASE("cost synthesis on the actuator failure example") {
    const Solved& ex = Example();
    const SynthesisResult& r = ex.p1;
    REQUIRE(r.status == SynthesisStatus::kSuccess);
    REQUIRE(r.beta);
    CHECK(std::isfinite(*r.beta));
    CHECK(r.checks.passed);
    REQUIRE(r.certificate_check);
    CHECK(r.certificate_check->valid);

    const ClosedLoopSystem cl = CloseLoop(ex.model, r.gains);
    const double radius = SpectralRadius(OnePeriodOperator(cl));
    CHECK(radius == doctest::Approx(r.closed_loop_radius).epsilon(1e-9));
    CHECK(radius < 0.1);

    for (const Vector& v : testing::ExampleSpecP1().hull_vertices) {
      for (int i = 0; i < 2; ++i) {
        CHECK(v.dot(r.S[0][i].ldlt().solve(v)) <= 1.0 + 1e-6);
      }
    }
    CHECK(WorstControlRatio(r, {125.0, 125.0}) <= 1.0 + 1e-6);
    CHECK(WorstInvariance(r, cl) <= 1.0 + 1e-6);

    // The certified cost bound holds for the Lyapunov matrices of the result.
    const auto weights = StageCostWeights(testing::ExampleSpecP1(), r.gains);
    const Vector x0{{100.0, -100.0}};
    const double bound = PerformanceBound(r.certificate, cl, weights, *r.beta, x0, 0);
    CHECK(bound <= *r.beta * (1.0 + 1e-6));
  }

  TEST_CASE("region synthesis on the actuator failure example") {
    const Solved& ex = Example();
    const SynthesisResult& r = ex.p2;
    REQUIRE(r.status == SynthesisStatus::kSuccess);
    CHECK(r.checks.passed);
    REQUIRE(r.certificate_check);
    CHECK(r.certificate_check->valid);
    REQUIRE(r.certificate.nu);
    CHECK((*r.certificate.nu)[4] == 0.9);

    const ClosedLoopSystem cl = CloseLoop(ex.model, r.gains);
    CHECK(SpectralRadius(OnePeriodOperator(cl)) < 0.1);
    CHECK(WorstControlRatio(r, {125.0, 125.0}) <= 1.0 + 1e-6);
    CHECK(WorstInvariance(r, cl) <= 1.0 + 1e-6);

    // Ellipsoids fit inside the state bound ||x|| <= 250.
    for (const auto& set : r.S) {
      for (const auto& s : set) CHECK(-MinEigenvalue(-s) <= 250.0 * 250.0 * (1.0 + 1e-6));
    }
    REQUIRE(r.ellipsoid_traces.size() == 2u);
    CHECK(r.ellipsoid_traces[0] == doctest::Approx(r.S[0][0].trace()));
    CHECK(r.objective == doctest::Approx(-(0.5 * r.S[0][0].trace() + 0.5 * r.S[0][1].trace())));
  }

  TEST_CASE("uncontrollable unstable systems are infeasible") {
    PeriodicMjlsModel m;
    m.n_x = 1;
    m.n_u = 1;
    m.num_modes = 1;
    m.period = 1;
    m.A = {{Matrix::Constant(1, 1, 2.0)}};
    m.B = {{Matrix::Zero(1, 1)}};
    m.transition = Matrix::Ones(1, 1);
    SynthesisSpecP1 s;
    s.Q = ModeIndexedSet(1, 1);
    s.R = ModeIndexedSet::Identity(1, 1);
    s.u_max = {1.0};
    s.hull_vertices = {Vector::Ones(1)};
    sdp::ClarabelBackend backend;
    const SynthesisResult r = SynthesizeP1(m, s, kDefaultSynthesisEpsilon, backend);
    CHECK(r.status == SynthesisStatus::kInfeasible);
  }

  TEST_CASE("status strings") {
    CHECK(ToString(SynthesisStatus::kSuccess) == "success");
    CHECK(ToString(SynthesisStatus::kInfeasible) == "infeasible");
  }
}
