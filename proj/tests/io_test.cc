#include <functional>

#include "doctest.h"
#include "json.hpp"
#include "pmjls/io.h"
#include "support.h"

using namespace pmjls;
using nlohmann::json;

namespace {

std::string MessageOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const io::InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("model round trip is exact") {
    const PeriodicMjlsModel m = ActuatorFailureExample();
    const PeriodicMjlsModel back = io::ParseModel(io::SerializeModel(m), "mem");
    CHECK(back.period == m.period);
    CHECK(back.transition == m.transition);
    for (int k = 0; k < m.period; ++k) {
      for (int i = 0; i < m.num_modes; ++i) {
        CHECK(back.A[k][i] == m.A[k][i]);
        CHECK(back.B[k][i] == m.B[k][i]);
      }
    }
  }

  TEST_CASE("matrices are row-major") {
    json j = json::parse(io::SerializeModel(ActuatorFailureExample()));
    CHECK(j["A"][0][0] == json({-0.5, 2.0, -0.4, 0.0}));
  }

  TEST_CASE("model errors name the field") {
    json j = json::parse(io::SerializeModel(ActuatorFailureExample()));
    json extra = j;
    extra["comment"] = "x";
    CHECK(MessageOf([&] { io::ParseModel(extra.dump(), "m.json"); }).find("comment") !=
          std::string::npos);

    json bad_shape = j;
    bad_shape["A"][2][1] = {1.0, 2.0, 3.0};
    const std::string msg = MessageOf([&] { io::ParseModel(bad_shape.dump(), "m.json"); });
    CHECK(msg.find("m.json") != std::string::npos);
    CHECK(msg.find("A") != std::string::npos);

    json bad_p = j;
    bad_p["transition_matrix"][0] = {0.8, 0.3};
    CHECK_THROWS_AS(io::ParseModel(bad_p.dump(), "m.json"), io::InputError);

    json missing = j;
    missing.erase("period");
    CHECK(MessageOf([&] { io::ParseModel(missing.dump(), "m.json"); }).find("period") !=
          std::string::npos);

    CHECK_THROWS_AS(io::ParseModel("{\"n_x\": 2,", "m.json"), io::InputError);
    CHECK_THROWS_AS(io::ParseModel("[]", "m.json"), io::InputError);
    CHECK_THROWS_AS(io::LoadModel("/nonexistent/model.json"), io::InputError);
  }

  TEST_CASE("gains, specs and certificates round trip") {
    const PeriodicMjlsModel m = ActuatorFailureExample();
    std::mt19937_64 rng(40);
    ControllerGains g = ControllerGains::Zero(m);
    for (auto& row : g.K) {
      for (auto& k : row) k = testing::RandomMatrix(rng, 1, 2);
    }
    const ControllerGains g2 = io::ParseGains(io::SerializeGains(g), "g", m);
    CHECK(g2.K[7][1] == g.K[7][1]);

    const SynthesisSpecP1 s1 = testing::ExampleSpecP1();
    const SynthesisSpecP1 s1b = io::ParseSpecP1(io::SerializeSpec(s1), "s1", m);
    CHECK(s1b.hull_vertices.size() == 4u);
    CHECK(s1b.u_max == s1.u_max);
    CHECK_FALSE(s1b.W);

    const SynthesisSpecP2 s2 = testing::ExampleSpecP2();
    const SynthesisSpecP2 s2b = io::ParseSpecP2(io::SerializeSpec(s2), "s2", m);
    CHECK(s2b.nu == s2.nu);
    CHECK(s2b.W[3][1] == s2.W[3][1]);
    CHECK(s2b.rho == s2.rho);

    LyapunovCertificate c;
    c.P.assign(10, testing::RandomPsdSet(rng, 2, 2));
    c.nu = s2.nu;
    c.epsilon = 1e-6;
    const LyapunovCertificate cb = io::ParseCertificate(io::SerializeCertificate(c), "c", m);
    CHECK(cb.P[9][1] == c.P[9][1]);
    CHECK(*cb.nu == *c.nu);
    CHECK(cb.epsilon == 1e-6);
  }

  TEST_CASE("specs are checked against the model and each other") {
    const PeriodicMjlsModel m = ActuatorFailureExample();
    const std::string p1 = io::SerializeSpec(testing::ExampleSpecP1());
    CHECK_THROWS_AS(io::ParseSpecP2(p1, "p1.json", m), io::InputError);
    json j = json::parse(p1);
    j["u_max"] = {125.0, -1.0};
    CHECK_THROWS_AS(io::ParseSpecP1(j.dump(), "p1.json", m), io::InputError);

    json gj = json::parse(io::SerializeGains(ControllerGains::Zero(m)));
    gj["K"].erase(gj["K"].begin());
    CHECK_THROWS_AS(io::ParseGains(gj.dump(), "g.json", m), io::InputError);
  }
}
