#include "pmjls/io.h"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace pmjls::io {

using nlohmann::json;

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  json Parse(const std::string& text) const {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw InputError(source_ + ": invalid JSON: " + e.what());
    }
  }

  [[noreturn]] void Fail(const std::string& field, const std::string& what) const {
    throw InputError(source_ + ": field '" + field + "': " + what);
  }

  void RequireObject(const json& j, const std::set<std::string>& required,
                     const std::set<std::string>& optional) const {
    if (!j.is_object()) throw InputError(source_ + ": top level must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (!required.count(key) && !optional.count(key)) Fail(key, "unknown field");
    }
    for (const auto& key : required) {
      if (!j.contains(key)) Fail(key, "missing required field");
    }
  }

  double Number(const json& j, const std::string& field) const {
    if (!j.is_number()) Fail(field, "expected a number");
    return j.get<double>();
  }

  int Count(const json& j, const std::string& field, int min) const {
    if (!j.is_number_integer()) Fail(field, "expected an integer");
    const long v = j.get<long>();
    if (v < min) Fail(field, "must be >= " + std::to_string(min));
    return static_cast<int>(v);
  }

  const json& Array(const json& j, const std::string& field, std::size_t size) const {
    if (!j.is_array()) Fail(field, "expected an array");
    if (size != 0 && j.size() != size) {
      Fail(field, "expected " + std::to_string(size) + " entries, found " +
                      std::to_string(j.size()));
    }
    return j;
  }

  std::vector<double> Numbers(const json& j, const std::string& field,
                              std::size_t size) const {
    Array(j, field, size);
    std::vector<double> out;
    for (std::size_t t = 0; t < j.size(); ++t) {
      out.push_back(Number(j[t], field + "[" + std::to_string(t) + "]"));
    }
    return out;
  }

  Matrix RowMajor(const json& j, const std::string& field, int rows, int cols) const {
    const std::vector<double> v = Numbers(j, field, static_cast<std::size_t>(rows) * cols);
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) m(r, c) = v[r * cols + c];
    }
    return m;
  }

  PeriodicTable<Matrix> Table(const json& j, const std::string& field, int period,
                              int modes, int rows, int cols) const {
    Array(j, field, period);
    PeriodicTable<Matrix> t(period);
    for (int k = 0; k < period; ++k) {
      const std::string fk = field + "[" + std::to_string(k) + "]";
      Array(j[k], fk, modes);
      for (int i = 0; i < modes; ++i) {
        t[k].push_back(RowMajor(j[k][i], fk + "[" + std::to_string(i) + "]", rows, cols));
      }
    }
    return t;
  }

  ModeIndexedSet Modes(const json& j, const std::string& field, int modes,
                       int dim) const {
    Array(j, field, modes);
    std::vector<Matrix> entries;
    for (int i = 0; i < modes; ++i) {
      entries.push_back(RowMajor(j[i], field + "[" + std::to_string(i) + "]", dim, dim));
    }
    return ModeIndexedSet(std::move(entries));
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

json RowMajorJson(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  }
  return a;
}

json TableJson(const PeriodicTable<Matrix>& t) {
  json a = json::array();
  for (const auto& row : t) {
    json r = json::array();
    for (const auto& m : row) r.push_back(RowMajorJson(m));
    a.push_back(std::move(r));
  }
  return a;
}

json ModesJson(const ModeIndexedSet& s) {
  json a = json::array();
  for (const auto& m : s) a.push_back(RowMajorJson(m));
  return a;
}

// ModelError from validation becomes an InputError naming the file.
template <typename F>
auto Validated(const Reader& rd, F&& f) {
  try {
    return f();
  } catch (const ModelError& e) {
    throw InputError(rd.source() + ": " + e.what());
  }
}

}  // namespace

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path + ": cannot open file for writing");
  out << text;
  if (!out) throw InputError(path + ": write failed");
}

PeriodicMjlsModel ParseModel(const std::string& text, const std::string& source) {
  const Reader rd(source);
  const json j = rd.Parse(text);
  rd.RequireObject(j, {"n_x", "n_u", "num_modes", "period", "A", "B", "transition_matrix"},
                   {});
  PeriodicMjlsModel m;
  m.n_x = rd.Count(j["n_x"], "n_x", 1);
  m.n_u = rd.Count(j["n_u"], "n_u", 1);
  m.num_modes = rd.Count(j["num_modes"], "num_modes", 1);
  m.period = rd.Count(j["period"], "period", 1);
  m.A = rd.Table(j["A"], "A", m.period, m.num_modes, m.n_x, m.n_x);
  m.B = rd.Table(j["B"], "B", m.period, m.num_modes, m.n_x, m.n_u);
  const json& p = rd.Array(j["transition_matrix"], "transition_matrix", m.num_modes);
  m.transition.resize(m.num_modes, m.num_modes);
  for (int i = 0; i < m.num_modes; ++i) {
    const auto row = rd.Numbers(p[i], "transition_matrix[" + std::to_string(i) + "]",
                                m.num_modes);
    for (int c = 0; c < m.num_modes; ++c) m.transition(i, c) = row[c];
  }
  return Validated(rd, [&] { return ValidateModel(std::move(m)); });
}

PeriodicMjlsModel LoadModel(const std::string& path) {
  return ParseModel(ReadTextFile(path), path);
}

std::string SerializeModel(const PeriodicMjlsModel& model) {
  json j;
  j["n_x"] = model.n_x;
  j["n_u"] = model.n_u;
  j["num_modes"] = model.num_modes;
  j["period"] = model.period;
  j["A"] = TableJson(model.A);
  j["B"] = TableJson(model.B);
  json p = json::array();
  for (int i = 0; i < model.transition.rows(); ++i) {
    json row = json::array();
    for (int c = 0; c < model.transition.cols(); ++c) row.push_back(model.transition(i, c));
    p.push_back(std::move(row));
  }
  j["transition_matrix"] = std::move(p);
  return j.dump(2) + "\n";
}

ControllerGains ParseGains(const std::string& text, const std::string& source,
                           const PeriodicMjlsModel& model) {
  const Reader rd(source);
  const json j = rd.Parse(text);
  rd.RequireObject(j, {"K"}, {});
  ControllerGains g;
  g.period = model.period;
  g.num_modes = model.num_modes;
  g.K = rd.Table(j["K"], "K", model.period, model.num_modes, model.n_u, model.n_x);
  Validated(rd, [&] {
    ValidateGains(model, g);
    return 0;
  });
  return g;
}

ControllerGains LoadGains(const std::string& path, const PeriodicMjlsModel& model) {
  return ParseGains(ReadTextFile(path), path, model);
}

std::string SerializeGains(const ControllerGains& gains) {
  json j;
  j["K"] = TableJson(gains.K);
  return j.dump(2) + "\n";
}

SynthesisSpecP1 ParseSpecP1(const std::string& text, const std::string& source,
                            const PeriodicMjlsModel& model) {
  const Reader rd(source);
  const json j = rd.Parse(text);
  rd.RequireObject(j, {"Q", "R", "u_max", "hull_vertices"}, {"W"});
  SynthesisSpecP1 s;
  s.Q = rd.Modes(j["Q"], "Q", model.num_modes, model.n_x);
  s.R = rd.Modes(j["R"], "R", model.num_modes, model.n_u);
  s.u_max = rd.Numbers(j["u_max"], "u_max", model.num_modes);
  if (j.contains("W")) {
    s.W = rd.Table(j["W"], "W", model.period, model.num_modes, model.n_x, model.n_x);
  }
  const json& hull = rd.Array(j["hull_vertices"], "hull_vertices", 0);
  for (std::size_t v = 0; v < hull.size(); ++v) {
    const auto x = rd.Numbers(hull[v], "hull_vertices[" + std::to_string(v) + "]",
                              model.n_x);
    s.hull_vertices.push_back(Eigen::Map<const Vector>(x.data(), model.n_x));
  }
  Validated(rd, [&] {
    ValidateSpec(model, s);
    return 0;
  });
  return s;
}

SynthesisSpecP2 ParseSpecP2(const std::string& text, const std::string& source,
                            const PeriodicMjlsModel& model) {
  const Reader rd(source);
  const json j = rd.Parse(text);
  rd.RequireObject(j, {"nu", "u_max", "W", "rho"}, {});
  SynthesisSpecP2 s;
  s.nu = rd.Numbers(j["nu"], "nu", model.period);
  s.u_max = rd.Numbers(j["u_max"], "u_max", model.num_modes);
  s.W = rd.Table(j["W"], "W", model.period, model.num_modes, model.n_x, model.n_x);
  const auto rho = rd.Numbers(j["rho"], "rho", model.num_modes);
  s.rho = Eigen::Map<const Vector>(rho.data(), model.num_modes);
  Validated(rd, [&] {
    ValidateSpec(model, s);
    return 0;
  });
  return s;
}

SynthesisSpecP1 LoadSpecP1(const std::string& path, const PeriodicMjlsModel& model) {
  return ParseSpecP1(ReadTextFile(path), path, model);
}

SynthesisSpecP2 LoadSpecP2(const std::string& path, const PeriodicMjlsModel& model) {
  return ParseSpecP2(ReadTextFile(path), path, model);
}

std::string SerializeSpec(const SynthesisSpecP1& spec) {
  json j;
  j["Q"] = ModesJson(spec.Q);
  j["R"] = ModesJson(spec.R);
  j["u_max"] = spec.u_max;
  if (spec.W) j["W"] = TableJson(*spec.W);
  json hull = json::array();
  for (const auto& x : spec.hull_vertices) {
    hull.push_back(std::vector<double>(x.data(), x.data() + x.size()));
  }
  j["hull_vertices"] = std::move(hull);
  return j.dump(2) + "\n";
}

std::string SerializeSpec(const SynthesisSpecP2& spec) {
  json j;
  j["nu"] = spec.nu;
  j["u_max"] = spec.u_max;
  j["W"] = TableJson(spec.W);
  j["rho"] = std::vector<double>(spec.rho.data(), spec.rho.data() + spec.rho.size());
  return j.dump(2) + "\n";
}

LyapunovCertificate ParseCertificate(const std::string& text,
                                     const std::string& source,
                                     const PeriodicMjlsModel& model) {
  const Reader rd(source);
  const json j = rd.Parse(text);
  rd.RequireObject(j, {"P", "epsilon"}, {"nu", "residuals"});
  LyapunovCertificate c;
  const auto p = rd.Table(j["P"], "P", model.period, model.num_modes, model.n_x, model.n_x);
  for (const auto& row : p) c.P.emplace_back(row);
  c.epsilon = rd.Number(j["epsilon"], "epsilon");
  if (c.epsilon < 0.0) rd.Fail("epsilon", "must be >= 0");
  if (j.contains("nu") && !j["nu"].is_null()) {
    c.nu = rd.Numbers(j["nu"], "nu", model.period);
  }
  return c;
}

LyapunovCertificate LoadCertificate(const std::string& path,
                                    const PeriodicMjlsModel& model) {
  return ParseCertificate(ReadTextFile(path), path, model);
}

std::string SerializeCertificate(const LyapunovCertificate& cert) {
  json j;
  PeriodicTable<Matrix> p;
  for (const auto& pk : cert.P) p.emplace_back(pk.begin(), pk.end());
  j["P"] = TableJson(p);
  j["epsilon"] = cert.epsilon;
  if (cert.nu) j["nu"] = *cert.nu;
  if (!cert.residuals.empty()) j["residuals"] = cert.residuals;
  return j.dump(2) + "\n";
}

}  // namespace pmjls::io
