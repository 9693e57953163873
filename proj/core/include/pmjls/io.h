#pragma once

#include <stdexcept>
#include <string>

#include "pmjls/model.h"
#include "pmjls/stability.h"
#include "pmjls/synthesis.h"

namespace pmjls::io {

// JSON interchange formats. Matrices are flat row-major number arrays;
// tables indexed [k][i] are nested arrays of those.
//
//   model:        n_x, n_u, num_modes, period, A[T][N], B[T][N],
//                 transition_matrix[N][N]
//   gains:        K[T][N]
//   p1 spec:      Q[N], R[N], u_max[N], hull_vertices[l][n_x], W[T][N] (opt)
//   p2 spec:      nu[T], u_max[N], W[T][N], rho[N]
//   certificate:  P[T][N], epsilon, nu[T] (opt), residuals[T][N] (opt)
//
// Unknown fields are rejected.

/// Malformed or inconsistent input. The message names the source and the
/// offending field or parse position.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string ReadTextFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& text);

/// Parses and validates. `source` labels error messages.
PeriodicMjlsModel ParseModel(const std::string& text, const std::string& source);
PeriodicMjlsModel LoadModel(const std::string& path);
std::string SerializeModel(const PeriodicMjlsModel& model);

ControllerGains ParseGains(const std::string& text, const std::string& source,
                           const PeriodicMjlsModel& model);
ControllerGains LoadGains(const std::string& path, const PeriodicMjlsModel& model);
std::string SerializeGains(const ControllerGains& gains);

SynthesisSpecP1 ParseSpecP1(const std::string& text, const std::string& source,
                            const PeriodicMjlsModel& model);
SynthesisSpecP2 ParseSpecP2(const std::string& text, const std::string& source,
                            const PeriodicMjlsModel& model);
SynthesisSpecP1 LoadSpecP1(const std::string& path, const PeriodicMjlsModel& model);
SynthesisSpecP2 LoadSpecP2(const std::string& path, const PeriodicMjlsModel& model);
std::string SerializeSpec(const SynthesisSpecP1& spec);
std::string SerializeSpec(const SynthesisSpecP2& spec);

LyapunovCertificate ParseCertificate(const std::string& text,
                                     const std::string& source,
                                     const PeriodicMjlsModel& model);
LyapunovCertificate LoadCertificate(const std::string& path,
                                    const PeriodicMjlsModel& model);
std::string SerializeCertificate(const LyapunovCertificate& cert);

}  // namespace pmjls::io
