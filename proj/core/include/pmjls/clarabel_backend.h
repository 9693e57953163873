#pragma once

#include "pmjls/sdp.h"

namespace pmjls::sdp {

/// Adapter to the Clarabel interior-point conic solver.
class ClarabelBackend final : public SdpBackend {
 public:
  struct Settings {
    int max_iterations = 200;
    bool verbose = false;
    double tol_gap_abs = 1e-9;
    double tol_gap_rel = 1e-9;
    double tol_feas = 1e-9;
    double tol_infeas_abs = 1e-9;
    double tol_infeas_rel = 1e-9;
  };

  ClarabelBackend() = default;
  explicit ClarabelBackend(Settings settings) : settings_(settings) {}

  std::string name() const override { return "clarabel"; }
  BackendResult Solve(const ConicForm& form) override;

  const Settings& settings() const { return settings_; }

 private:
  Settings settings_;
};

}  // namespace pmjls::sdp
