#include "pmjls/clarabel_backend.h"

#include <cstdint>

#include "clarabel_ffi.h"

namespace pmjls::sdp {

namespace {

BackendStatus MapStatus(int32_t s) {
  switch (s) {
    case PMJLS_STATUS_SOLVED:
      return BackendStatus::kSolved;
    case PMJLS_STATUS_ALMOST_SOLVED:
      return BackendStatus::kAlmostSolved;
    case PMJLS_STATUS_PRIMAL_INFEASIBLE:
    case PMJLS_STATUS_ALMOST_PRIMAL_INFEASIBLE:
      return BackendStatus::kPrimalInfeasible;
    case PMJLS_STATUS_DUAL_INFEASIBLE:
    case PMJLS_STATUS_ALMOST_DUAL_INFEASIBLE:
      return BackendStatus::kDualInfeasible;
    default:
      return BackendStatus::kFailed;
  }
}

const char* StatusName(int32_t s) {
  switch (s) {
    case PMJLS_STATUS_UNSOLVED: return "Unsolved";
    case PMJLS_STATUS_SOLVED: return "Solved";
    case PMJLS_STATUS_PRIMAL_INFEASIBLE: return "PrimalInfeasible";
    case PMJLS_STATUS_DUAL_INFEASIBLE: return "DualInfeasible";
    case PMJLS_STATUS_ALMOST_SOLVED: return "AlmostSolved";
    case PMJLS_STATUS_ALMOST_PRIMAL_INFEASIBLE: return "AlmostPrimalInfeasible";
    case PMJLS_STATUS_ALMOST_DUAL_INFEASIBLE: return "AlmostDualInfeasible";
    case PMJLS_STATUS_MAX_ITERATIONS: return "MaxIterations";
    case PMJLS_STATUS_MAX_TIME: return "MaxTime";
    case PMJLS_STATUS_NUMERICAL_ERROR: return "NumericalError";
    case PMJLS_STATUS_INSUFFICIENT_PROGRESS: return "InsufficientProgress";
    case PMJLS_STATUS_CALLBACK_TERMINATED: return "CallbackTerminated";
  }
  return "Unknown";
}

uint32_t ConeCode(ConeKind k) {
  switch (k) {
    case ConeKind::kZero: return PMJLS_CONE_ZERO;
    case ConeKind::kNonnegative: return PMJLS_CONE_NONNEG;
    case ConeKind::kPsdTriangle: return PMJLS_CONE_PSD_TRIANGLE;
  }
  return PMJLS_CONE_ZERO;
}

}  // namespace

BackendResult ClarabelBackend::Solve(const ConicForm& form) {
  BackendResult result;
  std::vector<uint32_t> kinds;
  std::vector<std::size_t> dims;
  for (const auto& c : form.cones) {
    kinds.push_back(ConeCode(c.kind));
    dims.push_back(static_cast<std::size_t>(c.dim));
  }
  PmjlsClarabelSettings st{};
  st.max_iter = static_cast<uint32_t>(settings_.max_iterations);
  st.verbose = settings_.verbose ? 1 : 0;
  st.tol_gap_abs = settings_.tol_gap_abs;
  st.tol_gap_rel = settings_.tol_gap_rel;
  st.tol_feas = settings_.tol_feas;
  st.tol_infeas_abs = settings_.tol_infeas_abs;
  st.tol_infeas_rel = settings_.tol_infeas_rel;

  std::vector<double> x(form.num_vars), z(form.num_rows), s(form.num_rows);
  PmjlsClarabelInfo info{};
  const int32_t rc = pmjls_clarabel_solve(
      static_cast<std::size_t>(form.num_vars),
      static_cast<std::size_t>(form.num_rows), form.q.data(),
      form.colptr.data(), form.rowval.data(), form.nzval.data(),
      form.b.data(), kinds.size(), kinds.data(), dims.data(), &st, x.data(),
      z.data(), s.data(), &info);
  if (rc != 0) {
    result.status = BackendStatus::kFailed;
    result.message = rc == -1 ? "invalid problem data" : "solver panicked";
    return result;
  }
  result.status = MapStatus(info.status);
  result.iterations = static_cast<int>(info.iterations);
  result.solve_seconds = info.solve_time;
  result.message = StatusName(info.status);
  result.x = std::move(x);
  return result;
}

}  // namespace pmjls::sdp
