// C declarations for the Rust shim in core/clarabel_ffi/src/lib.rs.
#pragma once

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct {
  uint32_t max_iter;
  uint8_t verbose;
  double tol_gap_abs;
  double tol_gap_rel;
  double tol_feas;
  double tol_infeas_abs;
  double tol_infeas_rel;
} PmjlsClarabelSettings;

typedef struct {
  int32_t status;
  uint32_t iterations;
  double obj_val;
  double obj_val_dual;
  double solve_time;
  double r_prim;
  double r_dual;
} PmjlsClarabelInfo;

enum {
  PMJLS_CONE_ZERO = 0,
  PMJLS_CONE_NONNEG = 1,
  PMJLS_CONE_PSD_TRIANGLE = 2,
};

enum {
  PMJLS_STATUS_UNSOLVED = 0,
  PMJLS_STATUS_SOLVED = 1,
  PMJLS_STATUS_PRIMAL_INFEASIBLE = 2,
  PMJLS_STATUS_DUAL_INFEASIBLE = 3,
  PMJLS_STATUS_ALMOST_SOLVED = 4,
  PMJLS_STATUS_ALMOST_PRIMAL_INFEASIBLE = 5,
  PMJLS_STATUS_ALMOST_DUAL_INFEASIBLE = 6,
  PMJLS_STATUS_MAX_ITERATIONS = 7,
  PMJLS_STATUS_MAX_TIME = 8,
  PMJLS_STATUS_NUMERICAL_ERROR = 9,
  PMJLS_STATUS_INSUFFICIENT_PROGRESS = 10,
  PMJLS_STATUS_CALLBACK_TERMINATED = 11,
};

int32_t pmjls_clarabel_solve(size_t n, size_t m, const double* q,
                             const size_t* colptr, const size_t* rowval,
                             const double* nzval, const double* b,
                             size_t n_cones, const uint32_t* cone_kind,
                             const size_t* cone_dim,
                             const PmjlsClarabelSettings* settings,
                             double* x_out, double* z_out, double* s_out,
                             PmjlsClarabelInfo* info);

#ifdef __cplusplus
}
#endif
